"""Stage orchestration shared by the command-line entry points.

Each stage reads and writes versioned artifacts under the run's output
directory so stages can be rerun, cached and tested independently:

    prepare : clean.json, design_matrix.csv, split.json, scaler.json,
              prepare_manifest.json
    train   : models/<family>.json, train_manifest.json
    tune    : tune_<family>.json
    evaluate: reports/<family>_report.json, reports/roc_<family>.csv,
              reports/roc.svg, reports/importance.csv,
              reports/evaluate_manifest.json

All JSON is written with sorted keys and no timestamps, so identical
inputs and seeds produce byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, RiskmlError, ValidationError
from .evaluation import auc_trapezoid, classification_report, render_roc_svg, roc_curve
from .features import (
    DesignMatrix,
    OneHotEncoder,
    ScalerParams,
    SplitIndices,
    apply_scaler,
    fit_scaler,
    split,
)
from .forest import feature_importances
from .ingest import CleanDataset, cleanse, parse_dataset
from .models import DEFAULT_PARAMS, DISPLAY_NAMES, FAMILIES, make_model, model_from_dict
from .schema import DEFAULT_DATETIME_COLUMN, DEFAULT_DATETIME_FORMAT, default_schema
from .synth import generate_fixture
from .tuning import DEFAULT_TRIAL_CAP, ParamGrid, grid_search

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass
class RunConfig:
    """Pipeline settings; defaults reproduce the published study setup."""

    data: str | None = None
    out: str = "run"
    seed: int = 0
    train_fraction: float = 0.6
    delimiter: str = ";"
    datetime_column: str = DEFAULT_DATETIME_COLUMN
    datetime_format: str = DEFAULT_DATETIME_FORMAT
    models: list[str] = field(default_factory=lambda: list(FAMILIES))
    params: dict[str, dict] = field(default_factory=dict)
    grids: dict[str, dict] = field(default_factory=dict)
    trial_cap: int = DEFAULT_TRIAL_CAP
    roc_svg: bool = True

    def __post_init__(self) -> None:
        unknown = [m for m in self.models if m not in FAMILIES]
        if unknown:
            raise ValidationError(
                f"unknown model family in config: {', '.join(unknown)}"
            )
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(
                f"train_fraction must be in (0,1), got {self.train_fraction}"
            )

    def model_params(self, family: str) -> dict:
        return {**DEFAULT_PARAMS[family], **self.params.get(family, {})}

    def to_dict(self) -> dict:
        return {
            "data": self.data,
            "out": self.out,
            "seed": int(self.seed),
            "train_fraction": float(self.train_fraction),
            "delimiter": self.delimiter,
            "datetime_column": self.datetime_column,
            "datetime_format": self.datetime_format,
            "models": list(self.models),
            "params": {k: dict(v) for k, v in self.params.items()},
            "grids": {k: dict(v) for k, v in self.grids.items()},
            "trial_cap": int(self.trial_cap),
        }


def load_config_file(path: str | Path) -> dict:
    """Parse a TOML or JSON config file into a plain dict."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file not found: {path}")
    data = path.read_bytes()
    if path.suffix.lower() == ".json":
        return json.loads(data.decode("utf-8"))
    if path.suffix.lower() == ".toml":
        return tomllib.loads(data.decode("utf-8"))
    try:
        return json.loads(data.decode("utf-8"))
    except json.JSONDecodeError:
        try:
            return tomllib.loads(data.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"{path} is neither valid JSON nor TOML: {exc}")


def build_config(config_path: str | Path | None = None, **overrides) -> RunConfig:
    """Config file values overridden by non-None keyword arguments."""
    values: dict = {}
    if config_path is not None:
        values.update(load_config_file(config_path))
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ValidationError(
            f"unknown config key(s): {', '.join(sorted(unknown))}"
        )
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# artifact helpers


def _dump_json(obj: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _load_json(path: Path, stage: str) -> dict:
    if not path.exists():
        raise ValidationError(
            f"missing artifact {path.name}; run 'riskml {stage}' first"
        )
    return json.loads(path.read_text(encoding="utf-8"))


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _artifact_hashes(out: Path, names: list[str]) -> dict[str, str]:
    return {name: sha256_file(out / name) for name in names}


# ---------------------------------------------------------------------------
# stages


def run_prepare(config: RunConfig) -> dict:
    """Ingest, cleanse, encode, split and fit the scaler; write artifacts."""
    if config.data is None:
        raise ValidationError("no dataset path given (use --data or the config file)")
    data_path = Path(config.data)
    if not data_path.exists():
        raise ValidationError(f"dataset file not found: {data_path}")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    schema = default_schema(config.datetime_column)
    raw = parse_dataset(data_path, schema=schema, delimiter=config.delimiter)
    clean = cleanse(raw, datetime_format=config.datetime_format)
    matrix = OneHotEncoder().fit(clean).transform(clean)
    indices = split(matrix.n_rows, config.train_fraction, config.seed)
    scaler = fit_scaler(matrix, indices.train)

    _dump_json(clean.to_dict(), out / "clean.json")
    matrix.write_csv(out / "design_matrix.csv")
    _dump_json(indices.to_dict(), out / "split.json")
    _dump_json(scaler.to_dict(), out / "scaler.json")

    class0 = int(np.sum(matrix.labels == 0))
    class1 = int(np.sum(matrix.labels == 1))
    manifest = {
        "command": "prepare",
        "config": config.to_dict(),
        "seed": int(config.seed),
        "source": str(data_path),
        "source_sha256": sha256_file(data_path),
        "n_raw_rows": raw.n_rows,
        "n_clean_rows": clean.n_rows,
        "n_dropped": clean.dropped.n_dropped,
        "drop_reasons": dict(Counter(clean.dropped.reasons)),
        "class_counts": {"0": class0, "1": class1},
        "n_features": matrix.n_columns,
        "n_train": int(indices.train.shape[0]),
        "n_test": int(indices.test.shape[0]),
        "artifacts": _artifact_hashes(
            out, ["clean.json", "design_matrix.csv", "split.json", "scaler.json"]
        ),
    }
    _dump_json(manifest, out / "prepare_manifest.json")
    return manifest


def _load_prepared(out: Path) -> tuple[DesignMatrix, SplitIndices, ScalerParams]:
    matrix_path = out / "design_matrix.csv"
    if not matrix_path.exists():
        raise ValidationError(
            "missing artifact design_matrix.csv; run 'riskml prepare' first"
        )
    matrix = DesignMatrix.from_csv(matrix_path)
    indices = SplitIndices.from_dict(_load_json(out / "split.json", "prepare"))
    scaler = ScalerParams.from_dict(_load_json(out / "scaler.json", "prepare"))
    return matrix, indices, scaler


def run_train(config: RunConfig) -> dict:
    """Fit the requested model families on the scaled training split."""
    out = Path(config.out)
    matrix, indices, scaler = _load_prepared(out)
    scaled = apply_scaler(matrix, scaler)
    X_train = scaled.values[indices.train]
    y_train = scaled.labels[indices.train]

    models_dir = out / "models"
    models_dir.mkdir(parents=True, exist_ok=True)
    statuses: dict[str, dict] = {}
    for family in config.models:
        params = config.model_params(family)
        tune_log = None
        try:
            if family in config.grids:
                grid = ParamGrid(family=family, axes=dict(config.grids[family]))
                result = grid_search(
                    X_train, y_train, grid, config.seed, trial_cap=config.trial_cap
                )
                params = {**params, **result.best_params}
                tune_log = result.to_dict()
            model = make_model(family, params, seed=config.seed)
            model.fit(X_train, y_train)
            _dump_json(model.to_dict(), models_dir / f"{family}.json")
            status = {"trained": True, "params": params, "error": None}
        except ConvergenceError as exc:
            status = {"trained": False, "params": params, "error": str(exc)}
        if tune_log is not None:
            status["tuning"] = tune_log
        statuses[family] = status

    trained = [f for f, s in statuses.items() if s["trained"]]
    if not trained:
        raise ConvergenceError(
            "no model converged: "
            + "; ".join(f"{f}: {s['error']}" for f, s in statuses.items())
        )
    manifest = {
        "command": "train",
        "config": config.to_dict(),
        "seed": int(config.seed),
        "models": statuses,
        "artifacts": {
            f"models/{family}.json": sha256_file(models_dir / f"{family}.json")
            for family in trained
        },
        "inputs": _artifact_hashes(
            out, ["design_matrix.csv", "split.json", "scaler.json"]
        ),
    }
    _dump_json(manifest, out / "train_manifest.json")
    return manifest


def run_tune(config: RunConfig, grid_file: str | Path) -> dict:
    """Standalone grid search; writes tune_<family>.json per grid."""
    out = Path(config.out)
    matrix, indices, scaler = _load_prepared(out)
    scaled = apply_scaler(matrix, scaler)
    X_train = scaled.values[indices.train]
    y_train = scaled.labels[indices.train]

    spec = load_config_file(grid_file)
    if "grids" in spec:
        raw_grids = spec["grids"]
        grid_list = [
            ParamGrid(family=fam, axes=dict(axes)) for fam, axes in raw_grids.items()
        ]
    else:
        grid_list = [ParamGrid.from_dict(spec)]

    results = {}
    for grid in grid_list:
        result = grid_search(
            X_train, y_train, grid, config.seed, trial_cap=config.trial_cap
        )
        _dump_json(result.to_dict(), out / f"tune_{grid.family}.json")
        results[grid.family] = result.to_dict()
    return results


def run_evaluate(config: RunConfig) -> dict:
    """Score every trained model on the test split and write reports."""
    out = Path(config.out)
    matrix, indices, scaler = _load_prepared(out)
    scaled = apply_scaler(matrix, scaler)
    X_train = scaled.values[indices.train]
    y_train = scaled.labels[indices.train]
    X_test = scaled.values[indices.test]
    y_test = scaled.labels[indices.test]

    models_dir = out / "models"
    train_manifest = _load_json(out / "train_manifest.json", "train")
    reports_dir = out / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)

    input_hashes = _artifact_hashes(
        out, ["design_matrix.csv", "split.json", "scaler.json"]
    )
    summaries: dict[str, dict] = {}
    curves: list[tuple[str, object, float]] = []
    for family in config.models:
        model_path = models_dir / f"{family}.json"
        if not model_path.exists():
            recorded = train_manifest.get("models", {}).get(family)
            if recorded is not None and not recorded.get("trained", False):
                summaries[family] = {"skipped": recorded.get("error", "not trained")}
                continue
            raise ValidationError(
                f"missing artifact models/{family}.json; run 'riskml train' first"
            )
        model = model_from_dict(
            json.loads(model_path.read_text(encoding="utf-8")),
            reference=X_train,
            reference_labels=y_train,
        )
        proba = model.predict_proba(X_test)
        predictions = (proba[:, 1] > proba[:, 0]).astype(np.int64)
        scores = proba[:, 1]

        report = classification_report(predictions, y_test)
        curve = roc_curve(scores, y_test)
        report.auc = auc_trapezoid(curve)
        curve_name = f"roc_{family}.csv"
        (reports_dir / curve_name).write_text(curve.to_csv(), encoding="utf-8")
        curves.append((DISPLAY_NAMES[family], curve, report.auc))

        payload = report.to_dict()
        payload["family"] = family
        payload["manifest"] = {
            "seed": int(config.seed),
            "train_fraction": float(config.train_fraction),
            "params": train_manifest["models"][family]["params"],
            "artifact_hashes": {
                **input_hashes,
                f"models/{family}.json": sha256_file(model_path),
            },
        }
        _dump_json(payload, reports_dir / f"{family}_report.json")
        summaries[family] = payload

    if config.roc_svg and curves:
        (reports_dir / "roc.svg").write_text(
            render_roc_svg(curves), encoding="utf-8"
        )

    if "forest" in summaries and "skipped" not in summaries["forest"]:
        forest = model_from_dict(
            json.loads((models_dir / "forest.json").read_text(encoding="utf-8"))
        )
        ranking = feature_importances(forest, scaled.column_names)
        (reports_dir / "importance.csv").write_text(
            ranking.to_csv(), encoding="utf-8"
        )

    manifest = {
        "command": "evaluate",
        "config": config.to_dict(),
        "seed": int(config.seed),
        "inputs": input_hashes,
        "reports": {
            family: (payload.get("auc") if "skipped" not in payload else None)
            for family, payload in summaries.items()
        },
    }
    _dump_json(manifest, reports_dir / "evaluate_manifest.json")
    return summaries


def run_synth(n: int, signal: float, seed: int, out_path: str | Path) -> Path:
    """Write a synthetic fixture CSV and return its path."""
    text = generate_fixture(n, signal, seed)
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
