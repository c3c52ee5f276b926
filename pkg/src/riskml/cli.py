"""Command-line interface: prepare, train, evaluate, tune, synth.

Exit codes: 0 success, 1 validation/input error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    CleanseError,
    ConvergenceError,
    ParseError,
    RiskmlError,
    SchemaError,
    ValidationError,
)
from .evaluation import ClassMetrics, EvaluationReport
from .models import DISPLAY_NAMES
from .pipeline import RunConfig, build_config, run_evaluate, run_prepare, run_synth, run_train, run_tune


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML or JSON config file")
    parser.add_argument("--out", help="run output directory")
    parser.add_argument("--seed", type=int, help="master random seed")


def _parse_models(value: str | None) -> list[str] | None:
    if value is None:
        return None
    return [m.strip() for m in value.split(",") if m.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskml",
        description=(
            "Train and evaluate injury-risk classifiers on the Porto "
            "Alegre traffic-accident table."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="ingest, cleanse, encode, split, scale")
    _add_common(p)
    p.add_argument("--data", help="path to the ';'-delimited CSV")
    p.add_argument("--train-fraction", type=float, dest="train_fraction")

    p = sub.add_parser("train", help="fit models on the training split")
    _add_common(p)
    p.add_argument(
        "--models", help="comma-separated families (logreg,svm,gnb,knn,forest)"
    )

    p = sub.add_parser("evaluate", help="score models on the test split")
    _add_common(p)
    p.add_argument("--models", help="comma-separated families to evaluate")
    p.add_argument(
        "--roc-svg",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="write the combined ROC SVG (default on)",
    )

    p = sub.add_parser("tune", help="grid search on the training split")
    _add_common(p)
    p.add_argument("--grid", required=True, help="TOML/JSON grid file")

    p = sub.add_parser("synth", help="generate a synthetic fixture CSV")
    p.add_argument("--n", type=int, required=True, help="number of rows (>= 10)")
    p.add_argument(
        "--signal", type=float, default=1.0,
        help="planted signal strength in [0,1]",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="synth.csv", help="output CSV path")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "data": getattr(args, "data", None),
        "out": args.out,
        "seed": args.seed,
        "train_fraction": getattr(args, "train_fraction", None),
        "models": _parse_models(getattr(args, "models", None)),
        "roc_svg": getattr(args, "roc_svg", None),
    }
    return build_config(args.config, **overrides)


def _print_report(family: str, payload: dict) -> None:
    if "skipped" in payload:
        print(f"== {DISPLAY_NAMES[family]}: skipped ({payload['skipped']})")
        return
    per_class = {
        int(cls): ClassMetrics(
            precision=m["precision"], recall=m["recall"],
            f1=m["f1"], support=m["support"],
        )
        for cls, m in payload["classes"].items()
    }
    average = ClassMetrics(
        precision=payload["average"]["precision"],
        recall=payload["average"]["recall"],
        f1=payload["average"]["f1"],
        support=payload["average"]["support"],
    )
    report = EvaluationReport(per_class=per_class, average=average, auc=payload["auc"])
    print(f"== {DISPLAY_NAMES[family]}")
    print(report.format_table())
    print()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            path = run_synth(args.n, args.signal, args.seed, args.out)
            print(f"wrote {path}")
            return 0

        config = _config_from_args(args)
        if args.command == "prepare":
            manifest = run_prepare(config)
            print(
                f"prepared {manifest['n_clean_rows']} rows "
                f"({manifest['n_dropped']} dropped) -> {config.out}"
            )
            print(
                f"class counts: non-injury {manifest['class_counts']['0']}, "
                f"injury {manifest['class_counts']['1']}"
            )
            print(
                f"split: {manifest['n_train']} train / {manifest['n_test']} test; "
                f"{manifest['n_features']} features"
            )
            return 0
        if args.command == "train":
            manifest = run_train(config)
            for family, status in manifest["models"].items():
                if status["trained"]:
                    print(f"trained {family}: params {json.dumps(status['params'])}")
                else:
                    print(f"FAILED  {family}: {status['error']}")
            return 0
        if args.command == "evaluate":
            summaries = run_evaluate(config)
            for family, payload in summaries.items():
                _print_report(family, payload)
            return 0
        if args.command == "tune":
            results = run_tune(config, args.grid)
            for family, result in results.items():
                print(
                    f"{family}: best AUC {result['best_auc']:.4f} with "
                    f"{json.dumps(result['best_params'])}"
                )
            return 0
        raise ValidationError(f"unknown command {args.command!r}")
    except (ValidationError, SchemaError, ParseError, CleanseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, RiskmlError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
