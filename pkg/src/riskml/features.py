"""Target derivation, one-hot encoding, standardization and splitting.

The injury label is the binarized sum of the five casualty counts.
Categorical columns expand to one indicator column per observed
category; count columns pass through as reals.  Scaling is
standardization fitted on the training rows only, applied identically
everywhere, with constant columns mapped to zero.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .ingest import CleanDataset
from .schema import CASUALTY_COLUMNS, ColumnKind

TARGET_COLUMN = "TARGET"


@dataclass
class DesignMatrix:
    """Dense feature matrix with named columns and {0,1} labels."""

    values: np.ndarray
    column_names: list[str]
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.values.ndim != 2:
            raise ValidationError("design matrix values must be 2-dimensional")
        if self.values.shape[1] != len(self.column_names):
            raise ValidationError(
                f"{self.values.shape[1]} columns but "
                f"{len(self.column_names)} column names"
            )
        if self.values.shape[0] != self.labels.shape[0]:
            raise ValidationError(
                f"{self.values.shape[0]} rows but {self.labels.shape[0]} labels"
            )

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]

    def take(self, rows: np.ndarray) -> "DesignMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        return DesignMatrix(
            values=self.values[rows],
            column_names=list(self.column_names),
            labels=self.labels[rows],
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.column_names + [TARGET_COLUMN])
        for row, label in zip(self.values, self.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @staticmethod
    def from_csv(text_or_path: str | Path) -> "DesignMatrix":
        if isinstance(text_or_path, Path):
            text = text_or_path.read_text(encoding="utf-8")
        else:
            text = str(text_or_path)
            if "\n" not in text:
                text = Path(text).read_text(encoding="utf-8")
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if not header or header[-1] != TARGET_COLUMN:
            raise ValidationError(f"last CSV column must be {TARGET_COLUMN}")
        names = header[:-1]
        values, labels = [], []
        for row in reader:
            values.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
        return DesignMatrix(
            values=np.asarray(values, dtype=float),
            column_names=names,
            labels=np.asarray(labels, dtype=np.int64),
        )


@dataclass
class ScalerParams:
    """Per-column mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray
    fitted_on: int

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float)
        self.std = np.asarray(self.std, dtype=float)
        if np.any(self.std < 0):
            raise ValidationError("stddev must be non-negative")

    @property
    def constant_columns(self) -> np.ndarray:
        return self.std == 0.0

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "mean": [float(v) for v in self.mean],
            "std": [float(v) for v in self.std],
            "fitted_on": int(self.fitted_on),
        }

    @staticmethod
    def from_dict(d: dict) -> "ScalerParams":
        return ScalerParams(
            mean=np.asarray(d["mean"], dtype=float),
            std=np.asarray(d["std"], dtype=float),
            fitted_on=int(d["fitted_on"]),
        )


@dataclass
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    seed: int
    train_fraction: float

    def __post_init__(self) -> None:
        self.train = np.asarray(self.train, dtype=np.int64)
        self.test = np.asarray(self.test, dtype=np.int64)

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "train": [int(i) for i in self.train],
            "test": [int(i) for i in self.test],
            "seed": int(self.seed),
            "train_fraction": float(self.train_fraction),
        }

    @staticmethod
    def from_dict(d: dict) -> "SplitIndices":
        return SplitIndices(
            train=np.asarray(d["train"], dtype=np.int64),
            test=np.asarray(d["test"], dtype=np.int64),
            seed=int(d["seed"]),
            train_fraction=float(d["train_fraction"]),
        )


def derive_target(
    feridos: np.ndarray | int,
    feridos_gr: np.ndarray | int,
    mortes: np.ndarray | int,
    mortes_post: np.ndarray | int,
    fatais: np.ndarray | int,
) -> np.ndarray:
    """Injury label: 1 iff the five casualty counts sum to at least 1."""
    parts = [
        np.atleast_1d(np.asarray(p, dtype=np.int64))
        for p in (feridos, feridos_gr, mortes, mortes_post, fatais)
    ]
    for part in parts:
        if np.any(part < 0):
            raise ValidationError("casualty counts must be non-negative")
    total = parts[0] + parts[1] + parts[2] + parts[3] + parts[4]
    return (total >= 1).astype(np.int64)


class OneHotEncoder:
    """Fit-once, apply-many encoder from a CleanDataset to a DesignMatrix.

    Column order is deterministic: count columns first in schema order,
    then one indicator block per categorical column in schema order with
    categories in their interned (first appearance on the fitted rows)
    order.  Categories unseen at fit time encode as all-zero indicators.
    """

    def __init__(self) -> None:
        self.count_names: list[str] = []
        self.categorical_names: list[str] = []
        self.fitted_categories: dict[str, list[str]] = {}
        self.column_names: list[str] = []

    def fit(self, clean: CleanDataset, rows: np.ndarray | None = None) -> "OneHotEncoder":
        self.count_names = [
            s.name for s in clean.schema
            if s.kind in (ColumnKind.COUNT, ColumnKind.BINARY_FLAG)
        ]
        self.categorical_names = [
            s.name for s in clean.schema if s.kind is ColumnKind.CATEGORICAL
        ]
        self.fitted_categories = {}
        for name in self.categorical_names:
            codes = clean.codes(name)
            if rows is not None:
                codes = codes[np.asarray(rows, dtype=np.int64)]
            labels = clean.category_labels(name)
            seen = np.zeros(len(labels), dtype=bool)
            seen[np.unique(codes)] = True
            # interned order, restricted to categories present on the fit rows
            self.fitted_categories[name] = [
                label for i, label in enumerate(labels) if seen[i]
            ]
        self.column_names = list(self.count_names)
        for name in self.categorical_names:
            self.column_names += [
                f"{name}={cat}" for cat in self.fitted_categories[name]
            ]
        return self

    def transform(self, clean: CleanDataset, rows: np.ndarray | None = None) -> DesignMatrix:
        if not self.column_names:
            raise ValidationError("encoder has not been fitted")
        if rows is None:
            row_idx = np.arange(clean.n_rows, dtype=np.int64)
        else:
            row_idx = np.asarray(rows, dtype=np.int64)
        n = row_idx.shape[0]

        blocks: list[np.ndarray] = []
        for name in self.count_names:
            blocks.append(clean.counts(name)[row_idx].astype(float).reshape(n, 1))
        for name in self.categorical_names:
            codes = clean.codes(name)[row_idx]
            labels = clean.category_labels(name)
            fitted = self.fitted_categories[name]
            position = {cat: j for j, cat in enumerate(fitted)}
            block = np.zeros((n, len(fitted)), dtype=float)
            for i, code in enumerate(codes):
                j = position.get(labels[code])
                if j is not None:
                    block[i, j] = 1.0
            blocks.append(block)

        values = np.hstack(blocks) if blocks else np.zeros((n, 0))
        casualty = {
            name: clean.counts(name)[row_idx] for name in CASUALTY_COLUMNS
        }
        labels_vec = derive_target(
            casualty["FERIDOS"], casualty["FERIDOS_GR"], casualty["MORTES"],
            casualty["MORTES_POST"], casualty["FATAIS"],
        )
        return DesignMatrix(
            values=values,
            column_names=list(self.column_names),
            labels=labels_vec,
        )


def encode(clean: CleanDataset) -> DesignMatrix:
    """One-hot encode a full CleanDataset (fit and transform on all rows)."""
    return OneHotEncoder().fit(clean).transform(clean)


def fit_scaler(matrix: DesignMatrix, rows: np.ndarray) -> ScalerParams:
    """Per-column mean and population stddev over the given training rows."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.shape[0] < 2:
        raise ValidationError(
            f"scaler needs at least 2 training rows, got {rows.shape[0]}"
        )
    train = matrix.values[rows]
    mean = train.mean(axis=0)
    std = train.std(axis=0)  # population: ddof=0
    return ScalerParams(mean=mean, std=std, fitted_on=rows.shape[0])


def apply_scaler(matrix: DesignMatrix, params: ScalerParams) -> DesignMatrix:
    """Standardize every cell; constant columns become exactly zero."""
    if matrix.n_columns != params.mean.shape[0]:
        raise ValidationError(
            f"scaler fitted on {params.mean.shape[0]} columns, "
            f"matrix has {matrix.n_columns}"
        )
    safe = np.where(params.std == 0.0, 1.0, params.std)
    scaled = (matrix.values - params.mean) / safe
    scaled[:, params.constant_columns] = 0.0
    return DesignMatrix(
        values=scaled,
        column_names=list(matrix.column_names),
        labels=matrix.labels.copy(),
    )


def split(n_rows: int, train_fraction: float, seed: int) -> SplitIndices:
    """Seeded uniform permutation split; |train| = floor(fraction * n)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must be in (0,1), got {train_fraction}")
    if n_rows < 2:
        raise ValidationError(f"need at least 2 rows to split, got {n_rows}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_rows)
    cut = int(np.floor(train_fraction * n_rows))
    return SplitIndices(
        train=perm[:cut],
        test=perm[cut:],
        seed=seed,
        train_fraction=train_fraction,
    )
