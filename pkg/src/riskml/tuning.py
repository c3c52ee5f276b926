"""Grid search over model hyperparameters scored by validation AUC.

The provided rows (normally the outer training split) are further
divided 75/25 into fit and validation parts with a seeded split, every
grid point is fitted on the fit part and scored by injury-class AUC on
the validation part, and ties select the earlier grid point.  A failing
trial is logged with AUC 0 instead of aborting the search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import RiskmlError, ValidationError
from .evaluation import auc_trapezoid, roc_curve
from .features import split
from .models import FAMILIES, make_model

#: grids larger than this are rejected rather than silently truncated
DEFAULT_TRIAL_CAP = 64

#: fraction of the provided rows used for fitting inside the search
INNER_FIT_FRACTION = 0.75


@dataclass
class ParamGrid:
    """Named axes of candidate values for one model family.

    Grid points enumerate the Cartesian product of the axes, varying
    the last axis fastest, in axis insertion order.
    """

    family: str
    axes: dict[str, list] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValidationError(
                f"unknown model family {self.family!r}; "
                f"expected one of {', '.join(FAMILIES)}"
            )
        if not self.axes:
            raise ValidationError("grid needs at least one axis")
        for name, values in self.axes.items():
            if not isinstance(values, (list, tuple)) or len(values) == 0:
                raise ValidationError(f"grid axis {name!r} must be a non-empty list")

    def size(self) -> int:
        size = 1
        for values in self.axes.values():
            size *= len(values)
        return size

    def points(self, trial_cap: int = DEFAULT_TRIAL_CAP) -> list[dict]:
        if self.size() > trial_cap:
            raise ValidationError(
                f"grid has {self.size()} points, exceeding the trial cap "
                f"{trial_cap}; shrink the axes or raise the cap"
            )
        names = list(self.axes)
        return [
            dict(zip(names, combo))
            for combo in itertools.product(*self.axes.values())
        ]

    def to_dict(self) -> dict:
        return {"family": self.family, "axes": {k: list(v) for k, v in self.axes.items()}}

    @staticmethod
    def from_dict(d: dict) -> "ParamGrid":
        return ParamGrid(family=d["family"], axes={k: list(v) for k, v in d["axes"].items()})


@dataclass
class TrialRecord:
    params: dict
    auc: float
    failed: bool = False
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "auc": float(self.auc),
            "failed": self.failed,
            "message": self.message,
        }


@dataclass
class TuneResult:
    family: str
    best_params: dict
    best_auc: float
    trials: list[TrialRecord]
    seed: int

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "family": self.family,
            "best_params": dict(self.best_params),
            "best_auc": float(self.best_auc),
            "trials": [t.to_dict() for t in self.trials],
            "seed": int(self.seed),
        }


def grid_search(
    X: np.ndarray,
    y: np.ndarray,
    grid: ParamGrid,
    seed: int,
    trial_cap: int = DEFAULT_TRIAL_CAP,
) -> TuneResult:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    points = grid.points(trial_cap)

    inner = split(X.shape[0], INNER_FIT_FRACTION, seed)
    X_fit, y_fit = X[inner.train], y[inner.train]
    X_val, y_val = X[inner.test], y[inner.test]

    trials: list[TrialRecord] = []
    best_index = 0
    best_auc = -1.0
    for index, params in enumerate(points):
        try:
            model = make_model(grid.family, params, seed=seed)
            model.fit(X_fit, y_fit)
            scores = model.predict_proba(X_val)[:, 1]
            auc = auc_trapezoid(roc_curve(scores, y_val))
            trial = TrialRecord(params=params, auc=auc)
        except (RiskmlError, np.linalg.LinAlgError, FloatingPointError) as exc:
            trial = TrialRecord(params=params, auc=0.0, failed=True, message=str(exc))
        trials.append(trial)
        if trial.auc > best_auc:  # strict: ties keep the earlier point
            best_auc = trial.auc
            best_index = index

    return TuneResult(
        family=grid.family,
        best_params=points[best_index],
        best_auc=trials[best_index].auc,
        trials=trials,
        seed=seed,
    )
