"""Registry mapping model family names to constructors and artifacts.

Families: logreg, svm, gnb, knn, forest.  Defaults reproduce the
published study configuration (logistic C=1.0, SVM C=9.0 with a linear
kernel, k=8, 200 trees).
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .forest import RandomForestClassifier
from .linear_models import KernelSpec, LogisticRegression, SupportVectorClassifier
from .neighbors_bayes import GaussianNaiveBayes, KNeighborsClassifier

FAMILIES = ("logreg", "svm", "gnb", "knn", "forest")

DEFAULT_PARAMS: dict[str, dict] = {
    "logreg": {"C": 1.0, "tol": 1e-6, "max_iter": 100},
    "svm": {"C": 9.0, "kernel": "linear", "tol": 1e-3},
    "gnb": {},
    "knn": {"k": 8},
    "forest": {"n_estimators": 200, "max_features": None},
}

#: human-readable names used in reports and plot legends
DISPLAY_NAMES = {
    "logreg": "Logistic Regression",
    "svm": "SVM",
    "gnb": "Naive Bayes",
    "knn": "KNN",
    "forest": "Random Forest",
}


def _kernel_from_params(params: dict) -> KernelSpec:
    kind = params.get("kernel", "linear")
    if kind == "linear":
        # gamma/degree/coef0 axes are irrelevant for a linear kernel
        return KernelSpec("linear")
    return KernelSpec(
        kind=kind,
        gamma=params.get("gamma"),
        degree=params.get("degree"),
        coef0=params.get("coef0"),
    )


def make_model(family: str, params: dict | None = None, seed: int = 0):
    """Build an unfitted model of the given family.

    ``params`` overrides the family defaults; unknown keys raise.
    """
    if family not in FAMILIES:
        raise ValidationError(
            f"unknown model family {family!r}; expected one of {', '.join(FAMILIES)}"
        )
    merged = {**DEFAULT_PARAMS[family], **(params or {})}

    if family == "logreg":
        allowed = {"C", "tol", "max_iter"}
        _reject_unknown(family, merged, allowed)
        return LogisticRegression(
            C=merged["C"], tol=merged["tol"], max_iter=merged["max_iter"]
        )
    if family == "svm":
        allowed = {"C", "kernel", "gamma", "degree", "coef0", "tol", "max_iter"}
        _reject_unknown(family, merged, allowed)
        return SupportVectorClassifier(
            C=merged["C"],
            kernel=_kernel_from_params(merged),
            tol=merged["tol"],
            max_iter=merged.get("max_iter"),
        )
    if family == "gnb":
        _reject_unknown(family, merged, {"eps"})
        return GaussianNaiveBayes(**merged)
    if family == "knn":
        _reject_unknown(family, merged, {"k"})
        return KNeighborsClassifier(k=merged["k"])
    allowed = {"n_estimators", "max_features", "seed"}
    _reject_unknown(family, merged, allowed)
    return RandomForestClassifier(
        n_estimators=merged["n_estimators"],
        max_features=merged["max_features"],
        seed=merged.get("seed", seed),
    )


def _reject_unknown(family: str, params: dict, allowed: set[str]) -> None:
    unknown = set(params) - allowed
    if unknown:
        raise ValidationError(
            f"unknown {family} parameter(s): {', '.join(sorted(unknown))}"
        )


def model_to_dict(model) -> dict:
    return model.to_dict()


def model_from_dict(
    d: dict,
    reference: np.ndarray | None = None,
    reference_labels: np.ndarray | None = None,
):
    """Rebuild a fitted model from its JSON form.

    kNN artifacts hold only ``k``; the training matrix must be supplied
    through ``reference``/``reference_labels``.
    """
    family = d.get("family")
    if family == "logreg":
        return LogisticRegression.from_dict(d)
    if family == "svm":
        return SupportVectorClassifier.from_dict(d)
    if family == "gnb":
        return GaussianNaiveBayes.from_dict(d)
    if family == "knn":
        if reference is None or reference_labels is None:
            raise ValidationError(
                "kNN model requires the training matrix artifact to rebuild"
            )
        return KNeighborsClassifier.from_dict(d, reference, reference_labels)
    if family == "forest":
        return RandomForestClassifier.from_dict(d)
    raise ValidationError(f"unknown model family in artifact: {family!r}")
