"""Gaussian Naive Bayes and k-nearest-neighbors classifiers.

Both emit class probabilities: GNB normalizes log-space posteriors,
kNN reports the ratio of neighbor votes.  Neighbor search is an
exhaustive Euclidean scan; distance ties at the k-th position resolve
to the lower training-row index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: relative variance floor so one-hot columns never yield singular densities
VARIANCE_FLOOR_EPS = 1e-9


class GaussianNaiveBayes:
    """Naive Bayes with per-class Gaussian feature likelihoods.

    Means and variances are maximum-likelihood (population) estimates;
    each variance is floored at ``eps`` times the largest per-feature
    variance of the whole training set.
    """

    def __init__(self, eps: float = VARIANCE_FLOOR_EPS):
        self.eps = float(eps)
        self.class_priors_: np.ndarray | None = None
        self.theta_: np.ndarray | None = None  # (2, p) means
        self.var_: np.ndarray | None = None  # (2, p) floored variances

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianNaiveBayes":
        X = np.asarray(X, dtype=float)
        y01 = np.asarray(y)
        n = X.shape[0]
        masks = [y01 == 0, y01 == 1]
        if not all(np.any(m) for m in masks):
            raise ValidationError("GNB needs at least one example of each class")

        global_var = X.var(axis=0)
        floor = self.eps * float(np.max(global_var)) if global_var.size else 0.0
        if floor <= 0.0:
            floor = self.eps

        priors = np.array([np.sum(m) / n for m in masks])
        theta = np.vstack([X[m].mean(axis=0) for m in masks])
        var = np.vstack([X[m].var(axis=0) for m in masks])
        var = np.maximum(var, floor)

        self.class_priors_ = priors
        self.theta_ = theta
        self.var_ = var
        return self

    def _joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], 2))
        for cls in (0, 1):
            mu = self.theta_[cls]
            var = self.var_[cls]
            log_density = -0.5 * (
                np.log(2.0 * np.pi * var) + (X - mu) ** 2 / var
            ).sum(axis=1)
            out[:, cls] = np.log(self.class_priors_[cls]) + log_density
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.theta_ is None:
            raise ValidationError("model has not been fitted")
        joint = self._joint_log_likelihood(X)
        log_norm = np.logaddexp(joint[:, 0], joint[:, 1])
        return np.exp(joint - log_norm[:, None])

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] > proba[:, 0]).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "family": "gnb",
            "eps": self.eps,
            "class_priors": [float(v) for v in self.class_priors_],
            "theta": [[float(v) for v in row] for row in self.theta_],
            "var": [[float(v) for v in row] for row in self.var_],
        }

    @staticmethod
    def from_dict(d: dict) -> "GaussianNaiveBayes":
        model = GaussianNaiveBayes(eps=d["eps"])
        model.class_priors_ = np.asarray(d["class_priors"], dtype=float)
        model.theta_ = np.asarray(d["theta"], dtype=float)
        model.var_ = np.asarray(d["var"], dtype=float)
        return model


@dataclass
class KNeighborsClassifier:
    """Uniform-vote kNN over scaled features with Euclidean distance."""

    k: int = 8
    chunk_size: int = 512

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        self.reference_: np.ndarray | None = None
        self.reference_labels_: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KNeighborsClassifier":
        X = np.asarray(X, dtype=float)
        y01 = np.asarray(y, dtype=np.int64)
        if self.k > X.shape[0]:
            raise ValidationError(
                f"k={self.k} exceeds the {X.shape[0]} training rows"
            )
        self.reference_ = X
        self.reference_labels_ = y01
        return self

    def kneighbors(self, X: np.ndarray) -> np.ndarray:
        """Indices of the k nearest training rows per query, nearest first.

        Ties in distance resolve to the lower training-row index via a
        stable sort on the squared distances.
        """
        if self.reference_ is None:
            raise ValidationError("model has not been fitted")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ref = self.reference_
        ref_sq = np.sum(ref * ref, axis=1)
        out = np.empty((X.shape[0], self.k), dtype=np.int64)
        for start in range(0, X.shape[0], self.chunk_size):
            chunk = X[start : start + self.chunk_size]
            d2 = np.sum(chunk * chunk, axis=1)[:, None] + ref_sq[None, :]
            d2 -= 2.0 * (chunk @ ref.T)
            np.maximum(d2, 0.0, out=d2)
            order = np.argsort(d2, axis=1, kind="stable")
            out[start : start + chunk.shape[0]] = order[:, : self.k]
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        neighbors = self.kneighbors(X)
        votes = self.reference_labels_[neighbors]
        n1 = votes.sum(axis=1)
        # both columns are exact vote ratios; 1 - p1 would round differently
        return np.column_stack([(self.k - n1) / self.k, n1 / self.k])

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] > proba[:, 0]).astype(np.int64)

    def to_dict(self) -> dict:
        # the reference matrix lives in its own artifact; only k is stored
        return {"family": "knn", "k": int(self.k)}

    @staticmethod
    def from_dict(
        d: dict,
        reference: np.ndarray | None = None,
        reference_labels: np.ndarray | None = None,
    ) -> "KNeighborsClassifier":
        model = KNeighborsClassifier(k=int(d["k"]))
        if reference is not None:
            model.fit(reference, reference_labels)
        return model
