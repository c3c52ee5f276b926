"""L2-regularized logistic regression, C-SVC via SMO, and Platt scaling.

All solvers are deterministic full-batch methods: logistic regression
uses damped Newton iterations, the SVM dual is optimized by sequential
minimal optimization on the maximal KKT-violating pair, and Platt
calibration runs a guarded Newton method on (A, B).
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .numutil import log1pexp, sigmoid

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# logistic regression


@dataclass
class LinearCoefficients:
    w: np.ndarray
    b: float
    C: float

    def __post_init__(self) -> None:
        self.w = np.asarray(self.w, dtype=float)
        if not np.all(np.isfinite(self.w)) or not np.isfinite(self.b):
            raise ValidationError("coefficients must be finite")
        if self.C <= 0:
            raise ValidationError(f"C must be positive, got {self.C}")


def logistic_objective(w: np.ndarray, X: np.ndarray, y_pm: np.ndarray, C: float) -> float:
    """0.5 wᵀw + C Σ log(1 + exp(-y_i wᵀx_i)) with y in {-1,+1}."""
    z = y_pm * (X @ w)
    return 0.5 * float(w @ w) + C * float(np.sum(log1pexp(-z)))


def logistic_gradient(w: np.ndarray, X: np.ndarray, y_pm: np.ndarray, C: float) -> np.ndarray:
    z = y_pm * (X @ w)
    return w - C * (X.T @ (y_pm * sigmoid(-z)))


def logistic_hessian(w: np.ndarray, X: np.ndarray, y_pm: np.ndarray, C: float) -> np.ndarray:
    z = y_pm * (X @ w)
    d = sigmoid(z) * sigmoid(-z)
    return np.eye(X.shape[1]) + C * (X.T * d) @ X


class LogisticRegression:
    """Binary logistic regression trained by Newton's method.

    The bias is an appended constant-1 feature and is regularized along
    with the weights.  Iterations stop when the gradient infinity norm
    drops to ``tol`` or ``max_iter`` is reached (the latter logs a
    warning and leaves ``converged_`` False).
    """

    def __init__(
        self,
        C: float = 1.0,
        tol: float = 1e-6,
        max_iter: int = 100,
        fit_bias: bool = True,
    ):
        if C <= 0:
            raise ValidationError(f"C must be positive, got {C}")
        self.C = float(C)
        self.tol = float(tol)
        self.max_iter = int(max_iter)
        self.fit_bias = bool(fit_bias)
        self.w_: np.ndarray | None = None
        self.b_: float = 0.0
        self.n_iter_: int = 0
        self.converged_: bool = False
        self.objective_path_: list[float] = []

    def _augment(self, X: np.ndarray) -> np.ndarray:
        if not self.fit_bias:
            return X
        return np.hstack([X, np.ones((X.shape[0], 1))])

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticRegression":
        X = np.asarray(X, dtype=float)
        y_pm = np.where(np.asarray(y) == 1, 1.0, -1.0)
        Xa = self._augment(X)
        w = np.zeros(Xa.shape[1])

        fval = logistic_objective(w, Xa, y_pm, self.C)
        self.objective_path_ = [fval]
        self.converged_ = False
        for iteration in range(self.max_iter):
            if not np.isfinite(fval):
                raise ConvergenceError(
                    f"logistic objective became non-finite at iteration {iteration}"
                )
            grad = logistic_gradient(w, Xa, y_pm, self.C)
            if np.max(np.abs(grad)) <= self.tol:
                self.converged_ = True
                break
            hess = logistic_hessian(w, Xa, y_pm, self.C)
            direction = np.linalg.solve(hess, -grad)
            slope = float(grad @ direction)

            step = 1.0
            accepted = False
            for _ in range(60):
                candidate = w + step * direction
                cval = logistic_objective(candidate, Xa, y_pm, self.C)
                if np.isfinite(cval) and cval <= fval + 1e-4 * step * slope:
                    w, fval = candidate, cval
                    accepted = True
                    break
                step *= 0.5
            self.n_iter_ = iteration + 1
            if not accepted:
                # no further progress representable in float arithmetic
                break
            self.objective_path_.append(fval)
        else:
            grad = logistic_gradient(w, Xa, y_pm, self.C)
            self.converged_ = bool(np.max(np.abs(grad)) <= self.tol)

        if not self.converged_:
            grad = logistic_gradient(w, Xa, y_pm, self.C)
            if np.max(np.abs(grad)) <= self.tol:
                self.converged_ = True
            else:
                logger.warning(
                    "logistic regression stopped after %d iterations with "
                    "gradient norm %.3e > tol %.1e",
                    self.n_iter_, float(np.max(np.abs(grad))), self.tol,
                )

        if self.fit_bias:
            self.w_, self.b_ = w[:-1], float(w[-1])
        else:
            self.w_, self.b_ = w, 0.0
        return self

    @property
    def coefficients(self) -> LinearCoefficients:
        if self.w_ is None:
            raise ValidationError("model has not been fitted")
        return LinearCoefficients(w=self.w_, b=self.b_, C=self.C)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        if self.w_ is None:
            raise ValidationError("model has not been fitted")
        return np.asarray(X, dtype=float) @ self.w_ + self.b_

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        p1 = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] > proba[:, 0]).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "family": "logreg",
            "w": [float(v) for v in self.w_],
            "b": float(self.b_),
            "C": self.C,
            "tol": self.tol,
            "fit_bias": self.fit_bias,
            "n_iter": self.n_iter_,
            "converged": self.converged_,
        }

    @staticmethod
    def from_dict(d: dict) -> "LogisticRegression":
        model = LogisticRegression(C=d["C"], tol=d["tol"], fit_bias=d["fit_bias"])
        model.w_ = np.asarray(d["w"], dtype=float)
        model.b_ = float(d["b"])
        model.n_iter_ = int(d["n_iter"])
        model.converged_ = bool(d["converged"])
        return model


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class KernelSpec:
    """Kernel kind plus its parameters; parameters present iff required.

    ``gamma=None`` on rbf/polynomial means "resolve to 1/feature-count
    at fit time".
    """

    kind: str = "linear"
    gamma: float | None = None
    degree: int | None = None
    coef0: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "rbf", "polynomial"):
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "linear":
            if self.gamma is not None or self.degree is not None or self.coef0 is not None:
                raise ValidationError("linear kernel takes no parameters")
            return
        if self.gamma is not None and self.gamma <= 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if self.kind == "polynomial":
            object.__setattr__(self, "degree", 3 if self.degree is None else int(self.degree))
            object.__setattr__(self, "coef0", 0.0 if self.coef0 is None else float(self.coef0))
            if self.degree < 1:
                raise ValidationError(f"degree must be >= 1, got {self.degree}")
        elif self.degree is not None or self.coef0 is not None:
            raise ValidationError("rbf kernel takes only gamma")

    def resolved(self, n_features: int) -> "KernelSpec":
        if self.kind == "linear" or self.gamma is not None:
            return self
        return KernelSpec(
            kind=self.kind,
            gamma=1.0 / max(n_features, 1),
            degree=self.degree,
            coef0=self.coef0,
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "gamma": self.gamma,
            "degree": self.degree,
            "coef0": self.coef0,
        }

    @staticmethod
    def from_dict(d: dict) -> "KernelSpec":
        return KernelSpec(
            kind=d["kind"],
            gamma=d.get("gamma"),
            degree=d.get("degree"),
            coef0=d.get("coef0"),
        )


def kernel_matrix(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """K[i, j] = k(A_i, B_j) for the given kernel."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if spec.kind == "linear":
        return A @ B.T
    if spec.gamma is None:
        raise ValidationError("gamma unresolved; call KernelSpec.resolved first")
    if spec.kind == "rbf":
        a2 = np.sum(A * A, axis=1)[:, None]
        b2 = np.sum(B * B, axis=1)[None, :]
        d2 = np.maximum(a2 + b2 - 2.0 * (A @ B.T), 0.0)
        return np.exp(-spec.gamma * d2)
    return (spec.gamma * (A @ B.T) + spec.coef0) ** spec.degree


class _KernelColumnCache:
    """LRU cache of training-kernel columns, bounded by memory."""

    def __init__(self, X: np.ndarray, spec: KernelSpec, max_mb: float = 256.0):
        self.X = X
        self.spec = spec
        n = X.shape[0]
        self.max_columns = max(2, int(max_mb * 2**20 / (8 * max(n, 1))))
        self._store: OrderedDict[int, np.ndarray] = OrderedDict()

    def column(self, i: int) -> np.ndarray:
        col = self._store.get(i)
        if col is not None:
            self._store.move_to_end(i)
            return col
        col = kernel_matrix(self.spec, self.X, self.X[i : i + 1])[:, 0]
        self._store[i] = col
        if len(self._store) > self.max_columns:
            self._store.popitem(last=False)
        return col


# ---------------------------------------------------------------------------
# SMO


class SupportVectorClassifier:
    """C-SVC trained by SMO on the maximal KKT-violating pair.

    The optimality gap m(α) - M(α) is driven to ``tol``; the bias is
    recovered from the KKT conditions (mean over free support vectors,
    midpoint of the feasibility interval when none are free).  With
    ``calibrate=True`` a Platt calibrator is fitted on the training
    decision values so the model can emit class probabilities.

    ``max_iter=None`` uses a generous default budget; pair selection on
    overlapping data can need hundreds of updates per training point
    before the gap closes, so tight caps are only suitable for tests.
    """

    def __init__(
        self,
        C: float = 9.0,
        kernel: KernelSpec | None = None,
        tol: float = 1e-3,
        max_iter: int | None = None,
        calibrate: bool = True,
        cache_mb: float = 256.0,
    ):
        if C <= 0:
            raise ValidationError(f"C must be positive, got {C}")
        self.C = float(C)
        self.kernel = kernel if kernel is not None else KernelSpec("linear")
        self.tol = float(tol)
        self.max_iter = max_iter
        self.calibrate = bool(calibrate)
        self.cache_mb = cache_mb
        self.kernel_: KernelSpec | None = None
        self.support_indices_: np.ndarray | None = None
        self.alpha_: np.ndarray | None = None
        self.support_y_: np.ndarray | None = None
        self.support_vectors_: np.ndarray | None = None
        self.b_: float = 0.0
        self.n_iter_: int = 0
        self.kkt_gap_: float = float("inf")
        self.platt_: "PlattCalibrator | None" = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "SupportVectorClassifier":
        X = np.asarray(X, dtype=float)
        y01 = np.asarray(y)
        y_pm = np.where(y01 == 1, 1.0, -1.0)
        n = X.shape[0]
        if n < 2 or len(np.unique(y_pm)) < 2:
            raise ValidationError("SVM needs at least one example of each class")

        spec = self.kernel.resolved(X.shape[1])
        cache = _KernelColumnCache(X, spec, self.cache_mb)
        cap = self.max_iter if self.max_iter is not None else max(10_000_000, 100 * n)
        C = self.C

        alpha = np.zeros(n)
        grad = -np.ones(n)  # gradient of 0.5 aᵀQa - Σa at a = 0
        neg_yg = np.empty(n)

        gap = float("inf")
        iteration = 0
        while True:
            np.multiply(y_pm, grad, out=neg_yg)
            np.negative(neg_yg, out=neg_yg)
            in_up = ((y_pm > 0) & (alpha < C)) | ((y_pm < 0) & (alpha > 0))
            in_low = ((y_pm > 0) & (alpha > 0)) | ((y_pm < 0) & (alpha < C))
            up_vals = np.where(in_up, neg_yg, -np.inf)
            low_vals = np.where(in_low, neg_yg, np.inf)
            i = int(np.argmax(up_vals))
            j = int(np.argmin(low_vals))
            gap = float(up_vals[i] - low_vals[j])
            if gap <= self.tol:
                break
            if iteration >= cap:
                raise ConvergenceError(
                    f"SMO did not converge within {cap} iterations "
                    f"(optimality gap {gap:.3e} > tol {self.tol:g})"
                )

            ki = cache.column(i)
            kj = cache.column(j)
            quad = max(float(ki[i] + kj[j] - 2.0 * ki[j]), 1e-12)
            lam_free = gap / quad
            room_i = C - alpha[i] if y_pm[i] > 0 else alpha[i]
            room_j = alpha[j] if y_pm[j] > 0 else C - alpha[j]
            lam = min(lam_free, room_i, room_j)

            # assign exact bound values when a box constraint binds
            if lam == room_i:
                alpha[i] = C if y_pm[i] > 0 else 0.0
            else:
                alpha[i] += y_pm[i] * lam
            if lam == room_j:
                alpha[j] = 0.0 if y_pm[j] > 0 else C
            else:
                alpha[j] -= y_pm[j] * lam

            grad += lam * (y_pm * (ki - kj))
            iteration += 1

        self.n_iter_ = iteration
        self.kkt_gap_ = gap
        neg_yg = -(y_pm * grad)
        free = (alpha > 0.0) & (alpha < C)
        if np.any(free):
            self.b_ = float(np.mean(neg_yg[free]))
        else:
            in_up = ((y_pm > 0) & (alpha < C)) | ((y_pm < 0) & (alpha > 0))
            in_low = ((y_pm > 0) & (alpha > 0)) | ((y_pm < 0) & (alpha < C))
            hi = np.max(np.where(in_up, neg_yg, -np.inf))
            lo = np.min(np.where(in_low, neg_yg, np.inf))
            self.b_ = float((hi + lo) / 2.0)

        support = alpha > 0.0
        self.kernel_ = spec
        self.support_indices_ = np.nonzero(support)[0]
        self.alpha_ = alpha[support]
        self.support_y_ = y_pm[support]
        self.support_vectors_ = X[support]

        if self.calibrate:
            self.platt_ = PlattCalibrator().fit(self.decision_function(X), y01)
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        if self.support_vectors_ is None:
            raise ValidationError("model has not been fitted")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        K = kernel_matrix(self.kernel_, X, self.support_vectors_)
        return K @ (self.alpha_ * self.support_y_) + self.b_

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.platt_ is None:
            raise ValidationError("model was fitted without calibration")
        return self.platt_.predict_proba(self.decision_function(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.platt_ is not None:
            proba = self.predict_proba(X)
            return (proba[:, 1] > proba[:, 0]).astype(np.int64)
        return (self.decision_function(X) > 0).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "family": "svm",
            "C": self.C,
            "tol": self.tol,
            "kernel": self.kernel_.to_dict(),
            "b": float(self.b_),
            "support_indices": [int(i) for i in self.support_indices_],
            "alpha": [float(a) for a in self.alpha_],
            "support_y": [float(v) for v in self.support_y_],
            "support_vectors": [[float(v) for v in row] for row in self.support_vectors_],
            "n_iter": self.n_iter_,
            "kkt_gap": float(self.kkt_gap_),
            "platt": None if self.platt_ is None else self.platt_.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "SupportVectorClassifier":
        model = SupportVectorClassifier(
            C=d["C"], kernel=KernelSpec.from_dict(d["kernel"]), tol=d["tol"],
            calibrate=d["platt"] is not None,
        )
        model.kernel_ = KernelSpec.from_dict(d["kernel"])
        model.b_ = float(d["b"])
        model.support_indices_ = np.asarray(d["support_indices"], dtype=np.int64)
        model.alpha_ = np.asarray(d["alpha"], dtype=float)
        model.support_y_ = np.asarray(d["support_y"], dtype=float)
        model.support_vectors_ = np.asarray(d["support_vectors"], dtype=float)
        model.n_iter_ = int(d["n_iter"])
        model.kkt_gap_ = float(d["kkt_gap"])
        if d["platt"] is not None:
            model.platt_ = PlattCalibrator.from_dict(d["platt"])
        return model


def svm_kkt_violation(model: SupportVectorClassifier, X: np.ndarray, y: np.ndarray) -> float:
    """Recompute the optimality gap m(α) - M(α) from scratch.

    Independent of the solver's own bookkeeping: rebuilds the dual
    gradient from the kernel matrix and the stored alphas.
    """
    X = np.asarray(X, dtype=float)
    y_pm = np.where(np.asarray(y) == 1, 1.0, -1.0)
    n = X.shape[0]
    alpha = np.zeros(n)
    alpha[model.support_indices_] = model.alpha_
    K = kernel_matrix(model.kernel_, X, X)
    grad = (y_pm[:, None] * y_pm[None, :] * K) @ alpha - 1.0
    neg_yg = -(y_pm * grad)
    C = model.C
    in_up = ((y_pm > 0) & (alpha < C)) | ((y_pm < 0) & (alpha > 0))
    in_low = ((y_pm > 0) & (alpha > 0)) | ((y_pm < 0) & (alpha < C))
    hi = np.max(np.where(in_up, neg_yg, -np.inf))
    lo = np.min(np.where(in_low, neg_yg, np.inf))
    return float(hi - lo)


# ---------------------------------------------------------------------------
# Platt scaling


class PlattCalibrator:
    """Sigmoid map from decision values to probabilities.

    Fits p(y=1 | f) = 1 / (1 + exp(A f + B)) by regularized maximum
    likelihood against the smoothed targets t+ = (N+ + 1)/(N+ + 2) and
    t- = 1/(N- + 2), using Newton steps with backtracking.
    """

    def __init__(self, max_iter: int = 100, min_step: float = 1e-10, sigma: float = 1e-12):
        self.max_iter = int(max_iter)
        self.min_step = float(min_step)
        self.sigma = float(sigma)
        self.A_: float | None = None
        self.B_: float | None = None

    @staticmethod
    def _objective(A: float, B: float, f: np.ndarray, t: np.ndarray) -> float:
        fApB = A * f + B
        pos = fApB >= 0
        vals = np.empty_like(fApB)
        vals[pos] = t[pos] * fApB[pos] + np.log1p(np.exp(-fApB[pos]))
        vals[~pos] = (t[~pos] - 1.0) * fApB[~pos] + np.log1p(np.exp(fApB[~pos]))
        return float(np.sum(vals))

    def fit(self, decision_values: np.ndarray, y: np.ndarray) -> "PlattCalibrator":
        f = np.asarray(decision_values, dtype=float)
        y01 = np.asarray(y)
        n_pos = int(np.sum(y01 == 1))
        n_neg = int(f.shape[0] - n_pos)
        if n_pos == 0 or n_neg == 0:
            raise ValidationError("Platt scaling needs both classes present")

        hi = (n_pos + 1.0) / (n_pos + 2.0)
        lo = 1.0 / (n_neg + 2.0)
        t = np.where(y01 == 1, hi, lo)

        A = 0.0
        B = float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
        fval = self._objective(A, B, f, t)

        for _ in range(self.max_iter):
            fApB = A * f + B
            pos = fApB >= 0
            p = np.empty_like(fApB)
            q = np.empty_like(fApB)
            e_neg = np.exp(-fApB[pos])
            p[pos] = e_neg / (1.0 + e_neg)
            q[pos] = 1.0 / (1.0 + e_neg)
            e_pos = np.exp(fApB[~pos])
            p[~pos] = 1.0 / (1.0 + e_pos)
            q[~pos] = e_pos / (1.0 + e_pos)

            d2 = p * q
            h11 = self.sigma + float(np.sum(f * f * d2))
            h22 = self.sigma + float(np.sum(d2))
            h21 = float(np.sum(f * d2))
            d1 = t - p
            g1 = float(np.sum(f * d1))
            g2 = float(np.sum(d1))
            if abs(g1) < 1e-5 and abs(g2) < 1e-5:
                break

            det = h11 * h22 - h21 * h21
            dA = -(h22 * g1 - h21 * g2) / det
            dB = -(-h21 * g1 + h11 * g2) / det
            gd = g1 * dA + g2 * dB

            step = 1.0
            while step >= self.min_step:
                new_a = A + step * dA
                new_b = B + step * dB
                new_f = self._objective(new_a, new_b, f, t)
                if new_f < fval + 1e-4 * step * gd:
                    A, B, fval = new_a, new_b, new_f
                    break
                step /= 2.0
            else:
                logger.warning("Platt line search failed; keeping current parameters")
                break

        self.A_, self.B_ = float(A), float(B)
        return self

    def predict_proba(self, decision_values: np.ndarray) -> np.ndarray:
        if self.A_ is None:
            raise ValidationError("calibrator has not been fitted")
        f = np.asarray(decision_values, dtype=float)
        p1 = sigmoid(-(self.A_ * f + self.B_))
        return np.column_stack([1.0 - p1, p1])

    def to_dict(self) -> dict:
        return {"A": float(self.A_), "B": float(self.B_)}

    @staticmethod
    def from_dict(d: dict) -> "PlattCalibrator":
        calibrator = PlattCalibrator()
        calibrator.A_, calibrator.B_ = float(d["A"]), float(d["B"])
        return calibrator
