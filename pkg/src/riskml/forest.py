"""Bootstrap ensemble of Gini decision trees with averaged probabilities.

Trees grow without a depth limit: a node splits while it is impure, has
at least two rows, and some candidate feature offers a boundary between
distinct values.  At each node a uniform random subset of
``max_features`` features is considered; the best split maximizes the
Gini impurity decrease with ties broken by lowest feature index, then
lowest threshold.  Thresholds sit at midpoints between consecutive
distinct sorted values.

Every tree ``t`` draws its bootstrap sample and feature subsets from
``numpy.random.default_rng((seed, t))``, so results are independent of
training order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


class DecisionTree:
    """Binary classification tree stored as parallel node arrays.

    ``feature[i] == -1`` marks a leaf.  ``decrease[i]`` is the node's
    impurity decrease weighted by its share of the training rows, used
    for feature importances.
    """

    def __init__(self) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.hist0: list[int] = []
        self.hist1: list[int] = []
        self.decrease: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.hist0.append(0)
        self.hist1.append(0)
        self.decrease.append(0.0)
        return len(self.feature) - 1

    @staticmethod
    def _best_split(
        X: np.ndarray, y: np.ndarray, rows: np.ndarray, candidates: np.ndarray
    ) -> tuple[int, float, float] | None:
        """Best (feature, threshold, decrease) among candidate features.

        decrease = (S_L/n_L + S_R/n_R - S/n) / n with S = c0² + c1²,
        an algebraic rearrangement of the weighted-Gini improvement
        that is non-negative up to rounding.
        """
        n = rows.shape[0]
        y_node = y[rows]
        total1 = int(y_node.sum())
        total0 = n - total1
        s_parent = float(total0 * total0 + total1 * total1)

        best: tuple[int, float, float] | None = None
        for f in candidates:
            v = X[rows, f]
            order = np.argsort(v, kind="stable")
            vs = v[order]
            ys = y_node[order]
            boundary = np.nonzero(vs[:-1] != vs[1:])[0]
            if boundary.size == 0:
                continue
            cum1 = np.cumsum(ys)
            n_left = boundary + 1
            c1_left = cum1[boundary].astype(float)
            c0_left = n_left - c1_left
            n_right = n - n_left
            c1_right = total1 - c1_left
            c0_right = total0 - c0_left
            s_left = c0_left * c0_left + c1_left * c1_left
            s_right = c0_right * c0_right + c1_right * c1_right
            decreases = (s_left / n_left + s_right / n_right - s_parent / n) / n
            np.maximum(decreases, 0.0, out=decreases)
            k = int(np.argmax(decreases))
            gain = float(decreases[k])
            if best is not None and gain <= best[2]:
                continue
            i = boundary[k]
            lo, hi = float(vs[i]), float(vs[i + 1])
            thr = (lo + hi) / 2.0
            if thr >= hi:  # midpoint rounded up to the right value
                thr = lo
            best = (int(f), thr, gain)
        return best

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        rows: np.ndarray | None = None,
        max_features: int | None = None,
        rng: np.random.Generator | None = None,
    ) -> "DecisionTree":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if rows is None:
            rows = np.arange(X.shape[0], dtype=np.int64)
        else:
            rows = np.asarray(rows, dtype=np.int64)
        p = X.shape[1]
        mf = p if max_features is None else int(max_features)
        if not 1 <= mf <= p:
            raise ValidationError(f"max_features must be in [1, {p}], got {mf}")
        if rng is None:
            rng = np.random.default_rng(0)
        n_root = rows.shape[0]
        if n_root == 0:
            raise ValidationError("cannot fit a tree on zero rows")

        root = self._new_node()
        stack: list[tuple[int, np.ndarray]] = [(root, rows)]
        while stack:
            idx, node_rows = stack.pop()
            y_node = y[node_rows]
            n1 = int(y_node.sum())
            n0 = node_rows.shape[0] - n1
            self.hist0[idx] = n0
            self.hist1[idx] = n1
            if n0 == 0 or n1 == 0 or node_rows.shape[0] < 2:
                continue
            if mf == p:
                candidates = np.arange(p)
            else:
                candidates = np.sort(rng.choice(p, size=mf, replace=False))
            found = self._best_split(X, y, node_rows, candidates)
            if found is None:
                continue
            f, thr, gain = found
            self.feature[idx] = f
            self.threshold[idx] = thr
            self.decrease[idx] = gain * node_rows.shape[0] / n_root
            go_left = X[node_rows, f] <= thr
            left_id = self._new_node()
            right_id = self._new_node()
            self.left[idx] = left_id
            self.right[idx] = right_id
            stack.append((right_id, node_rows[~go_left]))
            stack.append((left_id, node_rows[go_left]))
        return self

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for every row."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        feature = np.asarray(self.feature, dtype=np.int64)
        threshold = np.asarray(self.threshold, dtype=float)
        left = np.asarray(self.left, dtype=np.int64)
        right = np.asarray(self.right, dtype=np.int64)
        current = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            f = feature[current]
            active = np.nonzero(f >= 0)[0]
            if active.size == 0:
                return current
            cur = current[active]
            go_left = X[active, f[active]] <= threshold[cur]
            current[active] = np.where(go_left, left[cur], right[cur])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        leaves = self.apply(X)
        h0 = np.asarray(self.hist0, dtype=float)[leaves]
        h1 = np.asarray(self.hist1, dtype=float)[leaves]
        total = h0 + h1
        return np.column_stack([h0 / total, h1 / total])

    def raw_importances(self, n_features: int) -> np.ndarray:
        out = np.zeros(n_features)
        for f, d in zip(self.feature, self.decrease):
            if f >= 0:
                out[f] += d
        return out

    def to_dict(self) -> dict:
        return {
            "feature": list(self.feature),
            "threshold": [float(t) for t in self.threshold],
            "left": list(self.left),
            "right": list(self.right),
            "hist0": list(self.hist0),
            "hist1": list(self.hist1),
            "decrease": [float(d) for d in self.decrease],
        }

    @staticmethod
    def from_dict(d: dict) -> "DecisionTree":
        tree = DecisionTree()
        tree.feature = [int(v) for v in d["feature"]]
        tree.threshold = [float(v) for v in d["threshold"]]
        tree.left = [int(v) for v in d["left"]]
        tree.right = [int(v) for v in d["right"]]
        tree.hist0 = [int(v) for v in d["hist0"]]
        tree.hist1 = [int(v) for v in d["hist1"]]
        tree.decrease = [float(v) for v in d["decrease"]]
        return tree


class RandomForestClassifier:
    """Seeded bootstrap ensemble of Gini trees."""

    def __init__(
        self,
        n_estimators: int = 200,
        max_features: int | None = None,
        seed: int = 0,
    ):
        if n_estimators < 1:
            raise ValidationError(f"n_estimators must be >= 1, got {n_estimators}")
        self.n_estimators = int(n_estimators)
        self.max_features = max_features
        self.seed = int(seed)
        self.trees_: list[DecisionTree] = []
        self.n_features_: int = 0
        self.max_features_: int = 0

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForestClassifier":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        n, p = X.shape
        if n < 2:
            raise ValidationError(f"forest needs at least 2 rows, got {n}")
        if self.max_features is None:
            mf = max(1, int(np.sqrt(p)))
        else:
            mf = int(self.max_features)
        if not 1 <= mf <= p:
            raise ValidationError(f"max_features must be in [1, {p}], got {mf}")
        self.n_features_ = p
        self.max_features_ = mf

        self.trees_ = []
        for t in range(self.n_estimators):
            rng = np.random.default_rng((self.seed, t))
            bootstrap = rng.integers(0, n, size=n)
            tree = DecisionTree().fit(
                X, y, rows=bootstrap, max_features=mf, rng=rng
            )
            self.trees_.append(tree)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if not self.trees_:
            raise ValidationError("model has not been fitted")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        acc = np.zeros((X.shape[0], 2))
        for tree in self.trees_:  # ordered reduction keeps results exact
            acc += tree.predict_proba(X)
        return acc / len(self.trees_)

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] > proba[:, 0]).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "family": "forest",
            "n_estimators": self.n_estimators,
            "max_features": self.max_features_,
            "seed": self.seed,
            "n_features": self.n_features_,
            "trees": [tree.to_dict() for tree in self.trees_],
        }

    @staticmethod
    def from_dict(d: dict) -> "RandomForestClassifier":
        model = RandomForestClassifier(
            n_estimators=d["n_estimators"],
            max_features=d["max_features"],
            seed=d["seed"],
        )
        model.n_features_ = int(d["n_features"])
        model.max_features_ = int(d["max_features"])
        model.trees_ = [DecisionTree.from_dict(t) for t in d["trees"]]
        return model


@dataclass
class ImportanceRanking:
    """Named feature importances in descending order."""

    entries: list[tuple[str, float]] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["feature,importance"]
        for name, value in self.entries:
            lines.append(f"{name},{value!r}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"entries": [[name, float(v)] for name, v in self.entries]}


def feature_importances(
    model: RandomForestClassifier, column_names: list[str] | None = None
) -> ImportanceRanking:
    """Mean per-tree impurity decreases, normalized to sum to 1.

    All-zero importances are returned unnormalized when no tree made a
    split with positive decrease.
    """
    if not model.trees_:
        raise ValidationError("model has not been fitted")
    p = model.n_features_
    raw = np.zeros(p)
    for tree in model.trees_:
        raw += tree.raw_importances(p)
    raw /= len(model.trees_)
    total = float(raw.sum())
    values = raw / total if total > 0 else raw
    if column_names is None:
        column_names = [f"f{j}" for j in range(p)]
    if len(column_names) != p:
        raise ValidationError(
            f"{len(column_names)} names for {p} features"
        )
    order = sorted(range(p), key=lambda j: (-values[j], j))
    return ImportanceRanking(
        entries=[(column_names[j], float(values[j])) for j in order]
    )
