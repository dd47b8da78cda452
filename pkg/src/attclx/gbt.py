"""Second-order gradient boosting of regression trees on squared loss.

For squared error every row has gradient g = prediction - target and
hessian 1. A leaf holding rows with sums (G, H) gets weight -G / (H + l2),
and a split is scored by

    0.5 * [GL^2/(HL+l2) + GR^2/(HR+l2) - (GL+GR)^2/(HL+HR+l2)] - min_split_gain

over every midpoint between consecutive distinct sorted feature values.
Ties go to the lowest feature index, then the lowest threshold. A node is
split only when its best gain is strictly positive.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .core_ts import FeatureMatrix
from .errors import EmptyDataset, FeatureCountMismatch, LengthMismatch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GbtParams:
    n_rounds: int = 100
    max_depth: int = 4
    learning_rate: float = 0.1
    l2_reg: float = 1.0
    min_split_gain: float = 0.0
    min_child_weight: float = 1.0

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be positive")
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.l2_reg < 0 or self.min_split_gain < 0 or self.min_child_weight < 0:
            raise ValueError("l2_reg, min_split_gain and min_child_weight must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Flat node arrays. Node 0 is the root; ``feature[k] == -1`` marks a leaf.

    Rows with ``x[feature] <= threshold`` go to ``left``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def depth(self) -> int:
        def walk(k):
            if self.feature[k] < 0:
                return 0
            return 1 + max(walk(self.left[k]), walk(self.right[k]))

        return walk(0)

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            inner = feat >= 0
            if not inner.any():
                return self.value[node]
            r = rows[inner]
            n = node[inner]
            go_left = X[r, feat[inner]] <= self.threshold[n]
            node[inner] = np.where(go_left, self.left[n], self.right[n])


@dataclass(frozen=True, eq=False)
class GbtEnsemble:
    base_score: float
    trees: tuple
    params: GbtParams
    n_features: int
    train_rmse: tuple = field(default=())

    def predict(self, features) -> np.ndarray:
        X = _matrix(features)
        if X.shape[1] != self.n_features:
            raise FeatureCountMismatch(X.shape[1], self.n_features)
        out = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            out += self.params.learning_rate * tree.predict(X)
        return out

    def to_arrays(self) -> dict:
        """Flatten into named arrays (node tables concatenated, with offsets)."""
        sizes = np.array([t.n_nodes for t in self.trees], dtype=np.int64)
        cat = lambda name, dt: (
            np.concatenate([getattr(t, name) for t in self.trees]).astype(dt)
            if self.trees else np.zeros(0, dtype=dt)
        )
        return {
            "tree_sizes": sizes,
            "feature": cat("feature", np.int64),
            "threshold": cat("threshold", np.float64),
            "left": cat("left", np.int64),
            "right": cat("right", np.int64),
            "value": cat("value", np.float64),
            "base_score": np.array(self.base_score),
            "n_features": np.array(self.n_features),
            "train_rmse": np.array(self.train_rmse, dtype=np.float64),
        }

    @classmethod
    def from_arrays(cls, arrays: dict, params: GbtParams) -> "GbtEnsemble":
        trees = []
        start = 0
        for size in arrays["tree_sizes"]:
            sl = slice(start, start + int(size))
            trees.append(RegressionTree(*(np.array(arrays[k][sl]) for k in ("feature", "threshold", "left", "right", "value"))))
            start += int(size)
        return cls(float(arrays["base_score"]), tuple(trees), params, int(arrays["n_features"]),
                   tuple(float(v) for v in arrays["train_rmse"]))


def _matrix(features) -> np.ndarray:
    if isinstance(features, FeatureMatrix):
        return features.values
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    return X


def _best_split(order: np.ndarray, xs: np.ndarray, g: np.ndarray, p: GbtParams):
    """Best split of one node given its per-feature sorted rows (F, n).

    Returns (gain, feature, threshold) or None.
    """
    F, n = order.shape
    if n < 2:
        return None
    gs = g[order]
    G = gs[0].sum()
    H = float(n)
    GL = np.cumsum(gs, axis=1)[:, :-1]
    HL = np.arange(1, n, dtype=np.float64)
    GR = G - GL
    HR = H - HL
    lam = p.l2_reg
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam)) - p.min_split_gain
    valid = (xs[:, 1:] > xs[:, :-1]) & (HL >= p.min_child_weight) & (HR >= p.min_child_weight)
    gain = np.where(valid, gain, -np.inf)
    # row-major argmax picks the lowest feature, then the lowest threshold
    k = int(np.argmax(gain))
    f, pos = divmod(k, n - 1)
    best = gain[f, pos]
    if not np.isfinite(best) or best <= 0.0:
        return None
    lo, hi = xs[f, pos], xs[f, pos + 1]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return best, f, thr


def _grow_tree(X: np.ndarray, order: np.ndarray, xs: np.ndarray, g: np.ndarray, p: GbtParams) -> RegressionTree:
    """Grow one tree; ``order``/``xs`` are the (F, n) presorted row ids and values.

    Children receive the parent's sorted views filtered by side, so sorting
    happens once per fit.
    """
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        for arr, v in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1), (value, 0.0)):
            arr.append(v)
        return len(feature) - 1

    def build(order: np.ndarray, xs: np.ndarray, depth: int) -> int:
        k = new_node()
        split = _best_split(order, xs, g, p) if depth < p.max_depth else None
        if split is None:
            rows = order[0]
            value[k] = -g[rows].sum() / (rows.size + p.l2_reg)
            return k
        _, f, thr = split
        side = (X[:, f] <= thr)[order]
        n_left = int(side[0].sum())
        feature[k], threshold[k] = f, thr
        left[k] = build(order[side].reshape(-1, n_left), xs[side].reshape(-1, n_left), depth + 1)
        right[k] = build(order[~side].reshape(-1, order.shape[1] - n_left),
                         xs[~side].reshape(-1, order.shape[1] - n_left), depth + 1)
        return k

    build(order, xs, 0)
    return RegressionTree(
        np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64), np.array(value),
    )


def fit(features, targets, params: GbtParams = GbtParams()) -> GbtEnsemble:
    X = _matrix(features)
    y = np.asarray(targets, dtype=np.float64)
    if X.shape[0] != y.size:
        raise LengthMismatch(f"{X.shape[0]} feature rows but {y.size} targets")
    if y.size < 2:
        raise EmptyDataset("gradient boosting needs at least 2 rows")
    base = float(y.mean())
    if np.all(X == X[0]):
        log.warning("all feature rows are identical; returning the constant model")
        return GbtEnsemble(base, (), params, X.shape[1], ())
    order = np.argsort(X, axis=0, kind="stable").T.copy()
    xs = np.take_along_axis(X, order.T, axis=0).T.copy()
    pred = np.full(y.size, base)
    trees, rmse = [], []
    for _ in range(params.n_rounds):
        tree = _grow_tree(X, order, xs, pred - y, params)
        pred = pred + params.learning_rate * tree.predict(X)
        trees.append(tree)
        rmse.append(float(np.sqrt(np.mean((pred - y) ** 2))))
    return GbtEnsemble(base, tuple(trees), params, X.shape[1], tuple(rmse))


def predict(ensemble: GbtEnsemble, features) -> np.ndarray:
    return ensemble.predict(features)
