"""CART trees shared by both ensembles: gini impurity for classification,
variance for the regression trees that fit boosting residuals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import SchemaError

CLASSIFICATION = "classification"
REGRESSION = "regression"


@dataclass(frozen=True)
class TreeConfig:
    """Stopping and bagging parameters for one tree."""

    max_depth: int
    min_samples_split: int = 2
    max_features: int | str = "all"
    task: str = CLASSIFICATION

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ValueError(
                f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if isinstance(self.max_features, str):
            if self.max_features != "all":
                raise ValueError(f"max_features must be an int or 'all', "
                                 f"got {self.max_features!r}")
        elif self.max_features < 1:
            raise ValueError(f"max_features must be >= 1, got {self.max_features}")
        if self.task not in (CLASSIFICATION, REGRESSION):
            raise ValueError(f"unknown task {self.task!r}")


@dataclass(frozen=True)
class Leaf:
    """Terminal node: positive-class fraction (classification) or mean target
    (regression) of the training rows routed here."""

    value: float
    n: int


@dataclass(frozen=True)
class Internal:
    """Binary split node; rows with x[feature_idx] < threshold go left."""

    feature_idx: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"
    impurity_decrease: float
    n: int


TreeNode = Union[Leaf, Internal]


def gini(labels: Sequence[int]) -> float:
    """Binary gini impurity 1 - p0^2 - p1^2, in [0, 0.5]."""
    y = np.asarray(labels)
    if y.size == 0:
        raise ValueError("gini of an empty label vector is undefined")
    pos = int(np.count_nonzero(y))
    neg = y.size - pos
    p1 = pos / y.size
    p0 = neg / y.size
    # summed symmetrically so relabeling 0<->1 is bit-exact
    return 1.0 - (p0 * p0 + p1 * p1)


def _variance(y: np.ndarray) -> float:
    m = float(y.mean())
    return float((y * y).mean() - m * m)


def _node_impurity(y: np.ndarray, task: str) -> float:
    return gini(y) if task == CLASSIFICATION else _variance(y)


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidate_features: Sequence[int],
    task: str = CLASSIFICATION,
) -> Optional[tuple[int, float, float]]:
    """Exhaustive scan over midpoint thresholds of the candidate features.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values; the returned ``(feature_idx, threshold, gain)`` maximizes
    impurity decrease, ties broken toward the lowest feature index then the
    lowest threshold. Returns None when no split has positive gain.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 2:
        return None
    parent = _node_impurity(y, task)
    nf = float(n)

    best_gain = 0.0
    best: Optional[tuple[int, float, float]] = None
    for f in sorted(int(i) for i in candidate_features):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        ys = y[order]
        boundaries = np.nonzero(xs[1:] != xs[:-1])[0]
        if boundaries.size == 0:
            continue
        thresholds = (xs[boundaries] + xs[boundaries + 1]) / 2.0
        nl = (boundaries + 1).astype(float)
        nr = nf - nl
        if task == CLASSIFICATION:
            pos_prefix = np.cumsum(ys)
            pos_l = pos_prefix[boundaries]
            neg_l = nl - pos_l
            pos_r = pos_prefix[-1] - pos_l
            neg_r = nr - pos_r
            imp_l = 1.0 - ((pos_l / nl) ** 2 + (neg_l / nl) ** 2)
            imp_r = 1.0 - ((pos_r / nr) ** 2 + (neg_r / nr) ** 2)
        else:
            s1 = np.cumsum(ys)
            s2 = np.cumsum(ys * ys)
            mean_l = s1[boundaries] / nl
            mean_r = (s1[-1] - s1[boundaries]) / nr
            imp_l = s2[boundaries] / nl - mean_l * mean_l
            imp_r = (s2[-1] - s2[boundaries]) / nr - mean_r * mean_r
        gains = parent - (nl * imp_l + nr * imp_r) / nf
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            best = (f, float(thresholds[k]), best_gain)
    return best


def _resolve_max_features(max_features: int | str, n_features: int) -> int:
    if max_features == "all":
        return n_features
    if max_features > n_features:
        raise ValueError(
            f"max_features {max_features} exceeds feature arity {n_features}")
    return int(max_features)


def train_decision_tree(
    X: np.ndarray,
    y: np.ndarray,
    config: TreeConfig,
    rng: np.random.Generator | None = None,
) -> TreeNode:
    """Grow a CART tree recursively.

    A node becomes a :class:`Leaf` when the depth limit is hit, fewer than
    ``min_samples_split`` rows remain, the node is pure, or no candidate
    split has positive gain. When ``max_features`` is below the arity, each
    node draws that many candidate features from ``rng`` without replacement.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    if y.ndim != 1 or X.shape[0] != y.size:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.size} entries")
    if y.size == 0:
        raise ValueError("cannot train on an empty dataset")
    f = _resolve_max_features(config.max_features, X.shape[1])
    if rng is None:
        rng = np.random.default_rng()
    return _grow(X, y, 0, config, f, rng)


def _grow(X, y, depth, config, f, rng) -> TreeNode:
    n = y.size
    value = float(y.mean())
    pure = y.min() == y.max()
    if depth >= config.max_depth or n < config.min_samples_split or pure:
        return Leaf(value=value, n=n)
    if f < X.shape[1]:
        candidates = rng.choice(X.shape[1], size=f, replace=False)
    else:
        candidates = np.arange(X.shape[1])
    found = best_split(X, y, candidates, config.task)
    if found is None:
        return Leaf(value=value, n=n)
    feature_idx, threshold, gain = found
    mask = X[:, feature_idx] < threshold
    return Internal(
        feature_idx=feature_idx,
        threshold=threshold,
        left=_grow(X[mask], y[mask], depth + 1, config, f, rng),
        right=_grow(X[~mask], y[~mask], depth + 1, config, f, rng),
        impurity_decrease=gain,
        n=n,
    )


def predict_tree(tree: TreeNode, x: Sequence[float]) -> float:
    """Route one feature vector to its leaf: left when x[feature] < threshold."""
    x = np.asarray(x, dtype=float)
    node = tree
    while isinstance(node, Internal):
        if node.feature_idx >= x.size:
            raise ValueError(
                f"feature vector of arity {x.size} too short for split on "
                f"feature {node.feature_idx}")
        node = node.left if x[node.feature_idx] < node.threshold else node.right
    return node.value


def predict_tree_batch(tree: TreeNode, X: np.ndarray) -> np.ndarray:
    """Leaf values for every row of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    out = np.empty(X.shape[0], dtype=float)
    _fill_batch(tree, X, np.arange(X.shape[0]), out)
    return out


def _fill_batch(node, X, rows, out):
    if isinstance(node, Leaf):
        out[rows] = node.value
        return
    if node.feature_idx >= X.shape[1]:
        raise ValueError(
            f"feature matrix of arity {X.shape[1]} too short for split on "
            f"feature {node.feature_idx}")
    mask = X[rows, node.feature_idx] < node.threshold
    _fill_batch(node.left, X, rows[mask], out)
    _fill_batch(node.right, X, rows[~mask], out)


def tree_depth(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.left), tree_depth(tree.right))


def tree_to_dict(tree: TreeNode) -> dict:
    """JSON-ready nested dict; inverse of :func:`tree_from_dict`."""
    if isinstance(tree, Leaf):
        return {"kind": "leaf", "value": tree.value, "n": tree.n}
    return {
        "kind": "split",
        "feature_idx": tree.feature_idx,
        "threshold": tree.threshold,
        "impurity_decrease": tree.impurity_decrease,
        "n": tree.n,
        "left": tree_to_dict(tree.left),
        "right": tree_to_dict(tree.right),
    }


def tree_from_dict(node: dict) -> TreeNode:
    kind = node.get("kind")
    if kind == "leaf":
        return Leaf(value=float(node["value"]), n=int(node["n"]))
    if kind == "split":
        return Internal(
            feature_idx=int(node["feature_idx"]),
            threshold=float(node["threshold"]),
            left=tree_from_dict(node["left"]),
            right=tree_from_dict(node["right"]),
            impurity_decrease=float(node["impurity_decrease"]),
            n=int(node["n"]),
        )
    raise SchemaError(f"unknown tree node kind {kind!r}")
