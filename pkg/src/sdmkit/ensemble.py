"""The two learners: bootstrap-aggregated classification trees and L2 gradient
boosting on regression trees, plus impurity-based feature importance and the
JSON model file format."""

from __future__ import annotations

import json
import math

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import SchemaError
from .tree import (
    CLASSIFICATION,
    REGRESSION,
    Internal,
    TreeConfig,
    predict_tree_batch,
    train_decision_tree,
    tree_from_dict,
    tree_to_dict,
)

MODEL_TYPE_RF = "rf"
MODEL_TYPE_GBT = "gbt"


def _tree_stream(base_seed: int, index: int) -> np.random.Generator:
    # mixing (seed, index) through SeedSequence gives every tree its own
    # stream, so training schedule and worker count cannot change results
    return np.random.default_rng(np.random.SeedSequence(entropy=(base_seed, index)))


def _base_entropy(random_state: int | None) -> int:
    if random_state is None:
        return int(np.random.SeedSequence().entropy)
    return int(random_state)


def _resolve_feature_count(max_features: int | str, arity: int) -> int | str:
    """Map the 'sqrt' convenience spelling to ceil(sqrt(arity))."""
    if max_features == "sqrt":
        return math.ceil(math.sqrt(arity))
    return max_features


def _check_binary_labels(y: np.ndarray) -> np.ndarray:
    values = set(np.unique(y).tolist())
    if not values <= {0, 1}:
        raise ValueError(f"labels must be binary 0/1, got values {sorted(values)}")
    return y.astype(int)


def _named_features(feature_names, arity: int) -> tuple[str, ...]:
    if feature_names is None:
        return tuple(f"x{i}" for i in range(arity))
    names = tuple(str(n) for n in feature_names)
    if len(names) != arity:
        raise ValueError(f"{len(names)} feature names for {arity} features")
    return names


def _fit_bootstrap_tree(X, y, config, base_seed, index):
    rng = _tree_stream(base_seed, index)
    idx = rng.integers(0, y.size, size=y.size)
    return train_decision_tree(X[idx], y[idx], config, rng)


class RandomForest(ClassifierMixin, BaseEstimator):
    """Bootstrap-aggregated CART classification trees with per-node feature
    bagging; the forest probability is the plain mean of per-tree leaf
    fractions.

    Parameters
    ----------
    n_trees : int, default=100
        Number of trees; each is trained on a size-n bootstrap resample.
    max_depth : int, default=10
        Maximum root-to-leaf path length per tree.
    min_samples_split : int, default=2
        Nodes with fewer rows become leaves.
    max_features : int or {"sqrt", "all"}, default="sqrt"
        Candidate features drawn (without replacement) at every node;
        "sqrt" means ceil(sqrt(arity)).
    theta : float, default=0.5
        Probability threshold used by :meth:`predict`.
    random_state : int or None
        Base seed; per-tree streams are derived from (seed, tree index).
    n_jobs : int, default=1
        Workers for tree training. Any value yields identical models.
    """

    def __init__(self, n_trees=100, max_depth=10, min_samples_split=2,
                 max_features="sqrt", theta=0.5, random_state=None, n_jobs=1):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.theta = theta
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y, feature_names=None):
        X, y = check_X_y(X, y)
        y = _check_binary_labels(y)
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if np.unique(y).size < 2:
            raise ValueError("training labels contain a single class; forest "
                             "probabilities need both presence and absence rows")
        config = TreeConfig(
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            max_features=_resolve_feature_count(self.max_features, X.shape[1]),
            task=CLASSIFICATION,
        )
        base = _base_entropy(self.random_state)
        trees = Parallel(n_jobs=self.n_jobs)(
            delayed(_fit_bootstrap_tree)(X, y.astype(float), config, base, i)
            for i in range(self.n_trees))
        self.trees_ = list(trees)
        self.seed_ = base
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.feature_names_ = _named_features(feature_names, X.shape[1])
        return self

    def _checked(self, X) -> np.ndarray:
        check_is_fitted(self, "trees_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"model expects {self.n_features_in_} features, "
                             f"got {X.shape[1]}")
        return X

    def predict_proba(self, X):
        X = self._checked(X)
        per_tree = np.stack([predict_tree_batch(t, X) for t in self.trees_])
        p = per_tree.mean(axis=0)
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= self.theta).astype(int)

    @property
    def feature_importances_(self):
        return _importance_weights(self)


class GradientBoosting(ClassifierMixin, BaseEstimator):
    """L2 gradient boosting on 0/1 labels: the model starts at the label mean
    and each stage fits a regression tree to the current residuals, stepping
    by the learning rate. Raw scores are clamped to [0, 1] to read as
    probabilities.

    Parameters
    ----------
    n_trees : int, default=100
        Boosting stages; 0 leaves the constant label-mean model.
    eta : float, default=0.1
        Learning rate, required in (0, 2) so the squared error cannot rise.
    max_depth : int, default=3
        Depth of each residual tree.
    min_samples_split : int, default=2
    max_features : int or {"sqrt", "all"}, default="all"
        Per-node candidate features of the residual trees.
    theta : float, default=0.5
        Probability threshold used by :meth:`predict`.
    random_state : int or None
        Only consumed when max_features is below the arity.
    """

    def __init__(self, n_trees=100, eta=0.1, max_depth=3, min_samples_split=2,
                 max_features="all", theta=0.5, random_state=None):
        self.n_trees = n_trees
        self.eta = eta
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.theta = theta
        self.random_state = random_state

    def fit(self, X, y, feature_names=None):
        X, y = check_X_y(X, y)
        y = _check_binary_labels(y)
        if self.n_trees < 0:
            raise ValueError(f"n_trees must be >= 0, got {self.n_trees}")
        if not 0.0 < self.eta < 2.0:
            raise ValueError(f"eta must lie in (0, 2), got {self.eta}")
        config = TreeConfig(
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            max_features=_resolve_feature_count(self.max_features, X.shape[1]),
            task=REGRESSION,
        )
        base = _base_entropy(self.random_state)
        yf = y.astype(float)
        f0 = float(yf.mean())
        current = np.full(yf.size, f0)
        trees = []
        for t in range(self.n_trees):
            residuals = yf - current
            tree = train_decision_tree(X, residuals, config, _tree_stream(base, t))
            current = current + self.eta * predict_tree_batch(tree, X)
            trees.append(tree)
        self.f0_ = f0
        self.trees_ = trees
        self.seed_ = base
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.feature_names_ = _named_features(feature_names, X.shape[1])
        return self

    def _checked(self, X) -> np.ndarray:
        check_is_fitted(self, "trees_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"model expects {self.n_features_in_} features, "
                             f"got {X.shape[1]}")
        return X

    def raw_predictions(self, X) -> np.ndarray:
        """Unclamped model output f0 + eta * sum of tree outputs."""
        X = self._checked(X)
        raw = np.full(X.shape[0], self.f0_)
        for tree in self.trees_:
            raw = raw + self.eta * predict_tree_batch(tree, X)
        return raw

    def staged_raw_predictions(self, X):
        """Yield the raw model output after 0, 1, ..., n_trees stages."""
        X = self._checked(X)
        raw = np.full(X.shape[0], self.f0_)
        yield raw.copy()
        for tree in self.trees_:
            raw = raw + self.eta * predict_tree_batch(tree, X)
            yield raw.copy()

    def predict_proba(self, X):
        p = np.clip(self.raw_predictions(X), 0.0, 1.0)
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= self.theta).astype(int)

    @property
    def feature_importances_(self):
        return _importance_weights(self)


def predict_random_forest(model: RandomForest, X, theta: float = 0.5):
    """Forest predictions and averaged probabilities at threshold theta."""
    probs = model.predict_proba(X)[:, 1]
    return (probs >= theta).astype(int), probs


def predict_gbt(model: GradientBoosting, X, theta: float = 0.5):
    """Boosted-model predictions and clamped probabilities at threshold theta."""
    probs = np.clip(model.raw_predictions(X), 0.0, 1.0)
    return (probs >= theta).astype(int), probs


def _importance_weights(model) -> np.ndarray:
    check_is_fitted(model, "trees_")
    totals = np.zeros(model.n_features_in_)
    for tree in model.trees_:
        n_root = tree.n
        stack = [tree]
        while stack:
            node = stack.pop()
            if isinstance(node, Internal):
                totals[node.feature_idx] += (node.n / n_root) * node.impurity_decrease
                stack.append(node.left)
                stack.append(node.right)
    total = totals.sum()
    if total > 0.0:
        totals = totals / total
    return totals


def feature_importance(model) -> dict[str, float]:
    """Normalized impurity-decrease weights per feature name.

    Each internal node contributes (node n / root n) x impurity decrease to
    its split feature, summed across trees and normalized to total 1. A model
    with no splits returns all zeros.
    """
    weights = _importance_weights(model)
    return dict(zip(model.feature_names_, weights.tolist()))


def model_to_dict(model) -> dict:
    """JSON envelope with stable field order."""
    if isinstance(model, RandomForest):
        check_is_fitted(model, "trees_")
        return {
            "model_type": MODEL_TYPE_RF,
            "feature_names": list(model.feature_names_),
            "seed": model.seed_,
            "hyperparameters": {
                "n_trees": model.n_trees,
                "max_depth": model.max_depth,
                "min_samples_split": model.min_samples_split,
                "max_features": model.max_features,
                "theta": model.theta,
            },
            "trees": [tree_to_dict(t) for t in model.trees_],
        }
    if isinstance(model, GradientBoosting):
        check_is_fitted(model, "trees_")
        return {
            "model_type": MODEL_TYPE_GBT,
            "feature_names": list(model.feature_names_),
            "seed": model.seed_,
            "hyperparameters": {
                "n_trees": model.n_trees,
                "eta": model.eta,
                "max_depth": model.max_depth,
                "min_samples_split": model.min_samples_split,
                "max_features": model.max_features,
                "theta": model.theta,
            },
            "f0": model.f0_,
            "trees": [tree_to_dict(t) for t in model.trees_],
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(payload: dict):
    """Rebuild a fitted estimator from its JSON envelope."""
    for key in ("model_type", "feature_names", "seed", "hyperparameters", "trees"):
        if key not in payload:
            raise SchemaError(f"model file missing field {key!r}")
    hp = payload["hyperparameters"]
    names = tuple(str(n) for n in payload["feature_names"])
    trees = [tree_from_dict(t) for t in payload["trees"]]
    kind = payload["model_type"]
    if kind == MODEL_TYPE_RF:
        model = RandomForest(
            n_trees=hp["n_trees"], max_depth=hp["max_depth"],
            min_samples_split=hp["min_samples_split"],
            max_features=hp["max_features"], theta=hp["theta"],
            random_state=payload["seed"])
    elif kind == MODEL_TYPE_GBT:
        if "f0" not in payload:
            raise SchemaError("gbt model file missing field 'f0'")
        model = GradientBoosting(
            n_trees=hp["n_trees"], eta=hp["eta"], max_depth=hp["max_depth"],
            min_samples_split=hp["min_samples_split"],
            max_features=hp["max_features"], theta=hp["theta"],
            random_state=payload["seed"])
        model.f0_ = float(payload["f0"])
    else:
        raise SchemaError(f"unknown model_type {kind!r}")
    model.trees_ = trees
    model.seed_ = payload["seed"]
    model.classes_ = np.array([0, 1])
    model.n_features_in_ = len(names)
    model.feature_names_ = names
    return model


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, separators=(",", ":"))
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(payload)
