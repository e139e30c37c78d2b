"""Random forest classifier: bagged Gini trees with per-split feature
subsampling, averaged leaf class distributions."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .trees import FlatTree, flatten_tree, grow_gini_tree, tree_predict


class TrainingError(ValueError):
    """Invalid training data for a model fit."""


def _tree_rng(random_state: int, tree_index: int) -> np.random.Generator:
    # per-tree stream: seed xor tree index, schedule-independent
    return np.random.default_rng((random_state & 0xFFFFFFFFFFFFFFFF) ^ tree_index)


class RandomForestClassifier(ClassifierMixin, BaseEstimator):
    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int | None = None,
        min_samples_leaf: int = 1,
        features_per_split: int | None = None,
        bootstrap: bool = True,
        random_state: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.features_per_split = features_per_split
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = y.astype(np.int64)
        self.classes_ = np.unique(y)
        if len(self.classes_) < 2:
            raise TrainingError("training data contains a single class")
        self.n_features_in_ = X.shape[1]
        self.n_classes_ = int(y.max()) + 1
        m = self.features_per_split or math.ceil(math.sqrt(self.n_features_in_))
        n = len(y)
        self.trees_: list[FlatTree] = []
        for i in range(self.n_trees):
            rng = _tree_rng(self.random_state, i)
            idx = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            if len(np.unique(y[idx])) < 2:
                idx = np.arange(n)  # degenerate bootstrap, fall back to full data
            root = grow_gini_tree(
                X[idx], y[idx], self.n_classes_, self.max_depth,
                self.min_samples_leaf, m, rng,
            )
            self.trees_.append(flatten_tree(root, self.n_classes_))
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "trees_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        proba = np.zeros((len(X), self.n_classes_))
        for tree in self.trees_:
            proba += tree_predict(tree, X)
        return proba / len(self.trees_)

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba[:, self.classes_], axis=1)]
