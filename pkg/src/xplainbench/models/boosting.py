"""Binary gradient boosting with second-order (Newton) steps on logistic loss,
L2-regularized leaf weights, in the style of the XGBoost family."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .forest import TrainingError
from .trees import FlatTree, flatten_tree, grow_newton_tree, tree_predict


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


class GradientBoostingClassifier(ClassifierMixin, BaseEstimator):
    """predict_proba = sigmoid(base_score + learning_rate * sum of leaf values).

    ``base_score_`` is the log-odds of the training class prior. Leaf weights
    are -G/(H + lambda_l2) with G, H the summed gradients/hessians of the
    logistic loss.
    """

    def __init__(
        self,
        n_rounds: int = 100,
        max_depth: int = 3,
        learning_rate: float = 0.1,
        lambda_l2: float = 1.0,
        min_child_weight: float = 1.0,
        random_state: int = 0,
    ):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.lambda_l2 = lambda_l2
        self.min_child_weight = min_child_weight
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = y.astype(np.float64)
        self.classes_ = np.unique(y.astype(np.int64))
        if len(self.classes_) != 2 or set(self.classes_) != {0, 1}:
            raise TrainingError("gradient boosting requires binary labels {0, 1}")
        self.n_features_in_ = X.shape[1]
        self.n_classes_ = 2
        prior = float(np.clip(y.mean(), 1e-12, 1 - 1e-12))
        self.base_score_ = float(np.log(prior / (1.0 - prior)))
        margin = np.full(len(y), self.base_score_)
        self.trees_: list[FlatTree] = []
        for _ in range(self.n_rounds):
            p = sigmoid(margin)
            g = p - y
            h = p * (1.0 - p)
            root = grow_newton_tree(
                X, g, h, self.max_depth, self.lambda_l2, self.min_child_weight
            )
            tree = flatten_tree(root, 1)
            if not np.all(np.isfinite(tree.value)):
                raise TrainingError("non-finite leaf value during boosting")
            self.trees_.append(tree)
            margin += self.learning_rate * tree_predict(tree, X)[:, 0]
        return self

    def decision_function(self, X):
        """Raw margin (log-odds scale) before the sigmoid."""
        check_is_fitted(self, "trees_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        margin = np.full(len(X), self.base_score_)
        for tree in self.trees_:
            margin += self.learning_rate * tree_predict(tree, X)[:, 0]
        return margin

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.decision_function(X) > 0.0).astype(np.int64)
