"""One-vs-rest decomposition of a multiclass problem into per-class binary
models, with row-normalized probability output."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .forest import TrainingError


class OneVsRestClassifier(ClassifierMixin, BaseEstimator):
    """Wraps a binary base estimator; one clone per class is trained on
    class-vs-rest labels. ``predict_proba`` divides each row of per-class
    positive scores by its sum (uniform if the sum is zero), so one class is
    predicted per row."""

    def __init__(self, base_estimator, normalize: bool = True):
        self.base_estimator = base_estimator
        self.normalize = normalize

    def fit(self, X, y, class_names=None):
        X, y = check_X_y(X, y)
        y = y.astype(np.int64)
        self.n_features_in_ = X.shape[1]
        self.n_classes_ = int(y.max()) + 1
        self.classes_ = np.arange(self.n_classes_)
        present = set(np.unique(y))
        for k in range(self.n_classes_):
            if k not in present:
                name = class_names[k] if class_names else str(k)
                raise TrainingError(f"class {name!r} absent from training data")
        self.estimators_ = []
        for k in range(self.n_classes_):
            est = clone(self.base_estimator)
            est.fit(X, (y == k).astype(np.int64))
            self.estimators_.append(est)
        return self

    def class_scores(self, X):
        """Raw per-class positive probabilities, before row normalization."""
        check_is_fitted(self, "estimators_")
        X = check_array(X)
        return np.column_stack(
            [est.predict_proba(X)[:, 1] for est in self.estimators_]
        )

    def predict_proba(self, X):
        scores = self.class_scores(X)
        if not self.normalize:
            return scores
        sums = scores.sum(axis=1, keepdims=True)
        out = np.full_like(scores, 1.0 / scores.shape[1])
        np.divide(scores, sums, out=out, where=sums > 0)
        return out

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)
