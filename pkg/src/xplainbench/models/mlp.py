"""Multilayer perceptron trained with mini-batch Adam.

Hidden layers use ReLU. The output head is either per-class sigmoids with
binary cross-entropy (the default, also used for the binary task with a single
unit) or a softmax with cross-entropy. Inputs are standardized with
training-split statistics. Everything runs in float64 with seeded init and
shuffle streams, so training is bit-deterministic.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .boosting import sigmoid
from .forest import TrainingError


class MlpClassifier(ClassifierMixin, BaseEstimator):
    def __init__(
        self,
        hidden_sizes: tuple[int, ...] = (64,),
        epochs: int = 20,
        batch_size: int = 128,
        learning_rate: float = 5e-3,
        output: str = "sigmoid",
        random_state: int = 0,
    ):
        self.hidden_sizes = hidden_sizes
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.output = output
        self.random_state = random_state

    # -- parameter plumbing -------------------------------------------------

    def _init_params(self, sizes, rng):
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return weights, biases

    def get_flat_params(self) -> np.ndarray:
        return np.concatenate(
            [w.ravel() for w in self.weights_] + [b.ravel() for b in self.biases_]
        )

    def set_flat_params(self, flat: np.ndarray) -> None:
        pos = 0
        for w in self.weights_:
            w[...] = flat[pos : pos + w.size].reshape(w.shape)
            pos += w.size
        for b in self.biases_:
            b[...] = flat[pos : pos + b.size]
            pos += b.size

    # -- forward / backward -------------------------------------------------

    def _forward(self, Xs):
        """Activations per layer on standardized input."""
        acts = [Xs]
        a = Xs
        for i, (w, b) in enumerate(zip(self.weights_, self.biases_)):
            z = a @ w + b
            if i < len(self.weights_) - 1:
                a = np.maximum(z, 0.0)
            elif self.output == "sigmoid":
                a = sigmoid(z)
            else:
                z = z - z.max(axis=1, keepdims=True)
                e = np.exp(z)
                a = e / e.sum(axis=1, keepdims=True)
            acts.append(a)
        return acts

    def _loss_and_grads(self, Xs, T):
        """Mean-over-batch loss (summed over output units) and gradients.

        ``Xs`` is standardized input, ``T`` the 0/1 target matrix with one
        column per output unit. Cross-entropy against sigmoid or softmax both
        reduce to output delta p - T.
        """
        acts = self._forward(Xs)
        p = np.clip(acts[-1], 1e-12, 1.0 - 1e-12)
        n = len(Xs)
        if self.output == "sigmoid":
            loss = -np.sum(T * np.log(p) + (1.0 - T) * np.log(1.0 - p)) / n
        else:
            loss = -np.sum(T * np.log(p)) / n
        delta = (acts[-1] - T) / n
        grads_w = [np.zeros_like(w) for w in self.weights_]
        grads_b = [np.zeros_like(b) for b in self.biases_]
        for i in range(len(self.weights_) - 1, -1, -1):
            grads_w[i] = acts[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights_[i].T) * (acts[i] > 0.0)
        return float(loss), grads_w, grads_b

    # -- training -----------------------------------------------------------

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = y.astype(np.int64)
        self.classes_ = np.unique(y)
        if len(self.classes_) < 2:
            raise TrainingError("training data contains a single class")
        self.n_features_in_ = X.shape[1]
        self.n_classes_ = int(y.max()) + 1

        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0.0] = 1.0
        self.std_ = std
        Xs = (X - self.mean_) / self.std_

        n_out = 1 if self.n_classes_ == 2 and self.output == "sigmoid" else self.n_classes_
        if n_out == 1:
            T = y[:, None].astype(np.float64)
        else:
            T = np.zeros((len(y), n_out))
            T[np.arange(len(y)), y] = 1.0
        self.n_outputs_ = n_out

        sizes = [self.n_features_in_, *self.hidden_sizes, n_out]
        rng = np.random.default_rng(self.random_state)
        self.weights_, self.biases_ = self._init_params(sizes, rng)

        params = self.get_flat_params()
        m = np.zeros_like(params)
        v = np.zeros_like(params)
        b1, b2, eps = 0.9, 0.999, 1e-8
        step = 0
        n = len(y)
        for epoch in range(self.epochs):
            perm = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = perm[start : start + self.batch_size]
                loss, gw, gb = self._loss_and_grads(Xs[batch], T[batch])
                if not np.isfinite(loss):
                    raise TrainingError(f"non-finite loss at epoch {epoch}")
                grad = np.concatenate(
                    [g.ravel() for g in gw] + [g.ravel() for g in gb]
                )
                step += 1
                m = b1 * m + (1 - b1) * grad
                v = b2 * v + (1 - b2) * grad * grad
                mhat = m / (1 - b1**step)
                vhat = v / (1 - b2**step)
                params = params - self.learning_rate * mhat / (np.sqrt(vhat) + eps)
                self.set_flat_params(params)
        return self

    # -- inference ----------------------------------------------------------

    def predict_proba(self, X):
        check_is_fitted(self, "weights_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        out = self._forward((X - self.mean_) / self.std_)[-1]
        if self.n_outputs_ == 1:
            p = out[:, 0]
            return np.column_stack([1.0 - p, p])
        return out

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)
