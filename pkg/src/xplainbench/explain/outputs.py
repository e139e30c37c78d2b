"""Resolve (model, target) into a single scalar output to be explained.

Probability-output models are explained on the probability scale. Boosted
trees are explained on the margin (log-odds) scale, where per-tree
attributions compose additively; fidelity is computed on the same scale. For
one-vs-rest models the explained scalar is the target class's component score
before row normalization (normalization is not additive across trees), with
the target class still chosen from the normalized prediction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..models.boosting import GradientBoostingClassifier
from ..models.forest import RandomForestClassifier
from ..models.mlp import MlpClassifier
from ..models.ovr import OneVsRestClassifier
from .core import ExplainError
from .treeshap import TreeDecomposition


@dataclass
class ExplainedOutput:
    fn: callable
    scale: str
    target_class: int | None
    decomposition: TreeDecomposition | None


def _forest_decomposition(model: RandomForestClassifier, k: int):
    coef = 1.0 / len(model.trees_)
    return TreeDecomposition(
        [(t, t.value[:, k], coef) for t in model.trees_], intercept=0.0
    )


def _gbt_decomposition(model: GradientBoostingClassifier):
    return TreeDecomposition(
        [(t, t.value[:, 0], model.learning_rate) for t in model.trees_],
        intercept=model.base_score_,
    )


def resolve_target_class(model, x, target) -> int | None:
    if isinstance(target, (int, np.integer)):
        k = int(target)
        if not 0 <= k < model.n_classes_:
            raise ExplainError(f"class index {k} out of range")
        return k
    if target == "positive_class_prob":
        if model.n_classes_ != 2:
            raise ExplainError("positive_class_prob requires a binary model")
        return 1
    if target == "predicted_class_prob":
        return int(np.argmax(model.predict_proba(np.asarray(x)[None, :])[0]))
    raise ExplainError(f"unknown target {target!r}")


def resolve_output(model, x, target) -> ExplainedOutput:
    """Scalar output function for explaining model at point x."""
    k = resolve_target_class(model, x, target)

    if isinstance(model, RandomForestClassifier):
        return ExplainedOutput(
            fn=lambda X: model.predict_proba(X)[:, k],
            scale="probability",
            target_class=k,
            decomposition=_forest_decomposition(model, k),
        )
    if isinstance(model, GradientBoostingClassifier):
        # binary margin; both classes are explained through the same log-odds
        return ExplainedOutput(
            fn=model.decision_function,
            scale="margin",
            target_class=k,
            decomposition=_gbt_decomposition(model),
        )
    if isinstance(model, OneVsRestClassifier):
        component = model.estimators_[k]
        if isinstance(component, RandomForestClassifier):
            return ExplainedOutput(
                fn=lambda X: component.predict_proba(X)[:, 1],
                scale="probability",
                target_class=k,
                decomposition=_forest_decomposition(component, 1),
            )
        if isinstance(component, GradientBoostingClassifier):
            return ExplainedOutput(
                fn=component.decision_function,
                scale="margin",
                target_class=k,
                decomposition=_gbt_decomposition(component),
            )
        return ExplainedOutput(
            fn=lambda X: component.predict_proba(X)[:, 1],
            scale="probability",
            target_class=k,
            decomposition=None,
        )
    if isinstance(model, MlpClassifier):
        return ExplainedOutput(
            fn=lambda X: model.predict_proba(X)[:, k],
            scale="probability",
            target_class=k,
            decomposition=None,
        )
    # any object with predict_proba works for the model-agnostic methods
    if hasattr(model, "predict_proba"):
        return ExplainedOutput(
            fn=lambda X: model.predict_proba(X)[:, k],
            scale="probability",
            target_class=k,
            decomposition=None,
        )
    raise ExplainError(f"cannot explain {type(model).__name__}")
