"""Performance metrics (accuracy / precision / recall / F1) and the two
attribution-quality metrics: average fidelity (mean squared error between the
model output and its additive explanation) and average sparsity (mean count of
features whose attribution magnitude exceeds a threshold)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_SPARSITY_TAU = 1e-3


class MetricsError(ValueError):
    pass


@dataclass
class PerformanceReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: str
    per_class: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "averaging": self.averaging,
            "per_class": self.per_class,
        }


@dataclass
class ExplainabilityReport:
    fidelity_mse: float
    sparsity_avg: float
    tau: float
    n_explained: int

    def as_dict(self) -> dict:
        return {
            "fidelity_mse": self.fidelity_mse,
            "sparsity_avg": self.sparsity_avg,
            "tau": self.tau,
            "n_explained": self.n_explained,
        }


def _safe_div(a: float, b: float) -> float:
    return a / b if b else 0.0


def classification_metrics(y_true, y_pred, averaging="binary_positive",
                           n_classes=None) -> PerformanceReport:
    """Confusion-matrix metrics.

    averaging: "binary_positive" scores the positive class (label 1) of a
    binary problem; "weighted" averages per-class scores by true-class
    support; "macro" averages them unweighted. Classes absent from y_true
    contribute zero with zero weight.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) == 0:
        raise MetricsError("empty input")
    if y_true.shape != y_pred.shape:
        raise MetricsError("y_true and y_pred length mismatch")
    if averaging not in ("binary_positive", "weighted", "macro"):
        raise MetricsError(f"unknown averaging {averaging!r}")

    k = n_classes or int(max(y_true.max(), y_pred.max())) + 1
    if averaging == "binary_positive" and k > 2:
        raise MetricsError("binary_positive averaging requires binary labels")
    accuracy = float(np.mean(y_true == y_pred))

    per_class = []
    for c in range(k):
        tp = int(np.sum((y_pred == c) & (y_true == c)))
        fp = int(np.sum((y_pred == c) & (y_true != c)))
        fn = int(np.sum((y_pred != c) & (y_true == c)))
        p = _safe_div(tp, tp + fp)
        r = _safe_div(tp, tp + fn)
        per_class.append(
            {
                "class": c,
                "precision": p,
                "recall": r,
                "f1": _safe_div(2 * p * r, p + r),
                "support": int(np.sum(y_true == c)),
            }
        )

    if averaging == "binary_positive":
        row = per_class[1]
        precision, recall, f1 = row["precision"], row["recall"], row["f1"]
    else:
        if averaging == "weighted":
            weights = np.array([row["support"] for row in per_class], dtype=float)
        else:
            weights = np.ones(k)
        weights = weights / weights.sum()
        precision = float(sum(w * row["precision"] for w, row in zip(weights, per_class)))
        recall = float(sum(w * row["recall"] for w, row in zip(weights, per_class)))
        f1 = float(sum(w * row["f1"] for w, row in zip(weights, per_class)))

    return PerformanceReport(accuracy, precision, recall, f1, averaging, per_class)


def shap_fidelity(attributions) -> float:
    """Mean squared error between each explained model output and its additive
    surrogate (base value plus summed attributions)."""
    if not attributions:
        raise MetricsError("empty attribution list")
    gaps = np.array([a.fx - a.g() for a in attributions])
    return float(np.mean(gaps**2))


def shap_sparsity(attributions, tau: float = DEFAULT_SPARSITY_TAU) -> float:
    """Average count per sample of features with |attribution| > tau."""
    if not attributions:
        raise MetricsError("empty attribution list")
    if tau < 0:
        raise MetricsError("tau must be >= 0")
    counts = [int(np.sum(np.abs(a.phi) > tau)) for a in attributions]
    return float(np.mean(counts))


def explainability_report(attributions, tau: float = DEFAULT_SPARSITY_TAU):
    return ExplainabilityReport(
        fidelity_mse=shap_fidelity(attributions),
        sparsity_avg=shap_sparsity(attributions, tau),
        tau=tau,
        n_explained=len(attributions),
    )
