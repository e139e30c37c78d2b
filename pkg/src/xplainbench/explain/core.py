"""Shared pieces of the attribution engine: the additive explanation record,
background sets, and the interventional value function."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

MAX_EXACT_FEATURES = 20


class ExplainError(ValueError):
    pass


@dataclass
class Attribution:
    """Additive explanation of one model output: the explained output equals
    ``base_value + phi.sum()`` for exact methods (efficiency axiom)."""

    base_value: float
    phi: np.ndarray
    fx: float
    feature_names: list[str]
    method: str = ""
    scale: str = "probability"
    target_class: int | None = None

    def g(self) -> float:
        """The additive surrogate's value at the explained point."""
        return float(self.base_value + self.phi.sum())

    def efficiency_gap(self) -> float:
        return abs(self.g() - self.fx)


@dataclass(frozen=True)
class BackgroundSet:
    """Reference rows used to marginalize absent features."""

    rows: np.ndarray
    seed: int

    @property
    def size(self) -> int:
        return len(self.rows)


def sample_background(X: np.ndarray, size: int = 100, seed: int = 0) -> BackgroundSet:
    """Draw reference rows (without replacement when possible) from X."""
    if size < 1:
        raise ExplainError("background size must be >= 1")
    rng = np.random.default_rng(seed)
    n = len(X)
    if size >= n:
        idx = np.arange(n)
    else:
        idx = np.sort(rng.choice(n, size=size, replace=False))
    return BackgroundSet(rows=np.array(X[idx], dtype=np.float64), seed=seed)


@dataclass(frozen=True)
class ExplainerConfig:
    """How to explain a model: method, background, coalition budget, target.

    ``target`` is one of ``positive_class_prob``, ``predicted_class_prob`` or
    an integer class index. ``budget`` is a coalition count for sampled
    KernelSHAP, or "full" for complete enumeration.
    """

    method: str = "tree"
    background_size: int = 100
    background_seed: int = 0
    budget: int | str = "full"
    target: int | str = "predicted_class_prob"
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("exact", "kernel", "tree"):
            raise ExplainError(f"unknown method {self.method!r}")
        if isinstance(self.budget, str) and self.budget != "full":
            raise ExplainError("budget must be an integer or 'full'")


def coalition_rows(x: np.ndarray, background: np.ndarray, masks: np.ndarray):
    """Hybrid rows for each coalition mask: features whose bit is set come
    from x, the rest from each background row. Returns (len(masks)*K, d)."""
    d = len(x)
    bits = (masks[:, None] >> np.arange(d)[None, :]) & 1  # (m, d)
    hybrids = np.where(bits[:, None, :].astype(bool), x[None, None, :],
                       background[None, :, :])
    return hybrids.reshape(-1, d)


def eval_coalitions(fn, x, background, masks, chunk=4096) -> np.ndarray:
    """Value function v(S) for each coalition mask: the mean model output over
    background rows with the coalition's features pinned to x."""
    masks = np.asarray(masks, dtype=np.int64)
    K = len(background)
    out = np.empty(len(masks))
    for start in range(0, len(masks), chunk):
        part = masks[start : start + chunk]
        vals = fn(coalition_rows(x, background, part))
        out[start : start + len(part)] = np.asarray(vals).reshape(len(part), K).mean(axis=1)
    return out


def value_function(fn, x, subset, background: np.ndarray) -> float:
    """v(S) for one explicit feature subset (iterable of feature indices)."""
    mask = 0
    for i in subset:
        mask |= 1 << int(i)
    return float(eval_coalitions(fn, np.asarray(x, dtype=np.float64),
                                 background, np.array([mask]))[0])
