"""Exact Shapley values by full coalition enumeration.

phi_i = sum over S not containing i of |S|!(d-|S|-1)!/d! * (v(S u {i}) - v(S)),
with v the interventional value function over an explicit background set.
Cost is 2^d value-function evaluations; refuse d > 20.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from .core import MAX_EXACT_FEATURES, ExplainError, eval_coalitions


def shapley_pair_weights(d: int) -> np.ndarray:
    """w[s] = s! (d-1-s)! / d! for coalition size s in 0..d-1."""
    fd = factorial(d)
    return np.array(
        [factorial(s) * factorial(d - 1 - s) / fd for s in range(d)]
    )


def exact_shapley_values(fn, x, background) -> tuple[float, np.ndarray, float]:
    """Returns (phi0, phi, fx) for scalar-output fn at point x."""
    x = np.asarray(x, dtype=np.float64)
    d = len(x)
    if d > MAX_EXACT_FEATURES:
        raise ExplainError(
            f"exact enumeration needs 2^{d} coalitions; use the kernel method"
        )
    n_masks = 1 << d
    V = eval_coalitions(fn, x, background, np.arange(n_masks))
    w = shapley_pair_weights(d)
    masks = np.arange(n_masks)
    sizes = np.zeros(n_masks, dtype=np.int64)
    for i in range(d):
        sizes += (masks >> i) & 1
    phi = np.zeros(d)
    for i in range(d):
        without = masks[(masks >> i) & 1 == 0]
        s = sizes[without]
        phi[i] = np.sum(w[s] * (V[without | (1 << i)] - V[without]))
    return float(V[0]), phi, float(V[n_masks - 1])
