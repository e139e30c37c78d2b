"""KernelSHAP: Shapley values by weighted least squares over coalition
indicator vectors, with the efficiency constraint imposed by eliminating one
coefficient. With full enumeration of the 2^d - 2 proper coalitions the result
matches exact enumeration (the kernel weighting is exact, not approximate).
"""

from __future__ import annotations

from math import comb

import numpy as np

from .core import ExplainError, eval_coalitions


def shapley_kernel_weight(d: int, s: int) -> float:
    """w(|z|) = (d - 1) / (C(d,|z|) * |z| * (d - |z|)) for 0 < |z| < d."""
    return (d - 1) / (comb(d, s) * s * (d - s))


def _mask_matrix(masks: np.ndarray, d: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(d)[None, :]) & 1).astype(np.float64)


def _solve_constrained_wls(Z, V, weights, phi0, fx):
    """Minimize sum w_j (V_j - phi0 - Z_j . phi)^2 subject to
    sum(phi) = fx - phi0, by substituting the last coefficient."""
    d = Z.shape[1]
    e = fx - phi0
    y = V - phi0 - Z[:, -1] * e
    A = Z[:, :-1] - Z[:, -1][:, None]
    sw = np.sqrt(weights)
    Aw = A * sw[:, None]
    yw = y * sw
    # lstsq tolerates the (theoretically impossible under full enumeration)
    # rank-deficient case; singularity under sampling is handled by the caller
    sol, _, rank, _ = np.linalg.lstsq(Aw, yw, rcond=None)
    if rank < d - 1:
        raise ExplainError("singular weighted least squares system")
    phi = np.empty(d)
    phi[:-1] = sol
    phi[-1] = e - sol.sum()
    return phi


def kernel_shap_values(fn, x, background, budget="full", seed=0):
    """Returns (phi0, phi, fx).

    ``budget`` is "full" (enumerate every proper coalition) or a sample count
    M >= d + 2; sampled coalitions are drawn from the Shapley kernel
    distribution over sizes, paired with their complements.
    """
    x = np.asarray(x, dtype=np.float64)
    d = len(x)
    full_mask = (1 << d) - 1
    phi0, fx = eval_coalitions(fn, x, background, np.array([0, full_mask]))
    if d == 1:
        return float(phi0), np.array([fx - phi0]), float(fx)

    if budget == "full":
        masks = np.arange(1, full_mask, dtype=np.int64)
        sizes = np.array([bin(m).count("1") for m in masks])
        weights = np.array([shapley_kernel_weight(d, s) for s in sizes])
        V = eval_coalitions(fn, x, background, masks)
        phi = _solve_constrained_wls(_mask_matrix(masks, d), V, weights, phi0, fx)
        return float(phi0), phi, float(fx)

    budget = int(budget)
    if budget < d + 2:
        raise ExplainError(f"coalition budget must be >= {d + 2}")
    for attempt in range(5):  # re-draw on a singular sampled system
        masks, weights = _sample_coalitions(d, budget, seed + attempt)
        V = eval_coalitions(fn, x, background, masks)
        try:
            phi = _solve_constrained_wls(_mask_matrix(masks, d), V, weights,
                                         phi0, fx)
            return float(phi0), phi, float(fx)
        except ExplainError:
            continue
    raise ExplainError("singular weighted least squares system after re-draws")


def _sample_coalitions(d: int, budget: int, seed: int):
    """Draw coalition masks from the Shapley kernel distribution over sizes,
    paired with complements; duplicates collapse into integer weights."""
    rng = np.random.default_rng(seed)
    full_mask = (1 << d) - 1
    size_probs = np.array([1.0 / (s * (d - s)) for s in range(1, d)])
    size_probs /= size_probs.sum()
    chosen = []
    while len(chosen) < budget:
        s = 1 + rng.choice(d - 1, p=size_probs)
        feats = rng.choice(d, size=s, replace=False)
        m = 0
        for i in feats:
            m |= 1 << int(i)
        chosen.append(m)
        if len(chosen) < budget:
            chosen.append(full_mask ^ m)  # antithetic complement
    masks, counts = np.unique(np.array(chosen, dtype=np.int64), return_counts=True)
    return masks, counts.astype(np.float64)
