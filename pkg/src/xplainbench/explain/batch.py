"""Batch explanation driver and attribution export."""

from __future__ import annotations

import csv
import json

import numpy as np

from .core import (
    MAX_EXACT_FEATURES,
    Attribution,
    BackgroundSet,
    ExplainError,
    ExplainerConfig,
)
from .exact import exact_shapley_values
from .kernel import kernel_shap_values
from .outputs import resolve_output
from .treeshap import tree_shap_values


def explain_row(model, x, config: ExplainerConfig, background: BackgroundSet,
                feature_names=None) -> Attribution:
    x = np.asarray(x, dtype=np.float64)
    out = resolve_output(model, x, config.target)
    names = list(feature_names) if feature_names else [
        f"f{j}" for j in range(len(x))
    ]
    if config.method == "exact":
        if len(x) > MAX_EXACT_FEATURES:
            raise ExplainError(
                f"exact method supports at most {MAX_EXACT_FEATURES} features;"
                " use the kernel method"
            )
        phi0, phi, fx = exact_shapley_values(out.fn, x, background.rows)
    elif config.method == "kernel":
        phi0, phi, fx = kernel_shap_values(
            out.fn, x, background.rows, budget=config.budget, seed=config.seed
        )
    else:
        if out.decomposition is None:
            raise ExplainError(
                f"tree method does not support {type(model).__name__};"
                " use the kernel method"
            )
        phi0, phi, fx = tree_shap_values(out.decomposition, x, background.rows)
    return Attribution(
        base_value=phi0,
        phi=phi,
        fx=fx,
        feature_names=names,
        method=config.method,
        scale=out.scale,
        target_class=out.target_class,
    )


def explain_batch(model, X_eval, config: ExplainerConfig,
                  background: BackgroundSet, feature_names=None):
    """One Attribution per evaluation row; with target predicted_class_prob
    each row is explained with respect to its own predicted class."""
    X_eval = np.asarray(X_eval, dtype=np.float64)
    results = []
    for i in range(len(X_eval)):
        try:
            results.append(
                explain_row(model, X_eval[i], config, background, feature_names)
            )
        except ExplainError as exc:
            raise ExplainError(f"row {i}: {exc}") from exc
    return results


def attributions_to_csv(attributions, path) -> None:
    if not attributions:
        raise ExplainError("no attributions to export")
    names = attributions[0].feature_names
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fx", "phi0"] + [f"phi_{n}" for n in names])
        for a in attributions:
            w.writerow([repr(a.fx), repr(a.base_value)]
                       + [repr(float(v)) for v in a.phi])


def attributions_to_json(attributions) -> str:
    return json.dumps(
        [
            {
                "fx": a.fx,
                "phi0": a.base_value,
                "phi": a.phi.tolist(),
                "feature_names": a.feature_names,
                "method": a.method,
                "scale": a.scale,
                "target_class": a.target_class,
            }
            for a in attributions
        ],
        indent=2,
    )
