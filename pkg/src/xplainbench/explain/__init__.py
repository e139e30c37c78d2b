from .batch import (
    attributions_to_csv,
    attributions_to_json,
    explain_batch,
    explain_row,
)
from .core import (
    Attribution,
    BackgroundSet,
    ExplainError,
    ExplainerConfig,
    sample_background,
    value_function,
)
from .exact import exact_shapley_values
from .kernel import kernel_shap_values
from .outputs import ExplainedOutput, resolve_output
from .treeshap import TreeDecomposition, tree_shap_values

__all__ = [
    "Attribution",
    "BackgroundSet",
    "ExplainError",
    "ExplainedOutput",
    "ExplainerConfig",
    "TreeDecomposition",
    "attributions_to_csv",
    "attributions_to_json",
    "exact_shapley_values",
    "explain_batch",
    "explain_row",
    "kernel_shap_values",
    "resolve_output",
    "sample_background",
    "tree_shap_values",
    "value_function",
]
