"""xplainbench: train tabular classifiers, explain them with Shapley-value
attributions, and score the pipelines on fidelity/sparsity explainability
metrics alongside standard performance metrics."""

__version__ = "0.1.0"

from .data import (
    AlertnessGenConfig,
    TabularDataset,
    feature_label_correlation,
    generate_alertness,
    load_custom_csv,
    load_yeast_csv,
    save_csv,
    train_test_split,
)
from .explain import (
    Attribution,
    BackgroundSet,
    ExplainerConfig,
    explain_batch,
    sample_background,
)
from .metrics import (
    ExplainabilityReport,
    PerformanceReport,
    classification_metrics,
    shap_fidelity,
    shap_sparsity,
)
from .models import (
    GradientBoostingClassifier,
    MlpClassifier,
    OneVsRestClassifier,
    RandomForestClassifier,
)
