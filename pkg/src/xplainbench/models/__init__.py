from .boosting import GradientBoostingClassifier, sigmoid
from .forest import RandomForestClassifier, TrainingError
from .io import load_model, model_from_dict, model_to_dict, save_model
from .mlp import MlpClassifier
from .ovr import OneVsRestClassifier
from .trees import FlatTree, TreeNode, flatten_tree, tree_apply, tree_predict

__all__ = [
    "FlatTree",
    "GradientBoostingClassifier",
    "MlpClassifier",
    "OneVsRestClassifier",
    "RandomForestClassifier",
    "TrainingError",
    "TreeNode",
    "flatten_tree",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "save_model",
    "sigmoid",
    "tree_apply",
    "tree_predict",
]
