"""Versioned JSON serialization for trained models.

Floats pass through Python's shortest-repr JSON encoding, so a round trip
reproduces predictions exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .boosting import GradientBoostingClassifier
from .forest import RandomForestClassifier
from .mlp import MlpClassifier
from .ovr import OneVsRestClassifier
from .trees import FlatTree

SCHEMA_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _flat_tree_to_dict(tree: FlatTree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
    }


def _flat_tree_from_dict(d: dict) -> FlatTree:
    return FlatTree(
        feature=np.asarray(d["feature"], dtype=np.int64),
        threshold=np.asarray(d["threshold"], dtype=np.float64),
        left=np.asarray(d["left"], dtype=np.int64),
        right=np.asarray(d["right"], dtype=np.int64),
        value=np.asarray(d["value"], dtype=np.float64),
    )


def model_to_dict(model) -> dict:
    doc = {"schema_version": SCHEMA_VERSION}
    if isinstance(model, RandomForestClassifier):
        doc["family"] = "random_forest"
        doc["params"] = model.get_params()
        doc["n_classes"] = model.n_classes_
        doc["n_features"] = model.n_features_in_
        doc["classes"] = model.classes_.tolist()
        doc["trees"] = [_flat_tree_to_dict(t) for t in model.trees_]
    elif isinstance(model, GradientBoostingClassifier):
        doc["family"] = "gbt"
        doc["params"] = model.get_params()
        doc["n_features"] = model.n_features_in_
        doc["base_score"] = model.base_score_
        doc["trees"] = [_flat_tree_to_dict(t) for t in model.trees_]
    elif isinstance(model, MlpClassifier):
        doc["family"] = "mlp"
        params = model.get_params()
        params["hidden_sizes"] = list(params["hidden_sizes"])
        doc["params"] = params
        doc["n_classes"] = model.n_classes_
        doc["n_features"] = model.n_features_in_
        doc["n_outputs"] = model.n_outputs_
        doc["classes"] = model.classes_.tolist()
        doc["standardization"] = {
            "mean": model.mean_.tolist(),
            "std": model.std_.tolist(),
        }
        doc["weights"] = [w.tolist() for w in model.weights_]
        doc["biases"] = [b.tolist() for b in model.biases_]
    elif isinstance(model, OneVsRestClassifier):
        doc["family"] = "ovr"
        doc["normalize"] = model.normalize
        doc["n_features"] = model.n_features_in_
        doc["components"] = [model_to_dict(est) for est in model.estimators_]
    else:
        raise ModelFormatError(f"cannot serialize {type(model).__name__}")
    return doc


def model_from_dict(doc: dict):
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ModelFormatError(f"unsupported schema_version {version!r}")
    family = doc.get("family")
    if family == "random_forest":
        model = RandomForestClassifier(**doc["params"])
        model.n_classes_ = doc["n_classes"]
        model.n_features_in_ = doc["n_features"]
        model.classes_ = np.asarray(doc["classes"], dtype=np.int64)
        model.trees_ = [_flat_tree_from_dict(t) for t in doc["trees"]]
    elif family == "gbt":
        model = GradientBoostingClassifier(**doc["params"])
        model.n_features_in_ = doc["n_features"]
        model.n_classes_ = 2
        model.classes_ = np.array([0, 1])
        model.base_score_ = doc["base_score"]
        model.trees_ = [_flat_tree_from_dict(t) for t in doc["trees"]]
    elif family == "mlp":
        params = dict(doc["params"])
        params["hidden_sizes"] = tuple(params["hidden_sizes"])
        model = MlpClassifier(**params)
        model.n_classes_ = doc["n_classes"]
        model.n_features_in_ = doc["n_features"]
        model.n_outputs_ = doc["n_outputs"]
        model.classes_ = np.asarray(doc["classes"], dtype=np.int64)
        model.mean_ = np.asarray(doc["standardization"]["mean"])
        model.std_ = np.asarray(doc["standardization"]["std"])
        model.weights_ = [np.asarray(w) for w in doc["weights"]]
        model.biases_ = [np.asarray(b) for b in doc["biases"]]
    elif family == "ovr":
        components = [model_from_dict(c) for c in doc["components"]]
        model = OneVsRestClassifier(
            base_estimator=components[0], normalize=doc["normalize"]
        )
        model.estimators_ = components
        model.n_features_in_ = doc["n_features"]
        model.n_classes_ = len(components)
        model.classes_ = np.arange(len(components))
    else:
        raise ModelFormatError(f"unknown model family {family!r}")
    return model


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
