"""Declarative pipeline DSL (JSON schema, parser, canonical serializer) and
the executor that turns one validated spec into a run report."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from .data import (
    AlertnessGenConfig,
    DatasetError,
    TabularDataset,
    generate_alertness,
    load_custom_csv,
    load_yeast_csv,
    train_test_split,
)
from .explain import ExplainError, ExplainerConfig, explain_batch, sample_background
from .metrics import (
    DEFAULT_SPARSITY_TAU,
    classification_metrics,
    explainability_report,
)
from .models import (
    GradientBoostingClassifier,
    MlpClassifier,
    OneVsRestClassifier,
    RandomForestClassifier,
)

SPEC_VERSION = 1
MODEL_FAMILIES = ("random_forest", "gbt", "mlp")
TREE_FAMILIES = ("random_forest", "gbt")

HYPERPARAMETER_SCHEMAS = {
    "random_forest": {
        "n_trees": {"type": "integer", "minimum": 1},
        "max_depth": {"type": ["integer", "null"], "minimum": 1},
        "min_samples_leaf": {"type": "integer", "minimum": 1},
        "features_per_split": {"type": ["integer", "null"], "minimum": 1},
        "bootstrap": {"type": "boolean"},
    },
    "gbt": {
        "n_rounds": {"type": "integer", "minimum": 0},
        "max_depth": {"type": "integer", "minimum": 1},
        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
        "lambda_l2": {"type": "number", "minimum": 0},
        "min_child_weight": {"type": "number", "minimum": 0},
    },
    "mlp": {
        "hidden_sizes": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 1,
        },
        "epochs": {"type": "integer", "minimum": 0},
        "batch_size": {"type": "integer", "minimum": 1},
        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
        "output": {"enum": ["sigmoid", "softmax"]},
    },
}

PIPELINE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["spec_version", "task", "model"],
    "properties": {
        "spec_version": {"const": SPEC_VERSION},
        "task": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["binary_alertness", "yeast_multiclass", "custom_csv"]},
                "n": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "hr_band_low": {"type": "integer"},
                "hr_band_high": {"type": "integer"},
                "path": {"type": "string"},
                "label_column": {"type": ["string", "integer"]},
            },
        },
        "split": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "test_fraction": {
                    "type": "number",
                    "exclusiveMinimum": 0,
                    "exclusiveMaximum": 1,
                },
                "seed": {"type": "integer"},
            },
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {
                "family": {"enum": list(MODEL_FAMILIES)},
                "hyperparameters": {"type": "object"},
                "seed": {"type": "integer"},
                "ovr": {"type": "boolean"},
            },
        },
        "explainer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["exact", "kernel", "tree"]},
                "background_size": {"type": "integer", "minimum": 1},
                "background_seed": {"type": "integer"},
                "budget": {
                    "anyOf": [{"const": "full"}, {"type": "integer", "minimum": 4}]
                },
                "target": {
                    "anyOf": [
                        {"enum": ["positive_class_prob", "predicted_class_prob"]},
                        {"type": "integer", "minimum": 0},
                    ]
                },
                "seed": {"type": "integer"},
                "eval_sample": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "size": {"type": "integer", "minimum": 1},
                        "seed": {"type": "integer"},
                    },
                },
            },
        },
        "metrics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "averaging": {"enum": ["binary_positive", "weighted", "macro"]},
                "tau": {"type": "number", "minimum": 0},
            },
        },
    },
}

_VALIDATOR = Draft202012Validator(PIPELINE_SCHEMA)


class SpecValidationError(ValueError):
    """Carries every validation problem found, each with its document path."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        lines = "; ".join(f"{path}: {msg}" for path, msg in problems)
        super().__init__(f"invalid pipeline spec: {lines}")


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"stage {stage!r}: {message}")


def _json_path(error) -> str:
    return "$" + "".join(
        f"[{p}]" if isinstance(p, int) else f".{p}" for p in error.absolute_path
    )


def _unsupported_family_message(value) -> str:
    return (
        f"unsupported family {value!r}; supported families: "
        + ", ".join(MODEL_FAMILIES)
    )


def validate_spec_document(doc) -> list[tuple[str, str]]:
    """All structural and semantic problems in a spec document."""
    problems = []
    for err in sorted(_VALIDATOR.iter_errors(doc), key=_json_path):
        path = _json_path(err)
        msg = err.message
        if path == "$.model.family":
            msg = _unsupported_family_message(err.instance)
        problems.append((path, msg))
    if problems:
        return problems

    kind = doc["task"]["kind"]
    if kind in ("yeast_multiclass", "custom_csv") and "path" not in doc["task"]:
        problems.append(("$.task.path", f"required for task kind {kind!r}"))
    if kind == "custom_csv" and "label_column" not in doc["task"]:
        problems.append(("$.task.label_column", "required for task kind 'custom_csv'"))
    for key in ("n", "seed", "hr_band_low", "hr_band_high"):
        if kind != "binary_alertness" and key in doc["task"]:
            problems.append((f"$.task.{key}", f"not allowed for task kind {kind!r}"))
    if kind == "binary_alertness":
        for key in ("path", "label_column"):
            if key in doc["task"]:
                problems.append(
                    (f"$.task.{key}", "not allowed for task kind 'binary_alertness'")
                )

    family = doc["model"]["family"]
    allowed = HYPERPARAMETER_SCHEMAS[family]
    hp = doc["model"].get("hyperparameters", {})
    for key, value in hp.items():
        if key not in allowed:
            problems.append(
                (
                    f"$.model.hyperparameters.{key}",
                    f"unknown hyperparameter for family {family!r}; allowed: "
                    + ", ".join(sorted(allowed)),
                )
            )
            continue
        sub = Draft202012Validator(allowed[key])
        for err in sub.iter_errors(value):
            problems.append((f"$.model.hyperparameters.{key}", err.message))

    multiclass = kind == "yeast_multiclass"
    if multiclass and family in TREE_FAMILIES and not doc["model"].get("ovr", True):
        problems.append(
            ("$.model.ovr", "tree families require ovr=true on multiclass tasks")
        )
    if not multiclass and kind == "binary_alertness" and doc["model"].get("ovr"):
        problems.append(("$.model.ovr", "ovr is only valid on multiclass tasks"))
    return problems


def _fill_defaults(doc: dict) -> dict:
    """Return a fully-defaulted copy of a structurally valid document."""
    out = json.loads(json.dumps(doc))  # deep copy, JSON-typed
    task = out["task"]
    kind = task["kind"]
    if kind == "binary_alertness":
        task.setdefault("n", 20_000)
        task.setdefault("seed", 42)
        task.setdefault("hr_band_low", 60)
        task.setdefault("hr_band_high", 100)
    split = out.setdefault("split", {})
    split.setdefault("test_fraction", 0.2)
    split.setdefault("seed", 42)
    model = out["model"]
    model.setdefault("hyperparameters", {})
    model.setdefault("seed", 0)
    multiclass = kind == "yeast_multiclass"
    model.setdefault("ovr", multiclass and model["family"] in TREE_FAMILIES)
    ex = out.setdefault("explainer", {})
    ex.setdefault(
        "method", "tree" if model["family"] in TREE_FAMILIES else "kernel"
    )
    ex.setdefault("background_size", 100)
    ex.setdefault("background_seed", 0)
    ex.setdefault("budget", "full")
    ex.setdefault(
        "target", "predicted_class_prob" if multiclass else "positive_class_prob"
    )
    ex.setdefault("seed", 0)
    sample = ex.setdefault("eval_sample", {})
    sample.setdefault("size", 200)
    sample.setdefault("seed", 0)
    metrics = out.setdefault("metrics", {})
    metrics.setdefault("averaging", "weighted" if multiclass else "binary_positive")
    metrics.setdefault("tau", DEFAULT_SPARSITY_TAU)
    return out


def parse_spec(text: str) -> dict:
    """Parse and validate a pipeline spec document; defaults are filled in.
    Raises SpecValidationError listing every problem with its path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecValidationError([("$", f"not valid JSON: {exc}")]) from exc
    problems = validate_spec_document(doc)
    if problems:
        raise SpecValidationError(problems)
    return _fill_defaults(doc)


def serialize_spec(spec: dict) -> str:
    """Canonical text form: defaults explicit, keys sorted."""
    return json.dumps(_fill_defaults(spec), sort_keys=True, indent=2) + "\n"


def spec_hash(spec: dict) -> str:
    return hashlib.sha256(serialize_spec(spec).encode("utf-8")).hexdigest()


@dataclass
class RunReport:
    spec: dict
    performance: dict
    explainability: dict | None
    explainability_error: str | None
    timings: dict
    provenance: dict

    def as_dict(self) -> dict:
        return {
            "spec": self.spec,
            "performance": self.performance,
            "explainability": self.explainability,
            "explainability_error": self.explainability_error,
            "timings": self.timings,
            "provenance": self.provenance,
        }

    def comparable_dict(self) -> dict:
        """Everything except wall-clock timings."""
        doc = self.as_dict()
        doc.pop("timings")
        return doc


def _load_dataset(task: dict) -> TabularDataset:
    kind = task["kind"]
    if kind == "binary_alertness":
        return generate_alertness(
            AlertnessGenConfig(
                n=task["n"],
                seed=task["seed"],
                hr_band_low=task["hr_band_low"],
                hr_band_high=task["hr_band_high"],
            )
        )
    if kind == "yeast_multiclass":
        return load_yeast_csv(task["path"])
    return load_custom_csv(task["path"], task["label_column"])


def build_model(spec: dict, ds: TabularDataset):
    family = spec["model"]["family"]
    hp = dict(spec["model"]["hyperparameters"])
    seed = spec["model"]["seed"]
    if family == "random_forest":
        base = RandomForestClassifier(random_state=seed, **hp)
    elif family == "gbt":
        base = GradientBoostingClassifier(random_state=seed, **hp)
    else:
        if "hidden_sizes" in hp:
            hp["hidden_sizes"] = tuple(hp["hidden_sizes"])
        base = MlpClassifier(random_state=seed, **hp)
    if spec["model"]["ovr"]:
        return OneVsRestClassifier(base)
    if ds.task_kind == "multiclass" and family in TREE_FAMILIES:
        raise PipelineError("fit", "tree families require ovr on multiclass data")
    return base


def run_pipeline(spec: dict) -> RunReport:
    """Execute load -> split -> fit -> predict/score -> explain -> score.

    A failure in the explanation stage still yields the performance half of
    the report, with the error recorded.
    """
    timings = {}

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            result = fn()
        except (DatasetError, ValueError, OSError) as exc:
            raise PipelineError(name, str(exc)) from exc
        timings[name] = time.perf_counter() - t0
        return result

    ds = stage("load", lambda: _load_dataset(spec["task"]))
    train, test = stage(
        "split",
        lambda: train_test_split(
            ds, spec["split"]["test_fraction"], spec["split"]["seed"]
        ),
    )

    def fit():
        model = build_model(spec, ds)
        if isinstance(model, OneVsRestClassifier):
            return model.fit(train.X, train.y, class_names=ds.class_names)
        return model.fit(train.X, train.y)

    model = stage("fit", fit)
    y_pred = stage("predict", lambda: model.predict(test.X))
    performance = stage(
        "score",
        lambda: classification_metrics(
            test.y, y_pred, spec["metrics"]["averaging"], n_classes=ds.n_classes
        ),
    )

    explainability = None
    explain_error = None
    ex = spec["explainer"]
    t0 = time.perf_counter()
    try:
        config = ExplainerConfig(
            method=ex["method"],
            background_size=ex["background_size"],
            background_seed=ex["background_seed"],
            budget=ex["budget"],
            target=ex["target"],
            seed=ex["seed"],
        )
        background = sample_background(
            train.X, size=ex["background_size"], seed=ex["background_seed"]
        )
        size = min(ex["eval_sample"]["size"], test.n_samples)
        rng = np.random.default_rng(ex["eval_sample"]["seed"])
        idx = np.sort(rng.choice(test.n_samples, size=size, replace=False))
        attributions = explain_batch(
            model, test.X[idx], config, background, feature_names=ds.feature_names
        )
        explainability = explainability_report(
            attributions, tau=spec["metrics"]["tau"]
        ).as_dict()
    except ExplainError as exc:
        explain_error = str(exc)
    timings["explain"] = time.perf_counter() - t0

    return RunReport(
        spec=_fill_defaults(spec),
        performance=performance.as_dict(),
        explainability=explainability,
        explainability_error=explain_error,
        timings=timings,
        provenance={"spec_hash": spec_hash(spec), "artifact_version": __version__},
    )


# -- benchmark runner -------------------------------------------------------

PERFORMANCE_COLUMNS = ["accuracy", "precision", "recall", "f1"]
EXPLAINABILITY_COLUMNS = ["fidelity_mse", "sparsity_avg", "tau"]


@dataclass
class BenchmarkResult:
    rows: list[dict] = field(default_factory=list)

    @property
    def n_failed(self) -> int:
        return sum(1 for row in self.rows if row.get("error"))

    def as_dict(self) -> dict:
        return {"rows": self.rows}

    def _table(self, columns, section):
        header = ["label", "task", "model"] + columns
        body = []
        for row in self.rows:
            base = [row["label"], row["task"], row["model"]]
            if row.get("error"):
                body.append(base + ["ERROR"] * len(columns))
            elif section == "explainability" and row.get("explainability") is None:
                body.append(base + ["ERROR"] * len(columns))
            else:
                data = row[section]
                body.append(
                    base + [f"{data[c]:.5g}" if data[c] is not None else "n/a"
                            for c in columns]
                )
        return header, body

    def to_markdown(self) -> str:
        out = []
        for title, cols, section in (
            ("Performance", PERFORMANCE_COLUMNS, "performance"),
            ("Explainability", EXPLAINABILITY_COLUMNS, "explainability"),
        ):
            header, body = self._table(cols, section)
            out.append(f"## {title}\n")
            out.append("| " + " | ".join(header) + " |")
            out.append("|" + "|".join(["---"] * len(header)) + "|")
            for row in body:
                out.append("| " + " | ".join(str(v) for v in row) + " |")
            out.append("")
        return "\n".join(out)

    def to_csv(self) -> str:
        header = (
            ["label", "task", "model", "error"]
            + PERFORMANCE_COLUMNS
            + EXPLAINABILITY_COLUMNS
        )
        lines = [",".join(header)]
        for row in self.rows:
            vals = [row["label"], row["task"], row["model"], row.get("error") or ""]
            for section, cols in (
                ("performance", PERFORMANCE_COLUMNS),
                ("explainability", EXPLAINABILITY_COLUMNS),
            ):
                data = row.get(section)
                for c in cols:
                    vals.append("" if not data else repr(data[c]))
            lines.append(",".join(str(v) for v in vals))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def run_benchmark(specs: list[tuple[str, dict]]) -> BenchmarkResult:
    """Run each (label, spec) pipeline; individual failures become error rows
    and the suite continues."""
    if not specs:
        raise ValueError("empty benchmark suite")
    result = BenchmarkResult()
    for label, spec in specs:
        row = {
            "label": label,
            "task": spec["task"]["kind"],
            "model": spec["model"]["family"],
        }
        try:
            report = run_pipeline(spec)
            row["performance"] = report.performance
            row["explainability"] = report.explainability
            row["error"] = report.explainability_error
            row["spec_hash"] = report.provenance["spec_hash"]
        except (PipelineError, SpecValidationError) as exc:
            row["error"] = str(exc)
            row["performance"] = None
            row["explainability"] = None
        result.rows.append(row)
    return result


def builtin_paper_suite(yeast_csv_path: str | None) -> list[tuple[str, dict]]:
    """The shipped benchmark: {random_forest, gbt, mlp} x {alertness, yeast}
    with default settings. The yeast rows need a path to the yeast CSV; if it
    is None a placeholder path is used so those rows fail cleanly."""
    suite = []
    for family in MODEL_FAMILIES:
        doc = {
            "spec_version": SPEC_VERSION,
            "task": {"kind": "binary_alertness"},
            "model": {"family": family},
        }
        suite.append((f"alertness/{family}", parse_spec(json.dumps(doc))))
    for family in MODEL_FAMILIES:
        doc = {
            "spec_version": SPEC_VERSION,
            "task": {
                "kind": "yeast_multiclass",
                "path": yeast_csv_path or "yeast.csv",
            },
            "model": {"family": family},
        }
        suite.append((f"yeast/{family}", parse_spec(json.dumps(doc))))
    return suite
