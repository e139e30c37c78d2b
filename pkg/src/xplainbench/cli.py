"""Command-line entry point.

Exit codes: 0 success, 1 runtime error, 2 validation error, 3 partial
benchmark failure.
"""

from __future__ import annotations

import json
import pathlib
import sys

import click

from .data import AlertnessGenConfig, DatasetError, generate_alertness, save_csv
from .llm import (
    Fixture,
    HttpChatTransport,
    LlmError,
    ReplayTransport,
    render_prompt,
    request_pipeline,
)
from .pipeline import (
    PipelineError,
    SpecValidationError,
    builtin_paper_suite,
    parse_spec,
    run_benchmark,
    run_pipeline,
    serialize_spec,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2
EXIT_PARTIAL = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Train, explain, and benchmark tabular classification pipelines."""


@main.command("gen-data")
@click.option("--n", default=20_000, show_default=True, help="Sample count.")
@click.option("--seed", default=42, show_default=True, help="Generator seed.")
@click.option("--band-low", default=60, show_default=True,
              help="Lower bound of the alert heart-rate band (bpm).")
@click.option("--band-high", default=100, show_default=True,
              help="Upper bound of the alert heart-rate band (bpm).")
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Output CSV path.")
def cmd_gen_data(n, seed, band_low, band_high, out):
    """Write the synthetic alertness dataset as CSV."""
    try:
        ds = generate_alertness(
            AlertnessGenConfig(n=n, seed=seed, hr_band_low=band_low,
                               hr_band_high=band_high)
        )
    except DatasetError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    try:
        save_csv(ds, out)
    except OSError as exc:
        _fail(EXIT_RUNTIME, str(exc))
    click.echo(f"wrote {ds.n_samples} rows to {out}; "
               f"class balance {ds.y.mean():.4f}")


def _report_text(report, fmt):
    if fmt == "json":
        return json.dumps(report.as_dict(), indent=2, sort_keys=True)
    perf = report.performance
    ex = report.explainability
    lines = [
        f"task: {report.spec['task']['kind']}",
        f"model: {report.spec['model']['family']}",
        f"spec_hash: {report.provenance['spec_hash']}",
        "",
        f"accuracy:  {perf['accuracy']:.4f}",
        f"precision: {perf['precision']:.4f}",
        f"recall:    {perf['recall']:.4f}",
        f"f1:        {perf['f1']:.4f}",
    ]
    if ex is not None:
        lines += [
            f"fidelity_mse: {ex['fidelity_mse']:.3g}",
            f"sparsity_avg: {ex['sparsity_avg']:.2f} (tau={ex['tau']})",
        ]
    else:
        lines += [f"explainability: ERROR ({report.explainability_error})"]
    if fmt == "csv":
        header = ["accuracy", "precision", "recall", "f1", "fidelity_mse",
                  "sparsity_avg"]
        vals = [perf["accuracy"], perf["precision"], perf["recall"], perf["f1"],
                ex["fidelity_mse"] if ex else "", ex["sparsity_avg"] if ex else ""]
        return ",".join(header) + "\n" + ",".join(str(v) for v in vals) + "\n"
    return "\n".join(lines)


def _emit(text, out):
    if out:
        pathlib.Path(out).write_text(text + ("" if text.endswith("\n") else "\n"),
                                     encoding="utf-8")
    else:
        click.echo(text)


@main.command("run")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", default="md",
              type=click.Choice(["md", "csv", "json"]), show_default=True,
              help="Report format.")
@click.option("--out", type=click.Path(dir_okay=False),
              help="Write the report to a file instead of stdout.")
@click.option("--tau", type=float, help="Override the sparsity threshold.")
@click.option("--eval-sample", type=int,
              help="Override the number of explained test rows.")
@click.option("--seed", type=int, help="Override every seed in the spec.")
def cmd_run(spec_path, fmt, out, tau, eval_sample, seed):
    """Execute one pipeline spec and report its metrics."""
    text = pathlib.Path(spec_path).read_text(encoding="utf-8")
    try:
        spec = parse_spec(text)
    except SpecValidationError as exc:
        for path, msg in exc.problems:
            click.echo(f"{spec_path}: {path}: {msg}", err=True)
        sys.exit(EXIT_VALIDATION)
    if tau is not None:
        spec["metrics"]["tau"] = tau
    if eval_sample is not None:
        spec["explainer"]["eval_sample"]["size"] = eval_sample
    if seed is not None:
        for section, key in (
            ("task", "seed"), ("split", "seed"), ("model", "seed"),
            ("explainer", "seed"), ("explainer", "background_seed"),
        ):
            if key in spec.get(section, {}):
                spec[section][key] = seed
        spec["explainer"]["eval_sample"]["seed"] = seed
    try:
        report = run_pipeline(spec)
    except PipelineError as exc:
        _fail(EXIT_RUNTIME, str(exc))
    _emit(_report_text(report, fmt), out)
    sys.exit(EXIT_OK)


@main.command("bench")
@click.option("--suite", type=click.Path(exists=True, file_okay=False),
              help="Directory of *.pipeline.json spec files.")
@click.option("--builtin", type=click.Choice(["paper"]),
              help="Run the shipped benchmark suite.")
@click.option("--yeast-csv", type=click.Path(dir_okay=False),
              help="Path to the yeast CSV for the builtin suite.")
@click.option("--format", "fmt", default="md",
              type=click.Choice(["md", "csv", "json"]), show_default=True,
              help="Table format.")
@click.option("--out", type=click.Path(dir_okay=False),
              help="Write tables to a file instead of stdout.")
def cmd_bench(suite, builtin, yeast_csv, fmt, out):
    """Run a suite of pipelines and emit performance + explainability tables."""
    if (suite is None) == (builtin is None):
        _fail(EXIT_VALIDATION, "provide exactly one of --suite or --builtin")
    specs = []
    if builtin:
        specs = builtin_paper_suite(yeast_csv)
    else:
        paths = sorted(pathlib.Path(suite).glob("*.pipeline.json"))
        if not paths:
            _fail(EXIT_VALIDATION, f"no *.pipeline.json files in {suite}")
        for path in paths:
            try:
                label = path.name[: -len(".pipeline.json")]
                specs.append(
                    (label, parse_spec(path.read_text(encoding="utf-8")))
                )
            except SpecValidationError as exc:
                for epath, msg in exc.problems:
                    click.echo(f"{path}: {epath}: {msg}", err=True)
                sys.exit(EXIT_VALIDATION)
    result = run_benchmark(specs)
    text = {"md": result.to_markdown, "csv": result.to_csv,
            "json": result.to_json}[fmt]()
    _emit(text, out)
    sys.exit(EXIT_PARTIAL if result.n_failed else EXIT_OK)


@main.command("ask-llm")
@click.option("--task", required=True, type=click.Choice(["binary", "multiclass"]),
              help="Which of the two benchmark prompts to render.")
@click.option("--family", required=True,
              type=click.Choice(["random_forest", "gbt", "mlp", "lstm"]),
              help="Model family substituted into the prompt.")
@click.option("--endpoint", help="Chat-completions endpoint URL.")
@click.option("--model", default="gpt-4o", show_default=True,
              help="Model name sent to the endpoint.")
@click.option("--replay", type=click.Path(exists=True, dir_okay=False),
              help="Replay fixture file; no network access is made.")
@click.option("--temperature", default=1.0, show_default=True,
              help="Sampling temperature.")
@click.option("--max-retries", default=2, show_default=True,
              help="Validation-feedback retries.")
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Where to write the validated spec.")
@click.option("--transcript", type=click.Path(dir_okay=False),
              help="Where to write the raw exchange transcript (JSON).")
def cmd_ask_llm(task, family, endpoint, model, replay, temperature,
                max_retries, out, transcript):
    """Ask an LLM (or a replay fixture) for a pipeline spec."""
    if (endpoint is None) == (replay is None):
        _fail(EXIT_VALIDATION, "provide exactly one of --endpoint or --replay")
    prompt = render_prompt(task, family)
    if replay:
        transport = ReplayTransport(Fixture.load(replay))
    else:
        transport = HttpChatTransport(endpoint, model)
    try:
        spec, exchanges = request_pipeline(
            transport, prompt, temperature=temperature, max_retries=max_retries
        )
    except LlmError as exc:
        _fail(EXIT_RUNTIME, str(exc))
    pathlib.Path(out).write_text(serialize_spec(spec), encoding="utf-8")
    if transcript:
        doc = [e.as_dict() for e in exchanges]
        pathlib.Path(transcript).write_text(
            json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8"
        )
    click.echo(f"wrote validated spec to {out} "
               f"({len(exchanges)} exchange(s), {len(exchanges) - 1} retr"
               f"{'y' if len(exchanges) == 2 else 'ies'})")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
