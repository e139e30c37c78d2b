import json

import pytest
from click.testing import CliRunner

from conftest import FIXTURE_DIR
from xplainbench.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _small_spec(**overrides):
    doc = {
        "spec_version": 1,
        "task": {"kind": "binary_alertness", "n": 300, "seed": 1},
        "split": {"test_fraction": 0.2, "seed": 1},
        "model": {"family": "random_forest",
                  "hyperparameters": {"n_trees": 5, "max_depth": 4}},
        "explainer": {"background_size": 15, "eval_sample": {"size": 5}},
    }
    doc.update(overrides)
    return doc


def _write_spec(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


class TestGenData:
    def test_writes_csv_and_reports_balance(self, runner, tmp_path):
        out = tmp_path / "alert.csv"
        result = runner.invoke(
            main, ["gen-data", "--n", "200", "--seed", "3", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert "wrote 200 rows" in result.output
        assert "class balance" in result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "heart_rate,yawning,looks_straight,eyes_closed,alert"
        assert len(lines) == 201

    def test_invalid_band_is_validation_error(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["gen-data", "--band-low", "90", "--band-high", "50",
             "--out", str(tmp_path / "x.csv")],
        )
        assert result.exit_code == 2
        assert "error:" in result.output


class TestRun:
    def test_default_report(self, runner, tmp_path):
        spec = _write_spec(tmp_path / "s.json", _small_spec())
        result = runner.invoke(main, ["run", spec])
        assert result.exit_code == 0, result.output
        assert "accuracy:" in result.output
        assert "fidelity_mse:" in result.output

    def test_json_format(self, runner, tmp_path):
        spec = _write_spec(tmp_path / "s.json", _small_spec())
        result = runner.invoke(main, ["run", spec, "--format", "json"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["performance"]["accuracy"] > 0.5
        assert doc["explainability"]["n_explained"] == 5

    def test_out_file(self, runner, tmp_path):
        spec = _write_spec(tmp_path / "s.json", _small_spec())
        out = tmp_path / "report.csv"
        result = runner.invoke(
            main, ["run", spec, "--format", "csv", "--out", str(out)]
        )
        assert result.exit_code == 0
        header = out.read_text().splitlines()[0]
        assert header.startswith("accuracy,precision,recall,f1")

    def test_tau_and_eval_sample_overrides(self, runner, tmp_path):
        spec = _write_spec(tmp_path / "s.json", _small_spec())
        result = runner.invoke(
            main,
            ["run", spec, "--format", "json", "--tau", "0.5",
             "--eval-sample", "3"],
        )
        doc = json.loads(result.output)
        assert doc["explainability"]["tau"] == 0.5
        assert doc["explainability"]["n_explained"] == 3

    def test_invalid_spec_exit_code_and_paths(self, runner, tmp_path):
        doc = _small_spec()
        doc["model"]["family"] = "svm"
        spec = _write_spec(tmp_path / "bad.json", doc)
        result = runner.invoke(main, ["run", spec])
        assert result.exit_code == 2
        assert "$.model.family" in result.output

    def test_runtime_failure_exit_code(self, runner, tmp_path):
        doc = {"spec_version": 1,
               "task": {"kind": "yeast_multiclass", "path": "/nonexistent.csv"},
               "model": {"family": "mlp"}}
        spec = _write_spec(tmp_path / "s.json", doc)
        result = runner.invoke(main, ["run", spec])
        assert result.exit_code == 1
        assert "stage 'load'" in result.output


class TestBench:
    def test_requires_exactly_one_source(self, runner, tmp_path):
        assert runner.invoke(main, ["bench"]).exit_code == 2
        result = runner.invoke(
            main, ["bench", "--suite", str(tmp_path), "--builtin", "paper"]
        )
        assert result.exit_code == 2

    def test_empty_suite_dir(self, runner, tmp_path):
        result = runner.invoke(main, ["bench", "--suite", str(tmp_path)])
        assert result.exit_code == 2
        assert "no *.pipeline.json" in result.output

    def test_suite_run_markdown(self, runner, tmp_path):
        _write_spec(tmp_path / "rf.pipeline.json", _small_spec())
        result = runner.invoke(main, ["bench", "--suite", str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert "## Performance" in result.output
        assert "| rf |" in result.output

    def test_partial_failure_exit_code(self, runner, tmp_path):
        _write_spec(tmp_path / "good.pipeline.json", _small_spec())
        _write_spec(
            tmp_path / "bad.pipeline.json",
            {"spec_version": 1,
             "task": {"kind": "yeast_multiclass", "path": "/nonexistent.csv"},
             "model": {"family": "mlp"}},
        )
        result = runner.invoke(main, ["bench", "--suite", str(tmp_path)])
        assert result.exit_code == 3
        assert "ERROR" in result.output

    def test_invalid_spec_in_suite(self, runner, tmp_path):
        _write_spec(tmp_path / "bad.pipeline.json",
                    {"spec_version": 1, "task": {"kind": "binary_alertness"},
                     "model": {"family": "svm"}})
        result = runner.invoke(main, ["bench", "--suite", str(tmp_path)])
        assert result.exit_code == 2
        assert "$.model.family" in result.output


class TestAskLlm:
    def test_replay_writes_valid_spec(self, runner, tmp_path):
        out = tmp_path / "spec.json"
        result = runner.invoke(
            main,
            ["ask-llm", "--task", "binary", "--family", "random_forest",
             "--replay", str(FIXTURE_DIR / "replay_binary_random_forest.json"),
             "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["model"]["family"] == "random_forest"
        assert doc["task"]["kind"] == "binary_alertness"
        assert "1 exchange(s)" in result.output

    def test_retry_fixture_transcript(self, runner, tmp_path):
        out = tmp_path / "spec.json"
        transcript = tmp_path / "transcript.json"
        result = runner.invoke(
            main,
            ["ask-llm", "--task", "binary", "--family", "mlp",
             "--replay", str(FIXTURE_DIR / "replay_retry_binary_mlp.json"),
             "--out", str(out), "--transcript", str(transcript)],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(transcript.read_text())
        assert len(doc) == 2
        assert doc[1]["retry_count"] == 1

    def test_requires_exactly_one_transport(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["ask-llm", "--task", "binary", "--family", "mlp",
             "--out", str(tmp_path / "s.json")],
        )
        assert result.exit_code == 2
        result = runner.invoke(
            main,
            ["ask-llm", "--task", "binary", "--family", "mlp",
             "--endpoint", "http://x",
             "--replay", str(FIXTURE_DIR / "replay_binary_mlp.json"),
             "--out", str(tmp_path / "s.json")],
        )
        assert result.exit_code == 2

    def test_fixture_mismatch_is_runtime_error(self, runner, tmp_path):
        # gbt prompt against the mlp fixture: no matching request hash
        result = runner.invoke(
            main,
            ["ask-llm", "--task", "binary", "--family", "gbt",
             "--replay", str(FIXTURE_DIR / "replay_binary_mlp.json"),
             "--out", str(tmp_path / "s.json")],
        )
        assert result.exit_code == 1
        assert "no fixture entry" in result.output


class TestHelp:
    @pytest.mark.parametrize(
        "args", [[], ["gen-data"], ["run"], ["bench"], ["ask-llm"]]
    )
    def test_help_available(self, runner, args):
        result = runner.invoke(main, args + ["--help"])
        assert result.exit_code == 0
        assert "Usage:" in result.output
