import json
import math

import pytest
from click.testing import CliRunner

from lyapcert.cli import main


def write_config(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def runner():
    return CliRunner()


def test_extremal_success(tmp_path, runner):
    cfg = write_config(tmp_path, "c.json", {
        "map": {"kind": "doubling"},
        "analysis": {"kind": "extremal", "base_resolution": 32},
        "seed": 0,
    })
    out = tmp_path / "out"
    result = runner.invoke(main, ["extremal", "--config", cfg, "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "ok"
    assert report["results"]["min_estimate"]["value"] == pytest.approx(math.log(2), abs=1e-12)
    assert (out / "refinement.csv").exists()


def test_certify_counterexample_exit_code(tmp_path, runner):
    cfg = write_config(tmp_path, "c.json", {
        "map": {"kind": "toral_endomorphism", "matrix": [[2, 1], [1, 1]]},
        "analysis": {"kind": "certify", "lambda": 0.1, "big_n": 10,
                     "base_samples": 8, "direction_samples": 8},
    })
    out = tmp_path / "out"
    result = runner.invoke(main, ["certify", "--config", cfg, "--out", str(out)])
    assert result.exit_code == 2
    report = json.loads((out / "report.json").read_text())
    assert report["results"]["certification"]["outcome"] == "counterexample"


def test_critical_point_exit_code(tmp_path, runner):
    cfg = write_config(tmp_path, "c.json", {
        "map": {"kind": "custom_polynomial", "coefficients": [0, 0, 1], "domain": [0.0, 1.0]},
        "analysis": {"kind": "orbit", "start": [0.0], "direction": [1.0], "steps": 3},
    })
    result = runner.invoke(main, ["orbit", "--config", cfg])
    assert result.exit_code == 3


def test_config_error_exit_code(tmp_path, runner):
    result = runner.invoke(main, ["orbit", "--config", str(tmp_path / "missing.json")])
    assert result.exit_code == 4
    bad = write_config(tmp_path, "bad.json", {
        "map": {"kind": "doubling"},
        "analysis": {"kind": "certify", "lambda": -1.0},
    })
    result = runner.invoke(main, ["certify", "--config", bad])
    assert result.exit_code == 4


def test_subcommand_analysis_mismatch(tmp_path, runner):
    cfg = write_config(tmp_path, "c.json", {
        "map": {"kind": "doubling"},
        "analysis": {"kind": "extremal"},
    })
    result = runner.invoke(main, ["certify", "--config", cfg])
    assert result.exit_code == 4


def test_flag_overrides(tmp_path, runner):
    cfg = write_config(tmp_path, "c.json", {
        "map": {"kind": "doubling"},
        "analysis": {"kind": "extremal", "base_resolution": 8},
    })
    out = tmp_path / "out"
    result = runner.invoke(main, [
        "extremal", "--config", cfg, "--out", str(out),
        "--resolution", "16", "--seed", "9",
    ])
    assert result.exit_code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["analysis"]["base_resolution"] == 16
    assert report["config"]["seed"] == 9


def test_lambda_and_big_n_overrides(tmp_path, runner):
    cfg = write_config(tmp_path, "c.json", {
        "map": {"kind": "doubling"},
        "analysis": {"kind": "certify", "lambda": 0.9, "big_n": 1,
                     "base_samples": 16, "direction_samples": 2},
    })
    out = tmp_path / "out"
    result = runner.invoke(main, [
        "certify", "--config", cfg, "--out", str(out),
        "--lambda", "0.6", "--big-n", "2",
    ])
    assert result.exit_code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["analysis"]["lambda"] == 0.6
    assert report["config"]["analysis"]["big_n"] == 2
    assert report["results"]["certification"]["margin"] == pytest.approx(
        math.log(2) - 0.6, abs=1e-12
    )


def test_stdout_report_without_out(tmp_path, runner):
    cfg = write_config(tmp_path, "c.json", {
        "map": {"kind": "doubling"},
        "analysis": {"kind": "orbit", "start": [0.25], "direction": [1.0], "steps": 4},
    })
    result = runner.invoke(main, ["orbit", "--config", cfg])
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["status"] == "ok"
