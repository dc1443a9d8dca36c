# tests/test_cli.py
import json
import os

import pytest
import yaml

from app.experiments.registry import EXPERIMENTS, Experiment
from app.experiments.validation import parse_config
from app.main import main
from app.orchestrator import run_config
from app.storage.measurements import CSV_COLUMNS, read_measurements
from app.utils.errors import ConfigError, PreconditionError
from app.utils.status import combine_statuses, exit_code_for

LINEAR = {
    "kind": "linear-decay",
    "grid": {"n": 64, "length": "40pi"},
    "initial_data": {"temperature": {"family": "gaussian", "amplitude": 1.0, "width": 3.0}},
    "time_grid": {"kind": "geometric", "t_first": 0.25, "t_max": 10.0, "count": 12},
    "fit_window": [1.0, 10.0],
    "plots": True,
}

LARGE_DATA = {
    "kind": "nonlinear-decay",
    "grid": {"n": 16, "length": 8.0},
    "initial_data": {"velocity": {"family": "vortex", "amplitude": 50.0, "width": 1.0},
                     "temperature": {"family": "gaussian", "amplitude": 50.0, "width": 1.0}},
    "solver": {"max_iterations": 6},
    "time_grid": {"kind": "uniform", "t_first": 0.1, "t_max": 1.0, "count": 4},
    "fit_window": [0.1, 1.0],
}


def _write(tmp_path, name, document):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(document), encoding="utf-8")
    return str(path)


def test_statuses_map_to_exit_codes():
    assert [exit_code_for(s) for s in ("pass", "fail", "invalid", "solver_failure")] == [0, 1, 2, 3]
    assert combine_statuses([]) == "pass"
    assert combine_statuses(["pass", "solver_failure", "fail"]) == "solver_failure"
    assert combine_statuses(["solver_failure", "invalid"]) == "invalid"
    with pytest.raises(ValueError):
        exit_code_for("maybe")


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    for kind in ("linear-decay", "profile", "kernel-validation", "bilinear-bounds"):
        assert kind in out


def test_validate_exit_codes(tmp_path, capsys):
    good = _write(tmp_path, "good.yaml", LINEAR)
    assert main(["validate", good]) == 0
    bad = _write(tmp_path, "bad.yaml", dict(LINEAR, grid={"n": 100, "length": 40}))
    assert main(["validate", bad]) == 2
    assert "GRID_SIZE" in capsys.readouterr().out


def test_invalid_config_does_not_start_a_run(tmp_path):
    path = _write(tmp_path, "bad.yaml", dict(LINEAR, grid={"n": 100, "length": 40}))
    out_dir = tmp_path / "run"
    assert main(["run", path, "--output-dir", str(out_dir)]) == 2
    assert not out_dir.exists()


def test_linear_decay_run_writes_artifacts(tmp_path):
    path = _write(tmp_path, "linear.yaml", LINEAR)
    out_dir = tmp_path / "run"
    assert main(["run", path, "--output-dir", str(out_dir)]) == 0

    rows = read_measurements(str(out_dir / "measurements.csv"))
    assert len(rows) == 12 * 3
    assert list(rows[0]) == CSV_COLUMNS

    with open(out_dir / "fits.json", encoding="utf-8") as fh:
        fits = json.load(fh)["fits"]
    assert [f["predicted"] for f in fits] == [-0.75, -0.25, 0.25]
    assert all(f["pass"] and f["anchor"] == "claim:linear-heat-decay" for f in fits)

    with open(out_dir / "report.json", encoding="utf-8") as fh:
        report = json.load(fh)
    assert report["status"] == "pass"
    assert report["score"] == 1.0
    assert "measurements" not in report["result"]

    with open(out_dir / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    assert manifest["exit_code"] == 0
    assert manifest["seed"] == 0
    assert set(manifest["versions"]) >= {"package", "numpy", "scipy"}
    assert os.path.exists(out_dir / "plot_measurements.py")


def test_config_hash_is_stable(tmp_path):
    config, _ = parse_config(LINEAR)
    a = run_config(config, str(tmp_path / "a"))
    b = run_config(config, str(tmp_path / "b"))
    with open(tmp_path / "a" / "manifest.json", encoding="utf-8") as fa, \
            open(tmp_path / "b" / "manifest.json", encoding="utf-8") as fb:
        assert json.load(fa)["config_hash"] == json.load(fb)["config_hash"]
    assert a["status"] == b["status"] == "pass"


def test_large_data_is_a_solver_failure(tmp_path):
    config, issues = parse_config(LARGE_DATA)
    assert issues == []
    report = run_config(config, str(tmp_path / "run"))
    assert report["status"] == "solver_failure"
    assert report["exit_code"] == 3
    assert report["errors"]
    # no rows were measured, so no plot script
    assert read_measurements(str(tmp_path / "run" / "measurements.csv")) == []
    assert not os.path.exists(tmp_path / "run" / "plot_measurements.py")


def _raising(exc):
    def runner(config):
        raise exc
    return runner


@pytest.mark.parametrize("exc,status,code", [
    (PreconditionError("moment series did not converge"), "solver_failure", 3),
    (ConfigError("unsupported option"), "invalid", 2),
])
def test_runner_errors_map_to_statuses(tmp_path, monkeypatch, exc, status, code):
    monkeypatch.setitem(EXPERIMENTS, "linear-decay", Experiment(_raising(exc), "raises"))
    config, issues = parse_config(LINEAR)
    assert issues == []
    report = run_config(config, str(tmp_path / "run"))
    assert report["status"] == status
    assert report["exit_code"] == code
    assert report["errors"] == [str(exc)]
    with open(tmp_path / "run" / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    assert manifest["exit_code"] == code
    assert manifest["started_at"].endswith("+00:00")
