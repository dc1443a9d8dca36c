# tests/test_validation.py
import glob
import os

import pytest

from app.experiments.registry import EXPERIMENTS
from app.experiments.validation import load_config, parse_config, validate
from app.models.schemas import EXPERIMENT_KINDS, ExperimentConfig, parse_length

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _codes(issues):
    return [i["code"] for i in issues]


def test_default_config_is_valid():
    assert validate(ExperimentConfig()) == []


def test_registry_covers_every_kind():
    assert tuple(EXPERIMENTS) == EXPERIMENT_KINDS


@pytest.mark.parametrize("text,expected", [("40pi", 125.66370614359172), ("40*pi", 125.66370614359172),
                                           ("pi", 3.141592653589793), ("12.5", 12.5), (8, 8.0)])
def test_parse_length(text, expected):
    assert parse_length(text) == pytest.approx(expected)


def test_grid_size_must_be_power_of_two():
    config, issues = parse_config({"grid": {"n": 100}})
    assert config is not None
    assert _codes(issues) == ["GRID_SIZE"]
    assert issues[0]["field"] == "grid.n"
    assert issues[0]["severity"] == "E"


def test_box_horizon_rule():
    config, issues = parse_config({"grid": {"n": 32, "length": 40}, "time_grid": {"t_max": 30.0},
                                   "fit_window": [1.0, 20.0]})
    assert "BOX_HORIZON" in _codes(issues)
    msg = next(i["message"] for i in issues if i["code"] == "BOX_HORIZON")
    assert "L^2/64=25" in msg


def test_box_horizon_covers_required_times():
    _, issues = parse_config({"kind": "profile", "grid": {"n": 32, "length": 16},
                              "time_grid": {"t_first": 0.25, "t_max": 2.0},
                              "diagnostics": {"profile": {"t": 8.0}}})
    fields = [i["field"] for i in issues if i["code"] == "BOX_HORIZON"]
    assert fields == ["diagnostics.profile.t"]


def test_kernel_kinds_ignore_the_box_horizon():
    _, issues = parse_config({"kind": "kernel-validation", "grid": {"n": 16, "length": 8},
                              "time_grid": {"t_first": 0.25, "t_max": 20.0}})
    assert issues == []


def test_fit_window_must_span_half_a_decade():
    _, issues = parse_config({"fit_window": [2.0, 5.0]})
    assert _codes(issues) == ["FIT_WINDOW"]


def test_fit_window_must_lie_inside_time_grid():
    _, issues = parse_config({"fit_window": [0.1, 10.0]})
    assert _codes(issues) == ["FIT_WINDOW"]


def test_unknown_family_and_linear_family():
    _, issues = parse_config({"initial_data": {"temperature": {"family": "plasma"}}})
    assert set(_codes(issues)) == {"UNKNOWN_FAMILY", "LINEAR_FAMILY"}


def test_norm_spec_and_bound_order_rules():
    _, issues = parse_config({"kind": "nonlinear-decay",
                              "diagnostics": {"norms": [{"quantity": "u", "a": 3.0, "p": 2}],
                                              "bounds": [{"space": "X", "q": 2}]}})
    assert set(_codes(issues)) == {"NORM_SPEC", "BOUND_ORDER"}


def test_tilde_profile_needs_zero_mass():
    _, issues = parse_config({"kind": "profile", "time_grid": {"t_max": 8.0},
                              "diagnostics": {"profile": {"variants": ["R1", "Rt1"]}}})
    assert _codes(issues) == ["MOMENT_PRECONDITION"]
    _, ok = parse_config({"kind": "profile", "time_grid": {"t_max": 8.0},
                          "initial_data": {"temperature": {"family": "dipole"}},
                          "diagnostics": {"profile": {"variants": ["Rt1"]}}})
    assert ok == []


def test_alpha_range_and_oseen_kernels():
    _, issues = parse_config({"kind": "interpolation-check", "diagnostics": {"interpolation": {"alpha": 0.5}}})
    assert _codes(issues) == ["ALPHA_RANGE"]
    _, issues = parse_config({"kind": "kernel-validation", "diagnostics": {"kernel": {"alpha": 0.75}}})
    assert _codes(issues) == ["ALPHA_RANGE"]


def test_schema_errors_reject_the_document():
    config, issues = parse_config({"grid": {"n": 32, "colour": "red"}})
    assert config is None
    assert _codes(issues) == ["SCHEMA"]
    assert issues[0]["field"] == "grid.colour"
    config, issues = parse_config([1, 2, 3])
    assert config is None and _codes(issues) == ["SCHEMA"]


def test_load_config_reports_unreadable_and_malformed_files(tmp_path):
    _, issues = load_config(str(tmp_path / "missing.yaml"))
    assert _codes(issues) == ["READ"]
    bad = tmp_path / "bad.yaml"
    bad.write_text("grid: [unclosed\n", encoding="utf-8")
    _, issues = load_config(str(bad))
    assert _codes(issues) == ["PARSE"]


@pytest.mark.parametrize("path", sorted(glob.glob(os.path.join(ROOT, "configs", "*.yaml"))))
def test_shipped_configs_are_valid(path):
    config, issues = load_config(path)
    assert config is not None
    assert issues == []
    assert os.path.splitext(os.path.basename(path))[0] == config.kind


def test_weighted_decay_config_uses_canonical_rates():
    from app.diagnostics.exponents import CANONICAL, assumptions_for_mass
    from app.diagnostics.moments import moments
    from app.experiments._common import decay_assumptions, initial_data, make_grid

    config, issues = load_config(os.path.join(ROOT, "configs", "weighted-decay.yaml"))
    assert issues == []
    _, theta0 = initial_data(config, make_grid(config))
    mom = moments(theta0)
    assert mom.mass_is_zero()
    assert config.diagnostics.fit.assumptions == "canonical"
    assert decay_assumptions(config, theta0) == CANONICAL
    # the data would select the canonical rates on their own as well
    assert assumptions_for_mass(mom.m0, mom.absolute_mass) == CANONICAL
