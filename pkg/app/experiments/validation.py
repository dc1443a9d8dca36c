# app/experiments/validation.py
import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import yaml
from pydantic import ValidationError

from app.diagnostics.bounds import bound_rate
from app.diagnostics.exponents import predicted_exponent
from app.diagnostics.fitting import MIN_WINDOW_RATIO
from app.diagnostics.moments import moments
from app.diagnostics.norms import NormSpec
from app.models.schemas import ExperimentConfig
from app.solver.initial_data import TEMPERATURE_FAMILIES, VELOCITY_FAMILIES, build_temperature
from app.spectral.grid import Grid
from app.utils.errors import BoussinesqError, PreconditionError

logger = logging.getLogger(__name__)

FITTED_KINDS = ("linear-decay", "nonlinear-decay", "weighted-decay")


def _issue(code: str, field: str, message: str, severity: str = "E") -> Dict[str, Any]:
    return {"code": code, "field": field, "severity": severity, "message": message}


def _power_of_two(n: int) -> bool:
    return n >= 4 and (n & (n - 1)) == 0


def _required_times(config: ExperimentConfig) -> List[Tuple[str, float]]:
    """Times the run will solve to beyond the configured grid."""
    d = config.diagnostics
    if config.kind == "profile":
        return [("diagnostics.profile.t", d.profile.t)]
    if config.kind == "formula-equivalence":
        return [("diagnostics.equivalence.compare_time", d.equivalence.compare_time)]
    if config.kind == "scaling-invariance" and d.scaling.lam > 0:
        return [("diagnostics.scaling.times", d.scaling.lam ** 2 * t) for t in d.scaling.times]
    return []


def validate(config: ExperimentConfig) -> List[Dict[str, Any]]:
    """All constraint violations of a parsed config; empty iff the run would start. Never raises."""
    issues: List[Dict[str, Any]] = []
    n, length = config.grid.n, config.grid.length
    d = config.diagnostics

    if not _power_of_two(n):
        issues.append(_issue("GRID_SIZE", "grid.n", f"N={n} is not a power of two >= 4"))
    if not (length > 0 and math.isfinite(length)):
        issues.append(_issue("BOX_LENGTH", "grid.length", f"box length L={length} must be positive"))

    tg = config.time_grid
    horizon = length ** 2 / 64.0
    if tg.t_first >= tg.t_max:
        issues.append(_issue("TIME_GRID", "time_grid", f"t_first={tg.t_first:g} must be below t_max={tg.t_max:g}"))
    checked = [("time_grid.t_max", tg.t_max)]
    if config.kind != "kernel-validation" and config.kind != "interpolation-check":
        checked += _required_times(config)
        for field, t in checked:
            if t > horizon * (1.0 + 1e-12):
                issues.append(_issue("BOX_HORIZON", field,
                                     f"box-horizon rule violated: t={t:g} exceeds L^2/64={horizon:g}"))

    if config.kind in FITTED_KINDS:
        t1, t2 = config.window()
        if not (0 < t1 < t2):
            issues.append(_issue("FIT_WINDOW", "fit_window", f"fit window [{t1:g}, {t2:g}] must satisfy 0 < t1 < t2"))
        else:
            if t1 < tg.t_first * (1.0 - 1e-12) or t2 > tg.t_max * (1.0 + 1e-12):
                issues.append(_issue("FIT_WINDOW", "fit_window",
                                     f"fit window [{t1:g}, {t2:g}] lies outside the time grid "
                                     f"[{tg.t_first:g}, {tg.t_max:g}]"))
            if t2 / t1 < MIN_WINDOW_RATIO * (1.0 - 1e-12):
                issues.append(_issue("FIT_WINDOW", "fit_window",
                                     f"fit window [{t1:g}, {t2:g}] spans less than half a decade"))

    temp, vel = config.initial_data.temperature, config.initial_data.velocity
    if temp.family not in TEMPERATURE_FAMILIES:
        issues.append(_issue("UNKNOWN_FAMILY", "initial_data.temperature.family",
                             f"unknown temperature family {temp.family!r}; expected one of {sorted(TEMPERATURE_FAMILIES)}"))
    if vel.family not in VELOCITY_FAMILIES:
        issues.append(_issue("UNKNOWN_FAMILY", "initial_data.velocity.family",
                             f"unknown velocity family {vel.family!r}; expected one of {sorted(VELOCITY_FAMILIES)}"))
    if config.kind == "linear-decay" and temp.family != "gaussian":
        issues.append(_issue("LINEAR_FAMILY", "initial_data.temperature.family",
                             "linear-decay compares against the gaussian closed form; family must be 'gaussian'"))

    for i, m in enumerate(d.norms):
        try:
            predicted_exponent(NormSpec(m.quantity, m.a, m.b, m.p))
        except PreconditionError as e:
            issues.append(_issue("NORM_SPEC", f"diagnostics.norms[{i}]", str(e)))
    for i, b in enumerate(d.bounds):
        try:
            bound_rate(b.space, b.q, b.exponent)
        except PreconditionError as e:
            issues.append(_issue("BOUND_ORDER", f"diagnostics.bounds[{i}]", str(e)))

    if config.kind == "profile":
        issues.extend(_profile_issues(config))
    if config.kind == "scaling-invariance" and not d.scaling.lam > 0:
        issues.append(_issue("SCALING_FACTOR", "diagnostics.scaling.lam", f"lambda={d.scaling.lam:g} must be positive"))
    if config.kind == "interpolation-check" and not d.interpolation.alpha > 0.5:
        issues.append(_issue("ALPHA_RANGE", "diagnostics.interpolation.alpha",
                             f"alpha={d.interpolation.alpha:g} must exceed 1/2"))
    if config.kind == "kernel-validation":
        k = d.kernel
        if not k.alpha > 0.5:
            issues.append(_issue("ALPHA_RANGE", "diagnostics.kernel.alpha", f"alpha={k.alpha:g} must exceed 1/2"))
        elif k.alpha != 1.0 and any(name in ("K", "F") for name in k.kernels):
            issues.append(_issue("ALPHA_RANGE", "diagnostics.kernel.kernels",
                                 "the Oseen kernels K and F exist only for alpha = 1"))
        if len(k.norm_times) >= 2 and max(k.norm_times) / min(k.norm_times) < MIN_WINDOW_RATIO:
            issues.append(_issue("FIT_WINDOW", "diagnostics.kernel.norm_times",
                                 "kernel norm times span less than half a decade"))
    if config.kind == "bilinear-bounds":
        for i, size in enumerate(d.bilinear.grid_sizes):
            if not _power_of_two(size):
                issues.append(_issue("GRID_SIZE", f"diagnostics.bilinear.grid_sizes[{i}]",
                                     f"N={size} is not a power of two >= 4"))
    return issues


def _profile_issues(config: ExperimentConfig) -> List[Dict[str, Any]]:
    spec = config.diagnostics.profile
    out = []
    if not spec.kappas or any(k <= 0 for k in spec.kappas):
        out.append(_issue("PROFILE_REGION", "diagnostics.profile.kappas", "kappas must be a non-empty list of positives"))
    tilde = [v for v in spec.variants if v.startswith("Rt")]
    if not tilde:
        return out
    temp = config.initial_data.temperature
    try:
        theta0 = build_temperature(Grid(config.grid.n, config.grid.length), temp.family, temp.amplitude, temp.width)
    except BoussinesqError:
        # grid or family problems are reported by their own rules
        return out
    mom = moments(theta0)
    if not mom.mass_is_zero():
        out.append(_issue("MOMENT_PRECONDITION", "diagnostics.profile.variants",
                          f"variants {tilde} need zero temperature mass, got m0={mom.m0:.3e}"))
    return out


def _schema_issues(err: ValidationError) -> List[Dict[str, Any]]:
    return [_issue("SCHEMA", ".".join(str(p) for p in e["loc"]) or "<root>", e["msg"]) for e in err.errors()]


def parse_config(document: Any) -> Tuple[Optional[ExperimentConfig], List[Dict[str, Any]]]:
    """Config and its violations from a parsed YAML document; config is None when the schema rejects it."""
    if document is None:
        document = {}
    if not isinstance(document, dict):
        return None, [_issue("SCHEMA", "<root>", "config must be a mapping")]
    try:
        config = ExperimentConfig.model_validate(document)
    except ValidationError as e:
        return None, _schema_issues(e)
    return config, validate(config)


def load_config(path: str) -> Tuple[Optional[ExperimentConfig], List[Dict[str, Any]]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = yaml.safe_load(fh)
    except OSError as e:
        return None, [_issue("READ", "<file>", f"cannot read {path}: {e}")]
    except yaml.YAMLError as e:
        return None, [_issue("PARSE", "<file>", f"{path} is not valid YAML: {e}")]
    config, issues = parse_config(document)
    logger.debug("validated %s: %d issue(s)", path, len(issues))
    return config, issues
