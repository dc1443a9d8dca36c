# app/experiments/decay.py
"""
Decay experiments.

linear-decay     heat flow of a gaussian temperature on the grid against its
                 closed form, exponents of || |x|^a theta(t) ||_2
nonlinear-decay  small-data solver run, configured norms fitted against the
                 predicted exponents; optional L^q and pressure bounds
weighted-decay   the weighted (a, b, p) table for u, theta and omega plus the
                 vorticity-versus-velocity gap
"""
import logging
from fractions import Fraction
from typing import Any, Dict, List

from app.diagnostics.bounds import lp_bound_check, pressure_bound_check
from app.diagnostics.exponents import DecayAssumptions
from app.diagnostics.fitting import bound_stability
from app.diagnostics.gaussian import heat_flow_lp, heat_flow_weighted_l2
from app.diagnostics.moments import moments
from app.diagnostics.norms import NormSpec, scaling_invariant_norms, weighted_norm
from app.experiments._common import (
    check,
    decay_assumptions,
    finish,
    fit_report,
    initial_data,
    make_grid,
    measure_trajectory,
    measurement_row,
    norm_spec,
    solve,
    solve_times,
)
from app.models.schemas import ExperimentConfig
from app.spectral.fields import SpectralScalar

logger = logging.getLogger(__name__)

# heat flow of integrable data: theta ~ t^{-3/4} in L^2
HEAT_FLOW = DecayAssumptions(Fraction(-1, 4), Fraction(3, 4))
LINEAR_WEIGHTS = (0.0, 1.0, 2.0)
WEIGHTED_TABLE = ((0.0, 0, 2.0), (1.0, 0, 2.0), (0.0, 1, 2.0), (2.0, 1, 2.0))


def run_linear_decay(config: ExperimentConfig) -> Dict[str, Any]:
    grid = make_grid(config)
    data = config.initial_data.temperature
    fit_cfg = config.diagnostics.fit
    _, theta0 = initial_data(config, grid)
    mass, width = data.amplitude, data.width
    specs = [NormSpec("theta", a, 0, 2.0) for a in LINEAR_WEIGHTS]

    rows: List[Dict[str, Any]] = []
    worst = 0.0
    closed: List[Dict[str, Any]] = []
    for t in config.time_grid.times():
        theta = SpectralScalar(grid, theta0.coeffs * grid.heat_multiplier(t))
        for spec in specs:
            m = weighted_norm(theta, spec)
            exact = heat_flow_lp(mass, width, t, 2.0) if spec.a == 0 else heat_flow_weighted_l2(mass, width, t, spec.a)
            rel = abs(m.value - exact) / exact if exact > 0 else abs(m.value)
            worst = max(worst, rel)
            rows.append(measurement_row(t, spec, m.value, m.flag))
            closed.append({"t": t, "a": spec.a, "grid": m.value, "closed_form": exact, "relative_error": rel})

    shift = 0.5 * width * width if fit_cfg.shift_time else 0.0
    anchor = "claim:linear-heat-decay"
    fits = [fit_report(rows, spec, config.window(), HEAT_FLOW, fit_cfg.slope_margin, fit_cfg.min_r2, anchor,
                       time_shift=shift, tolerance=fit_cfg.slope_tolerance) for spec in specs]
    checks = [check("closed-form-match", worst, fit_cfg.closed_form_tolerance,
                    worst <= fit_cfg.closed_form_tolerance, "claim:linear-heat-decay")]
    logger.info("linear decay: worst closed-form error %.3e, time shift %g", worst, shift)
    return finish(config.kind, anchor, checks, fits, rows, closed_form=closed, time_shift=shift)


def _bound_checks(config: ExperimentConfig, trajectory) -> List[Dict[str, Any]]:
    out = []
    for b in config.diagnostics.bounds:
        rep = lp_bound_check(trajectory, b.space, b.q, b.exponent)
        out.append(check(f"lq-bound:{b.space}:q={b.q:g}", rep.max_ratio, rep.spread, rep.passed,
                         "claim:lq-bounds-from-membership", report=rep.as_dict()))
    if config.diagnostics.pressure:
        ratios = [pressure_bound_check(st).ratio for st in trajectory.states if st.t > 0]
        stab = bound_stability(ratios)
        out.append(check("pressure-bound", stab.maximum, stab.ratio, stab.stable,
                         "claim:pressure-gradient-bound", ratios=ratios))
    return out


def _decay_run(config: ExperimentConfig, specs: List[NormSpec], anchor: str):
    grid = make_grid(config)
    u0, theta0 = initial_data(config, grid)
    assumptions = decay_assumptions(config, theta0)
    trajectory = solve(config, u0, theta0, solve_times(config))
    rows = measure_trajectory(trajectory, specs)
    fit_cfg = config.diagnostics.fit
    fits = [fit_report(rows, spec, config.window(), assumptions, fit_cfg.slope_margin, fit_cfg.min_r2, anchor)
            for spec in specs]
    xs, ys = zip(*(scaling_invariant_norms(st) for st in trajectory.states))
    extra = {
        "moments": moments(theta0).as_dict(),
        "assumptions": {"gamma": str(assumptions.gamma), "mu": str(assumptions.mu), "flag": assumptions.flag},
        "x_norm": max(m.value for m in xs),
        "y_norm": max(m.value for m in ys),
        "solver": {k: v for k, v in trajectory.provenance.items() if k not in ("differences", "ratios")},
    }
    return trajectory, rows, fits, extra


def _dedupe(specs: List[NormSpec]) -> List[NormSpec]:
    seen, out = set(), []
    for s in specs:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def run_nonlinear_decay(config: ExperimentConfig) -> Dict[str, Any]:
    specs = _dedupe([norm_spec(m) for m in config.diagnostics.norms])
    anchor = "claim:small-data-decay-rates"
    trajectory, rows, fits, extra = _decay_run(config, specs, anchor)
    checks = _bound_checks(config, trajectory)
    return finish(config.kind, anchor, checks, fits, rows, **extra)


def run_weighted_decay(config: ExperimentConfig) -> Dict[str, Any]:
    table = [NormSpec(q, a, b, p) for q in ("u", "theta", "omega") for a, b, p in WEIGHTED_TABLE]
    specs = _dedupe(table + [norm_spec(m) for m in config.diagnostics.norms])
    anchor = "claim:weighted-decay-estimates"
    trajectory, rows, fits, extra = _decay_run(config, specs, anchor)

    slope = {f["spec"]["label"]: f["slope"] for f in fits}
    u_l2 = slope[NormSpec("u").label()]
    w_l2 = slope[NormSpec("omega").label()]
    gap = config.diagnostics.fit.vorticity_gap
    checks = [check("vorticity-gap", w_l2 - u_l2, -gap, w_l2 <= u_l2 - gap, "claim:vorticity-decays-faster")]
    checks += _bound_checks(config, trajectory)
    return finish(config.kind, anchor, checks, fits, rows, **extra)
