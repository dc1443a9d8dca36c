# app/experiments/_common.py
import logging
import math
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from app.diagnostics.exponents import (
    CANONICAL,
    DecayAssumptions,
    assumptions_for_mass,
    predicted_exponent,
    range_flag,
)
from app.diagnostics.fitting import DecaySeries, fit_decay_exponent
from app.diagnostics.moments import moments
from app.diagnostics.norms import NormSpec, weighted_norm
from app.models.schemas import ExperimentConfig, FieldSpec, NormSpecModel
from app.solver.initial_data import build_temperature, build_velocity
from app.solver.picard import PicardConfig, picard_solve
from app.solver.state import Trajectory
from app.solver.timestepper import timestep_solve
from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.spectral.operators import curl

logger = logging.getLogger(__name__)


def ensure_report(experiment: str, resp: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """Ensure the experiment report contains the canonical top-level keys."""
    if resp is None:
        resp = {}
    resp.setdefault("experiment", experiment)
    resp.setdefault("status", "fail")
    if "result" not in resp and "data" in resp:
        resp["result"] = resp.pop("data")
    resp.setdefault("result", {})
    resp.setdefault("anchor", None)
    resp.setdefault("score", float(resp.get("score", 0.0) or 0.0))
    resp.setdefault("errors", [])
    resp.setdefault("timestamp", datetime.now(timezone.utc).isoformat())
    return resp


def check(name: str, value: float, threshold: float, passed: bool, anchor: str, **extra) -> Dict[str, Any]:
    out = {"name": name, "value": value, "threshold": threshold, "pass": bool(passed), "anchor": anchor}
    out.update(extra)
    return out


def finish(experiment: str, anchor: str, checks: List[Dict[str, Any]], fits: Sequence[Dict[str, Any]] = (),
           rows: Sequence[Dict[str, Any]] = (), **result) -> Dict[str, Any]:
    """Envelope with status pass iff every check and fit passed; score is the passing fraction."""
    verdicts = [c["pass"] for c in checks] + [f["pass"] for f in fits]
    passed = all(verdicts)
    score = sum(verdicts) / len(verdicts) if verdicts else 1.0
    errors = [c["name"] for c in checks if not c["pass"]] + [f["spec"]["label"] for f in fits if not f["pass"]]
    result.update({"checks": checks, "fits": list(fits), "measurements": list(rows)})
    return ensure_report(experiment, {
        "status": "pass" if passed else "fail",
        "anchor": anchor,
        "score": score,
        "errors": [f"failed: {e}" for e in errors],
        "result": result,
    })


# ------------------------------------------------------------ data and solves
def make_grid(config: ExperimentConfig, n: Optional[int] = None) -> Grid:
    return Grid(int(n or config.grid.n), float(config.grid.length))


def temperature_data(grid: Grid, spec: FieldSpec) -> SpectralScalar:
    return build_temperature(grid, spec.family, spec.amplitude, spec.width)


def velocity_data(grid: Grid, spec: FieldSpec) -> SpectralVector:
    return build_velocity(grid, spec.family, spec.amplitude, spec.width)


def initial_data(config: ExperimentConfig, grid: Grid,
                 temperature: Optional[FieldSpec] = None) -> Tuple[SpectralVector, SpectralScalar]:
    data = config.initial_data
    return velocity_data(grid, data.velocity), temperature_data(grid, temperature or data.temperature)


def solve_times(config: ExperimentConfig, extra: Iterable[float] = ()) -> List[float]:
    """Configured time grid merged with extra required times, deduplicated to 1e-12."""
    out: List[float] = []
    for t in sorted(set(config.time_grid.times()) | {float(t) for t in extra}):
        if not out or t - out[-1] > 1e-12 * max(1.0, t):
            out.append(t)
    return out


def solve(config: ExperimentConfig, u0: SpectralVector, theta0: SpectralScalar, times: Sequence[float],
          **overrides) -> Trajectory:
    """Run the configured solver; overrides replace SolverSpec fields for this run."""
    s = config.solver.model_copy(update=overrides)
    if s.method == "timestep":
        return timestep_solve(u0, theta0, s.dt, max(times), times, nonlinear=s.nonlinear,
                              buoyancy=s.buoyancy, cfl=s.cfl)
    pc = PicardConfig(tuple(times), s.formula, s.nodes_per_panel, s.finest_panel, s.panel_subdivisions,
                      s.tolerance, s.max_iterations, s.nonlinear, s.buoyancy)
    return picard_solve(u0, theta0, pc)


def decay_assumptions(config: ExperimentConfig, theta0: SpectralScalar) -> DecayAssumptions:
    if config.diagnostics.fit.assumptions == "canonical":
        return CANONICAL
    mom = moments(theta0)
    return assumptions_for_mass(mom.m0, mom.absolute_mass)


# ------------------------------------------------------------ measurements
def norm_spec(m: NormSpecModel) -> NormSpec:
    return NormSpec(m.quantity, m.a, m.b, m.p)


def measurement_row(t: float, spec: NormSpec, value: float, flag: str = "") -> Dict[str, Any]:
    return {"t": t, "quantity": spec.quantity, "a": spec.a, "b": spec.b, "p": spec.p,
            "value": value, "flag": flag}


def measure_trajectory(trajectory: Trajectory, specs: Sequence[NormSpec]) -> List[Dict[str, Any]]:
    """One CSV row per (node with t > 0, spec)."""
    rows = []
    for st in trajectory.states:
        if st.t <= 0:
            continue
        omega = curl(st.u) if any(s.quantity == "omega" for s in specs) else None
        for spec in specs:
            fld = {"u": st.u, "theta": st.theta, "omega": omega}[spec.quantity]
            m = weighted_norm(fld, spec)
            flags = [f for f in (m.flag, range_flag(spec)) if f]
            rows.append(measurement_row(st.t, spec, m.value, ",".join(flags)))
    return rows


def series_from_rows(rows: Sequence[Dict[str, Any]], spec: NormSpec) -> Tuple[DecaySeries, List[str]]:
    picked = [r for r in rows if (r["quantity"], r["a"], r["b"], r["p"]) == (spec.quantity, spec.a, spec.b, spec.p)]
    flags = sorted({f for r in picked for f in str(r["flag"]).split(",") if f})
    return DecaySeries(spec.label(), [r["t"] for r in picked], [r["value"] for r in picked]), flags


def fit_report(rows: Sequence[Dict[str, Any]], spec: NormSpec, window: Tuple[float, float],
               assumptions: DecayAssumptions, margin: float, min_r2: float, anchor: str,
               time_shift: float = 0.0, tolerance: Optional[float] = None) -> Dict[str, Any]:
    """
    Fit report {spec, window, slope, r2, predicted, pass, anchor}.

    With tolerance set the slope must match the prediction to within it;
    otherwise it must not exceed predicted + margin.
    """
    series, flags = series_from_rows(rows, spec)
    predicted = float(predicted_exponent(spec, assumptions))
    fit = fit_decay_exponent(series, window, shift=time_shift)
    if tolerance is not None:
        ok = abs(fit.slope - predicted) <= tolerance
    else:
        ok = fit.slope <= predicted + margin
    ok = ok and fit.r2 >= min_r2
    if assumptions.flag:
        flags.append(assumptions.flag)
    report = {
        "spec": dict(spec.as_dict(), label=spec.label()),
        "window": list(window),
        "slope": fit.slope,
        "r2": fit.r2,
        "predicted": predicted,
        "pass": bool(ok),
        "anchor": anchor,
        "flags": flags,
        "points": fit.points,
    }
    logger.info("fit %s: slope=%.4f predicted=%.4f r2=%.4f pass=%s", spec.label(), fit.slope, predicted,
                fit.r2, report["pass"])
    return report


def relative_l2(grid: Grid, a, b) -> float:
    """sqrt(|du|^2 + |dtheta|^2) / sqrt(|u|^2 + |theta|^2) between two states."""
    num = grid.l2_from_coeffs(a.u.coeffs - b.u.coeffs) ** 2 + grid.l2_from_coeffs(a.theta.coeffs - b.theta.coeffs) ** 2
    den = grid.l2_from_coeffs(b.u.coeffs) ** 2 + grid.l2_from_coeffs(b.theta.coeffs) ** 2
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return math.sqrt(num / den)


