# app/experiments/equivalence.py
import logging
from typing import Any, Dict

from app.experiments._common import check, finish, initial_data, make_grid, relative_l2, solve, solve_times
from app.models.schemas import ExperimentConfig

logger = logging.getLogger(__name__)

# gaps below this are round-off; their ratio says nothing about quadrature order
ROUNDOFF_GAP = 1e-13


def run_formula_equivalence(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Both Picard formulas at the configured panel subdivision and at twice it,
    compared at compare_time; optionally cross-checked against the time-stepper.
    """
    spec = config.diagnostics.equivalence
    grid = make_grid(config)
    u0, theta0 = initial_data(config, grid)
    t = spec.compare_time
    times = solve_times(config, [t])
    base = config.solver.panel_subdivisions

    gaps = {}
    finals = {}
    for subdivisions in (base, 2 * base):
        states = {}
        for formula in ("new_b4", "classical"):
            traj = solve(config, u0, theta0, times, method="picard", formula=formula,
                         panel_subdivisions=subdivisions)
            states[formula] = traj.states[traj.node_index(t)]
        gaps[subdivisions] = relative_l2(grid, states["classical"], states["new_b4"])
        finals[subdivisions] = states["new_b4"]
        logger.info("formula gap at t=%g with %d subdivisions: %.3e", t, subdivisions, gaps[subdivisions])

    coarse, fine = gaps[base], gaps[2 * base]
    limit = 5.0 * config.quadrature_tol
    anchor = "claim:formula-equivalence"
    checks = [check("formula-gap", coarse, limit, coarse <= limit, anchor)]
    if coarse > ROUNDOFF_GAP:
        shrink = coarse / fine if fine > 0 else float("inf")
        checks.append(check("gap-shrink-on-refinement", shrink, spec.min_shrink, shrink >= spec.min_shrink, anchor))

    result: Dict[str, Any] = {"compare_time": t, "gaps": {str(k): v for k, v in gaps.items()}}
    if spec.cross_check:
        stepped = solve(config, u0, theta0, times, method="timestep")
        cross = relative_l2(grid, stepped.states[stepped.node_index(t)], finals[2 * base])
        result["cross_gap"] = cross
        checks.append(check("picard-timestep-agreement", cross, spec.cross_tolerance,
                            cross <= spec.cross_tolerance, "claim:picard-timestep-agreement"))
    return finish(config.kind, anchor, checks, **result)
