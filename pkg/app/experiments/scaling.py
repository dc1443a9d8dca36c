# app/experiments/scaling.py
import logging
from typing import Any, Dict, List

from app.diagnostics.norms import NormSpec, lp_norm, scaling_invariant_norms
from app.experiments._common import check, finish, initial_data, make_grid, measurement_row, solve, solve_times
from app.models.schemas import ExperimentConfig
from app.solver.scaling import scaling_transform

logger = logging.getLogger(__name__)

SUP_U = NormSpec("u", 0.0, 0, float("inf"))


def _relative(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def run_scaling_invariance(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Compare ||u_lam(t)||_inf with lam ||u(lam^2 t)||_inf and the X/Y norms of the
    two runs at the configured times.
    """
    spec = config.diagnostics.scaling
    lam = spec.lam
    grid = make_grid(config)
    u0, theta0 = initial_data(config, grid)
    original_times = [lam * lam * t for t in spec.times]
    original = solve(config, u0, theta0, solve_times(config, original_times))

    su0, stheta0 = scaling_transform(u0, theta0, lam)
    scaled = solve(config, su0, stheta0, sorted(spec.times))

    rows: List[Dict[str, Any]] = []
    worst_sup, worst_x = 0.0, 0.0
    pairs = []
    for t, t_orig in zip(spec.times, original_times):
        a = scaled.states[scaled.node_index(t)]
        b = original.states[original.node_index(t_orig)]
        sup_scaled = lp_norm(a.u, float("inf"))
        sup_expected = lam * lp_norm(b.u, float("inf"))
        xa, ya = scaling_invariant_norms(a)
        xb, yb = scaling_invariant_norms(b)
        err_sup = _relative(sup_scaled, sup_expected)
        err_x = max(_relative(xa.value, xb.value), _relative(ya.value, yb.value))
        worst_sup, worst_x = max(worst_sup, err_sup), max(worst_x, err_x)
        rows.append(measurement_row(t, SUP_U, sup_scaled))
        pairs.append({"t": t, "t_original": t_orig, "sup_scaled": sup_scaled, "sup_expected": sup_expected,
                      "x_scaled": xa.value, "x_original": xb.value, "y_scaled": ya.value, "y_original": yb.value})
        logger.info("scaling lam=%g t=%g: sup error %.3e, X/Y error %.3e", lam, t, err_sup, err_x)

    anchor = "claim:scaling-symmetry"
    checks = [
        check("sup-norm-scaling", worst_sup, spec.tolerance, worst_sup <= spec.tolerance, anchor),
        check("xy-norm-invariance", worst_x, spec.tolerance, worst_x <= spec.tolerance, anchor),
    ]
    return finish(config.kind, anchor, checks, rows=rows, lam=lam, pairs=pairs)
