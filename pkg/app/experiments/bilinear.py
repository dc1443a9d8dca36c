# app/experiments/bilinear.py
import logging
from typing import Any, Dict, List

from app.diagnostics.fitting import bound_stability
from app.experiments._common import check, finish, make_grid, solve, solve_times, temperature_data, velocity_data
from app.models.schemas import ExperimentConfig
from app.solver.duhamel import TimeQuadrature
from app.solver.picard import bilinear_constants

logger = logging.getLogger(__name__)


def run_bilinear_bounds(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Observed bilinear constants over an amplitude x grid-size sweep. Amplitudes
    scale the configured initial data; each of B, E and Btilde must stay within
    max/median <= 10 across the sweep.
    """
    spec = config.diagnostics.bilinear
    s = config.solver
    quad = TimeQuadrature(s.nodes_per_panel, s.finest_panel, s.panel_subdivisions)
    data = config.initial_data
    times = solve_times(config)

    samples: List[Dict[str, Any]] = []
    for n in spec.grid_sizes:
        grid = make_grid(config, n)
        for amp in spec.amplitudes:
            vel = data.velocity.model_copy(update={"amplitude": amp * data.velocity.amplitude})
            temp = data.temperature.model_copy(update={"amplitude": amp * data.temperature.amplitude})
            u0, theta0 = velocity_data(grid, vel), temperature_data(grid, temp)
            traj = solve(config, u0, theta0, times, method="picard")
            c = bilinear_constants(traj, quad)
            samples.append({"n": n, "amplitude": amp, "B": c.b, "E": c.e, "Btilde": c.btilde,
                            "u_norm": c.u_norm, "theta_norm": c.theta_norm, "raw": c.raw})
            logger.info("bilinear sample N=%d amplitude=%g: B=%.3e E=%.3e Btilde=%.3e", n, amp, c.b, c.e, c.btilde)

    anchor = "claim:bilinear-bounds"
    checks = []
    for key in ("B", "E", "Btilde"):
        stab = bound_stability([smp[key] for smp in samples])
        checks.append(check(f"{key}-constant-stable", stab.maximum, stab.ratio, stab.stable, anchor))
    return finish(config.kind, anchor, checks, samples=samples)
