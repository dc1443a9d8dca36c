# app/solver/timestepper.py
"""
Integrating-factor Heun (RK2) time stepper in Fourier space.

With E = e^{-dt |xi|^2} and N(u, theta) = (P(f + theta e3), g):
    k1 = N(y_n)
    y* = E (y_n + dt k1),  k2 = N(y*)
    y_{n+1} = E (y_n + dt/2 k1) + dt/2 k2
Products are dealiased by the 2/3 rule and the velocity stays Leray-projected.
For the linear buoyancy coupling alone the scheme reproduces
e^{t Delta} u0 + t e^{t Delta} P(theta0 e3) exactly.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.solver.state import State, Trajectory, config_hash
from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.spectral.operators import leray_coeffs, nonlinear_coeffs, vertical_leray_coeffs
from app.utils.errors import PreconditionError, SolverBlowupError

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.5


def _rhs(grid: Grid, u: np.ndarray, th: np.ndarray, nonlinear: bool, buoyancy: bool) -> Tuple[np.ndarray, np.ndarray]:
    du = np.zeros_like(u)
    dth = np.zeros_like(th)
    if nonlinear:
        f, g = nonlinear_coeffs(grid, u, th)
        du = du + leray_coeffs(grid, f)
        dth = dth + g
    if buoyancy:
        du = du + vertical_leray_coeffs(grid, th)
    return du, dth


def _step(grid: Grid, u: np.ndarray, th: np.ndarray, dt: float, decay: np.ndarray,
          nonlinear: bool, buoyancy: bool) -> Tuple[np.ndarray, np.ndarray]:
    k1u, k1t = _rhs(grid, u, th, nonlinear, buoyancy)
    us = decay * (u + dt * k1u)
    ts = decay * (th + dt * k1t)
    k2u, k2t = _rhs(grid, us, ts, nonlinear, buoyancy)
    half = 0.5 * dt
    return decay * (u + half * k1u) + half * k2u, decay * (th + half * k1t) + half * k2t


def _cfl_number(grid: Grid, u: np.ndarray, dt: float) -> float:
    speed = float(np.max(np.abs(grid.inverse(u))))
    return speed * dt / grid.dx


def timestep_solve(u0: SpectralVector, theta0: SpectralScalar, dt: float, t_max: float,
                   output_times: Optional[Sequence[float]] = None, *, nonlinear: bool = True,
                   buoyancy: bool = True, cfl: float = DEFAULT_CFL) -> Trajectory:
    """
    March from t = 0 to t_max and keep the states at output_times (default: t_max).

    Each gap between output times is split into equal steps no longer than dt,
    so every output time is hit exactly. Steps whose CFL number exceeds cfl are
    logged; a non-finite state raises SolverBlowupError with the last good state.
    """
    u0.check_divergence_free()
    if u0.grid != theta0.grid:
        raise PreconditionError("initial velocity and temperature live on different grids")
    if not (dt > 0 and t_max > 0):
        raise PreconditionError(f"dt and t_max must be positive, got dt={dt}, t_max={t_max}")
    grid = u0.grid
    outs = sorted({float(t) for t in (output_times or [t_max]) if 0.0 < t <= t_max} | {float(t_max)})

    u = u0.coeffs.copy()
    th = theta0.coeffs.copy()
    states: List[State] = [State(u0, theta0, 0.0)]
    t = 0.0
    steps = 0
    warned = False
    for target in outs:
        count = max(1, math.ceil((target - t) / dt - 1e-9))
        h = (target - t) / count
        decay = grid.heat_multiplier(h)
        for i in range(count):
            if nonlinear and not warned:
                c = _cfl_number(grid, u, h)
                if c > cfl:
                    logger.warning("CFL number %.3f exceeds %.3f at t=%g (dt=%g)", c, cfl, t, h)
                    warned = True
            u_new, th_new = _step(grid, u, th, h, decay, nonlinear, buoyancy)
            if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(th_new))):
                last = State.from_coeffs(grid, u, th, t)
                raise SolverBlowupError(f"non-finite state after step {steps + 1} at t={t + h:g}", last)
            u, th = u_new, th_new
            t = t + h if i < count - 1 else target
            steps += 1
        states.append(State.from_coeffs(grid, u, th, target))
        logger.debug("timestepper reached t=%g after %d steps", target, steps)

    provenance = {
        "solver": "timestep",
        "formula": "if-heun",
        "config_hash": config_hash({"dt": dt, "t_max": t_max, "outputs": outs, "n": grid.n,
                                    "length": grid.length, "nonlinear": nonlinear, "buoyancy": buoyancy}),
        "steps": steps,
        "nonlinear": nonlinear,
        "buoyancy": buoyancy,
    }
    logger.info("timestepper: %d steps to t=%g", steps, t_max)
    return Trajectory(states, provenance)
