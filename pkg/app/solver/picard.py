# app/solver/picard.py
"""
Picard iteration for the mild formulation on a fixed time grid.

Two fixed-point maps are supported:
  new_b4:    u = U + B(u, u) + E(u, theta),   theta = Theta + Btilde(theta, u)
  classical: u = e^{t Delta} u0 + B(u, u) + L(theta),   theta = Theta + Btilde(theta, u)
with U = e^{t Delta} u0 + t e^{t Delta} P(theta0 e3) and Theta = e^{t Delta} theta0.
Both start from (U, Theta). One sweep over the node intervals evaluates every
Duhamel term at every node; the previous iterate is sampled between nodes by
Trajectory.state_at.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np

from app.diagnostics.norms import x_norm_coeffs, y_norm_coeffs
from app.solver.duhamel import DuhamelAccumulator, TimeQuadrature, sweep
from app.solver.state import FieldHistory, LinearFlow, State, Trajectory, config_hash
from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.spectral.operators import leray_coeffs, nonlinear_coeffs, vertical_leray_coeffs
from app.utils.errors import (
    ConvergenceError,
    NonContractionError,
    PreconditionError,
    SolverBlowupError,
)

logger = logging.getLogger(__name__)

FORMULAS = ("new_b4", "classical")


@dataclass(frozen=True)
class PicardConfig:
    times: Tuple[float, ...]
    formula: str = "new_b4"
    nodes_per_panel: int = 6
    finest_panel: float = 0.02
    panel_subdivisions: int = 1
    tolerance: float = 1e-10
    max_iterations: int = 40
    nonlinear: bool = True
    buoyancy: bool = True
    non_contraction_streak: int = 3

    def __post_init__(self):
        if self.formula not in FORMULAS:
            raise PreconditionError(f"formula must be one of {FORMULAS}, got {self.formula!r}")
        ts = tuple(float(t) for t in self.times)
        if not ts or any(t < 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
            raise PreconditionError("time grid must be non-empty, non-negative and strictly increasing")
        object.__setattr__(self, "times", ts)
        if not self.tolerance > 0 or self.max_iterations < 1:
            raise PreconditionError("tolerance must be positive and max_iterations at least 1")
        # validates the panel parameters
        self.quadrature

    @property
    def quadrature(self) -> TimeQuadrature:
        return TimeQuadrature(self.nodes_per_panel, self.finest_panel, self.panel_subdivisions)

    @property
    def node_times(self) -> List[float]:
        return [0.0] + [t for t in self.times if t > 0.0]

    def as_dict(self) -> Dict:
        out = asdict(self)
        out["times"] = list(self.times)
        return out


# ------------------------------------------------------------ sweep helpers
def _accumulators(grid: Grid, formula: str, nonlinear: bool, buoyancy: bool) -> Dict[str, DuhamelAccumulator]:
    accs: Dict[str, DuhamelAccumulator] = {}
    if nonlinear:
        accs["f"] = DuhamelAccumulator(grid, (3,) + grid.spectral_shape)
        accs["g"] = DuhamelAccumulator(grid, grid.spectral_shape,
                                       first_moment=(formula == "new_b4" and buoyancy))
    if formula == "classical" and buoyancy:
        accs["theta"] = DuhamelAccumulator(grid, grid.spectral_shape)
    return accs


def _sampler(history: FieldHistory, grid: Grid, accs: Dict[str, DuhamelAccumulator]):
    want_flux = "f" in accs

    def forcing(s: float) -> Dict[str, np.ndarray]:
        st = history.state_at(s)
        out: Dict[str, np.ndarray] = {}
        if want_flux:
            out["f"], out["g"] = nonlinear_coeffs(grid, st.u.coeffs, st.theta.coeffs)
        if "theta" in accs:
            out["theta"] = st.theta.coeffs
        return out

    return forcing


def _node_sweep(history: FieldHistory, grid: Grid, node_times: Sequence[float], quad: TimeQuadrature,
                accs: Dict[str, DuhamelAccumulator]) -> Iterator[int]:
    """Advance the accumulators interval by interval, yielding each node index reached."""
    forcing = _sampler(history, grid, accs)
    for m in range(1, len(node_times)):
        sweep(grid, node_times[m - 1:m + 1], quad, forcing, accs)
        yield m


def _assemble(grid: Grid, u0: SpectralVector, th0: SpectralScalar, t: float,
              accs: Dict[str, DuhamelAccumulator], formula: str, buoyancy: bool) -> State:
    decay = grid.heat_multiplier(t)
    u = u0.coeffs * decay
    th = th0.coeffs * decay
    if formula == "new_b4" and buoyancy:
        u = u + t * decay * vertical_leray_coeffs(grid, th0.coeffs)
    if "f" in accs:
        u = u + leray_coeffs(grid, accs["f"].i0)
        th = th + accs["g"].i0
        if accs["g"].i1 is not None:
            u = u + vertical_leray_coeffs(grid, accs["g"].i1)
    if "theta" in accs:
        u = u + vertical_leray_coeffs(grid, accs["theta"].i0)
    return State.from_coeffs(grid, u, th, t)


def _x_y(grid: Grid, states: Sequence[State], others: Sequence[State] = ()) -> float:
    """max_m ||u_m||_X + max_m ||theta_m||_Y, of the difference when others is given."""
    xs, ys = [0.0], [0.0]
    for m, st in enumerate(states):
        u, th = st.u.coeffs, st.theta.coeffs
        if others:
            u = u - others[m].u.coeffs
            th = th - others[m].theta.coeffs
        xs.append(x_norm_coeffs(grid, u, st.t).value)
        ys.append(y_norm_coeffs(grid, th, st.t).value)
    return max(xs) + max(ys)


def _ratio(current: float, previous: float) -> float:
    if previous > 0:
        return current / previous
    return 0.0 if current == 0 else math.inf


# ------------------------------------------------------------ public API
def picard_solve(u0: SpectralVector, theta0: SpectralScalar, config: PicardConfig) -> Trajectory:
    """
    Fixed point of the selected formula on config's time grid.

    Converges when the X/Y difference of successive iterates is at most
    tolerance times the X/Y norm of the newest one. Raises NonContractionError
    after non_contraction_streak consecutive ratios >= 1 and ConvergenceError
    when max_iterations is exhausted.
    """
    u0.check_divergence_free()
    if u0.grid != theta0.grid:
        raise PreconditionError("initial velocity and temperature live on different grids")
    grid = u0.grid
    times = config.node_times
    quad = config.quadrature
    chash = config_hash({"config": config.as_dict(), "n": grid.n, "length": grid.length})

    previous: FieldHistory = LinearFlow(u0, theta0, buoyancy=config.buoyancy, times=times)
    prev_states = [previous.state_at(t) for t in times]
    differences: List[float] = []
    ratios: List[float] = []
    streak = 0
    logger.info("picard: formula=%s nodes=%d t_max=%g nonlinear=%s buoyancy=%s",
                config.formula, len(times), times[-1], config.nonlinear, config.buoyancy)

    for k in range(1, config.max_iterations + 1):
        accs = _accumulators(grid, config.formula, config.nonlinear, config.buoyancy)
        states = [State(u0, theta0, 0.0)]
        for m in _node_sweep(previous, grid, times, quad, accs):
            st = _assemble(grid, u0, theta0, times[m], accs, config.formula, config.buoyancy)
            if not st.is_finite():
                raise SolverBlowupError(f"non-finite iterate {k} at t={times[m]}", states[-1])
            states.append(st)

        diff = _x_y(grid, states, prev_states)
        scale = _x_y(grid, states)
        differences.append(diff)
        if k > 1:
            ratios.append(_ratio(diff, differences[-2]))
            streak = streak + 1 if ratios[-1] >= 1.0 else 0
        logger.info("picard iteration %d: difference=%.3e relative=%.3e ratio=%s", k, diff,
                    diff / scale if scale > 0 else 0.0, f"{ratios[-1]:.3f}" if ratios else "-")
        if streak >= config.non_contraction_streak:
            raise NonContractionError(
                f"successive differences grew for {streak} iterations (ratios {ratios[-streak:]}); "
                "data too large for the contraction regime", differences)
        if diff <= config.tolerance * scale:
            provenance = {
                "solver": "picard",
                "formula": config.formula,
                "config_hash": chash,
                "iterations": k,
                "differences": differences,
                "ratios": ratios,
                "nonlinear": config.nonlinear,
                "buoyancy": config.buoyancy,
            }
            return Trajectory(states, provenance)
        prev_states = states
        previous = Trajectory(states, {"nonlinear": config.nonlinear, "buoyancy": config.buoyancy})

    raise ConvergenceError(
        f"no convergence to {config.tolerance:g} in {config.max_iterations} iterations", differences)


@dataclass
class BilinearConstants:
    u_norm: float
    theta_norm: float
    b: float
    e: float
    btilde: float
    raw: Dict[str, float] = field(default_factory=dict)


def bilinear_constants(trajectory: Trajectory, quad: Union[TimeQuadrature, None] = None) -> BilinearConstants:
    """
    Observed ratios ||B(u,u)||_X / ||u||_X^2, ||E(u,theta)||_X / (||u||_X ||theta||_Y)
    and ||Btilde(theta,u)||_Y / (||u||_X ||theta||_Y), sup over the trajectory nodes.
    """
    quad = quad or TimeQuadrature()
    grid = trajectory.grid
    times = trajectory.times
    if times[0] != 0.0:
        raise PreconditionError("bilinear constants need a trajectory starting at t = 0")
    accs = {
        "f": DuhamelAccumulator(grid, (3,) + grid.spectral_shape),
        "g": DuhamelAccumulator(grid, grid.spectral_shape, first_moment=True),
    }
    nb, ne, nbt = [0.0], [0.0], [0.0]
    for m in _node_sweep(trajectory, grid, times, quad, accs):
        t = times[m]
        nb.append(x_norm_coeffs(grid, leray_coeffs(grid, accs["f"].i0), t).value)
        ne.append(x_norm_coeffs(grid, vertical_leray_coeffs(grid, accs["g"].i1), t).value)
        nbt.append(y_norm_coeffs(grid, accs["g"].i0, t).value)

    xu = max(x_norm_coeffs(grid, st.u.coeffs, st.t).value for st in trajectory.states)
    yth = max(y_norm_coeffs(grid, st.theta.coeffs, st.t).value for st in trajectory.states)
    raw = {"B": max(nb), "E": max(ne), "Btilde": max(nbt)}
    out = BilinearConstants(xu, yth, _ratio(raw["B"], xu * xu), _ratio(raw["E"], xu * yth),
                            _ratio(raw["Btilde"], xu * yth), raw)
    logger.info("bilinear constants: B=%.3e E=%.3e Btilde=%.3e (|u|_X=%.3e |theta|_Y=%.3e)",
                out.b, out.e, out.btilde, xu, yth)
    return out
