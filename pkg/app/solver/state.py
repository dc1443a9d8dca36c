# app/solver/state.py
"""
State, Trajectory and the field-history protocol the Duhamel integrals read.

A Trajectory stores states only at its time nodes. Between nodes it is
reconstructed per mode from the nearest earlier node t_i by propagating the
linear part exactly and holding the node's nonlinear forcing (f_i, g_i) fixed;
with tau = s - t_i and lambda = |xi|^2:

    theta(s) = a0 theta_i + a1 g_i
    u(s)     = a0 u_i + a1 P f_i + tau a0 P(theta_i e3) + a2 P(g_i e3)

a0 = e^{-tau lambda}, a1 = tau phi1(tau lambda), a2 = tau^2 phi2(tau lambda),
phi1(z) = (1 - e^{-z})/z, phi2(z) = (1 - e^{-z}(1 + z))/z^2. With the
forcing switched off this is the exact linear flow.
"""
import bisect
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from app.spectral.fields import DIVERGENCE_TOL, SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.spectral.operators import leray_coeffs, nonlinear_coeffs, vertical_leray_coeffs
from app.utils.errors import InsufficientCoverageError, PreconditionError

_SERIES_Z = 1e-4


def phi1(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    small = z < _SERIES_Z
    zz = np.where(small, 1.0, z)
    return np.where(small, 1.0 - z / 2.0 + z * z / 6.0, -np.expm1(-zz) / zz)


def phi2(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    small = z < 1e-3
    zz = np.where(small, 1.0, z)
    series = 0.5 - z / 3.0 + z * z / 8.0 - z ** 3 / 30.0
    return np.where(small, series, (-np.expm1(-zz) - zz * np.exp(-zz)) / (zz * zz))


@dataclass(frozen=True)
class State:
    u: SpectralVector
    theta: SpectralScalar
    t: float

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def zero(cls, grid: Grid, t: float = 0.0) -> "State":
        return cls(SpectralVector.zeros(grid, divergence_free=True), SpectralScalar.zeros(grid), t)

    @classmethod
    def from_coeffs(cls, grid: Grid, u: np.ndarray, theta: np.ndarray, t: float) -> "State":
        return cls(SpectralVector(grid, u, divergence_free=True), SpectralScalar(grid, theta), float(t))

    def is_finite(self) -> bool:
        return self.u.is_finite() and self.theta.is_finite()

    def check_invariants(self, tol: float = DIVERGENCE_TOL) -> None:
        if self.t < 0:
            raise PreconditionError(f"state time must be >= 0, got {self.t}")
        if not self.is_finite():
            raise PreconditionError(f"state at t={self.t} has non-finite coefficients")
        if self.u.grid != self.theta.grid:
            raise PreconditionError("velocity and temperature live on different grids")
        self.u.check_divergence_free(tol)


class FieldHistory(Protocol):
    """Anything the Duhamel integrals can sample: node times plus state_at(s)."""

    times: Optional[Sequence[float]]

    def state_at(self, s: float) -> State: ...


def check_coverage(history: FieldHistory, t: float) -> None:
    times = getattr(history, "times", None)
    if times is None:
        return
    if len(times) == 0 or times[0] > 0.0 or times[-1] < t * (1.0 - 1e-14):
        span = (times[0], times[-1]) if len(times) else ()
        raise InsufficientCoverageError(f"history covers {span}, integral needs [0, {t}]")


@dataclass
class FrozenHistory:
    """The same fields at every time; times only fixes the quadrature nodes."""

    state: State
    times: Sequence[float]

    def state_at(self, s: float) -> State:
        return State(self.state.u, self.state.theta, float(s))


@dataclass
class LinearFlow:
    """Exact solution of the linearised system: heat flow plus buoyancy."""

    u0: SpectralVector
    theta0: SpectralScalar
    buoyancy: bool = True
    times: Optional[Sequence[float]] = None

    def state_at(self, s: float) -> State:
        grid = self.u0.grid
        decay = grid.heat_multiplier(s)
        u = self.u0.coeffs * decay
        if self.buoyancy:
            u = u + s * decay * vertical_leray_coeffs(grid, self.theta0.coeffs)
        return State.from_coeffs(grid, u, self.theta0.coeffs * decay, s)


def reconstruct_coeffs(grid: Grid, u_i: np.ndarray, th_i: np.ndarray, f_i: Optional[np.ndarray],
                       g_i: Optional[np.ndarray], tau: float, buoyancy: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Propagate node values by tau with frozen forcing (see module docstring)."""
    z = tau * grid.xi2
    a0 = np.exp(-z)
    th = a0 * th_i
    u = a0 * u_i
    if buoyancy:
        u = u + tau * a0 * vertical_leray_coeffs(grid, th_i)
    if g_i is not None:
        a1 = tau * phi1(z)
        th = th + a1 * g_i
        if f_i is not None:
            u = u + a1 * leray_coeffs(grid, f_i)
        if buoyancy:
            u = u + tau * tau * phi2(z) * vertical_leray_coeffs(grid, g_i)
    return u, th


@dataclass
class Trajectory:
    """Ordered states at strictly increasing node times, plus provenance."""

    states: List[State]
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.states:
            raise PreconditionError("a trajectory needs at least one state")
        ts = [s.t for s in self.states]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise PreconditionError("trajectory times must be strictly increasing")
        self._forcing_cache: Dict[int, Tuple[Optional[np.ndarray], Optional[np.ndarray]]] = {}

    @property
    def times(self) -> List[float]:
        return [s.t for s in self.states]

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    @property
    def nonlinear(self) -> bool:
        return bool(self.provenance.get("nonlinear", True))

    @property
    def buoyancy(self) -> bool:
        return bool(self.provenance.get("buoyancy", True))

    def node_index(self, t: float) -> int:
        ts = self.times
        i = bisect.bisect_left(ts, t)
        for j in (i, i - 1):
            if 0 <= j < len(ts) and abs(ts[j] - t) <= 1e-12 * max(1.0, abs(t)):
                return j
        raise PreconditionError(f"t={t} is not a node of this trajectory")

    def _forcing(self, i: int):
        if i not in self._forcing_cache:
            if not self.nonlinear:
                self._forcing_cache = {i: (None, None)}
            else:
                st = self.states[i]
                f, g = nonlinear_coeffs(self.grid, st.u.coeffs, st.theta.coeffs)
                # one node in memory at a time; callers sweep forward in s
                self._forcing_cache = {i: (f, g)}
        return self._forcing_cache[i]

    def state_at(self, s: float) -> State:
        ts = self.times
        if s < ts[0] or s > ts[-1] + 1e-12 * max(1.0, ts[-1]):
            raise InsufficientCoverageError(f"s={s} outside trajectory span [{ts[0]}, {ts[-1]}]")
        i = bisect.bisect_right(ts, s) - 1
        i = min(max(i, 0), len(ts) - 1)
        node = self.states[i]
        tau = s - node.t
        if tau <= 0.0:
            return node
        f, g = self._forcing(i)
        u, th = reconstruct_coeffs(self.grid, node.u.coeffs, node.theta.coeffs, f, g, tau, self.buoyancy)
        return State.from_coeffs(self.grid, u, th, s)

    def final(self) -> State:
        return self.states[-1]


def config_hash(payload: Dict[str, Any]) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]
