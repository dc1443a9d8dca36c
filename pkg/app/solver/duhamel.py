# app/solver/duhamel.py
"""
Duhamel integrals of the mild formulation, per Fourier mode.

For a forcing X(s) and lambda = |xi|^2 the two integrals carried are
    I0(t) = int_0^t e^{-(t-s) lambda} X(s) ds
    I1(t) = int_0^t (t-s) e^{-(t-s) lambda} X(s) ds
and across a node interval [t, t+h] they update exactly:
    I0(t+h) = e^{-h lambda} I0(t) + Q0,   I1(t+h) = e^{-h lambda} (I1(t) + h I0(t)) + Q1,
where Q0, Q1 are the same integrals restricted to [t, t+h]. Q0, Q1 use composite
Gauss-Legendre panels graded toward the right end with ratio 2.

Sign convention: f = -div(u (x) u) and g = -div(theta u), so
    B(u, u)     = int e^{(t-s)Delta} P f
    Btilde      = int e^{(t-s)Delta} g
    E(u, theta) = int (t-s) e^{(t-s)Delta} P(g e3)
    L(theta)    = int e^{(t-s)Delta} P(theta e3)
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from app.kernels.quadrature import composite_rule
from app.solver.state import FieldHistory, check_coverage
from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.spectral.operators import (
    leray_coeffs,
    momentum_flux_coeffs,
    scalar_flux_coeffs,
    vertical_leray_coeffs,
)
from app.utils.errors import PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeQuadrature:
    nodes_per_panel: int = 6
    finest_panel: float = 0.02
    panel_subdivisions: int = 1

    def __post_init__(self):
        if self.nodes_per_panel < 1 or self.panel_subdivisions < 1 or not self.finest_panel > 0:
            raise PreconditionError("time quadrature needs positive node count, subdivisions and panel width")

    def edges(self, a: float, b: float) -> np.ndarray:
        """Panel edges on [a, b]: widths d, d, 2d, 4d, ... measured back from b."""
        h = b - a
        if h <= 0:
            raise PreconditionError(f"empty quadrature interval [{a}, {b}]")
        d = min(self.finest_panel, h)
        back = [0.0, d]
        while back[-1] < h:
            back.append(min(2.0 * back[-1], h))
        back[-1] = h
        coarse = np.array([b - x for x in reversed(back)])
        if self.panel_subdivisions == 1:
            return coarse
        fine = [np.linspace(lo, hi, self.panel_subdivisions + 1)[:-1] for lo, hi in zip(coarse[:-1], coarse[1:])]
        return np.concatenate(fine + [[b]])

    def rule(self, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
        return composite_rule(self.edges(a, b), self.nodes_per_panel)


class DuhamelAccumulator:
    """Carries I0 (and optionally I1) of one forcing across node intervals."""

    def __init__(self, grid: Grid, shape: Tuple[int, ...], first_moment: bool = False):
        self.grid = grid
        self.i0 = np.zeros(shape, dtype=np.complex128)
        self.i1 = np.zeros(shape, dtype=np.complex128) if first_moment else None

    def propagate(self, h: float) -> None:
        decay = self.grid.heat_multiplier(h)
        if self.i1 is not None:
            self.i1 = decay * (self.i1 + h * self.i0)
        self.i0 = decay * self.i0

    def add(self, x: np.ndarray, tau: float, weight: float) -> None:
        """Add the quadrature contribution of X(s) at s = t_right - tau."""
        e = weight * self.grid.heat_multiplier(tau)
        self.i0 += e * x
        if self.i1 is not None:
            self.i1 += (tau * e) * x


def integration_nodes(history: FieldHistory, t: float, fallback: Sequence[float] = ()) -> List[float]:
    """Interval endpoints 0 = s_0 < ... < s_K = t following the history's nodes."""
    check_coverage(history, t)
    times = getattr(history, "times", None)
    base = list(times) if times is not None else list(fallback)
    nodes = [0.0] + [s for s in base if 0.0 < s < t * (1.0 - 1e-14)] + [float(t)]
    return nodes


def sweep(grid: Grid, nodes: Sequence[float], quad: TimeQuadrature,
          forcing: Callable[[float], Dict[str, np.ndarray]],
          accumulators: Dict[str, DuhamelAccumulator]) -> None:
    """Advance every accumulator from nodes[0] to nodes[-1]."""
    for a, b in zip(nodes[:-1], nodes[1:]):
        for acc in accumulators.values():
            acc.propagate(b - a)
        s_nodes, weights = quad.rule(a, b)
        for s, w in zip(s_nodes, weights):
            values = forcing(float(s))
            for name, acc in accumulators.items():
                if name in values:
                    acc.add(values[name], b - s, w)


def _physical(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return grid.inverse(coeffs * grid.dealias_mask)


def duhamel_B(u: FieldHistory, v: FieldHistory, t: float, quad: TimeQuadrature = TimeQuadrature()) -> SpectralVector:
    """-int_0^t e^{(t-s)Delta} P div(u (x) v)(s) ds."""
    grid = u.state_at(0.0).grid
    acc = {"f": DuhamelAccumulator(grid, (3,) + grid.spectral_shape)}

    def forcing(s):
        a = _physical(grid, u.state_at(s).u.coeffs)
        b = a if v is u else _physical(grid, v.state_at(s).u.coeffs)
        return {"f": momentum_flux_coeffs(grid, a, b)}

    sweep(grid, integration_nodes(u, t) if getattr(u, "times", None) is not None else integration_nodes(v, t),
          quad, forcing, acc)
    return SpectralVector(grid, leray_coeffs(grid, acc["f"].i0), divergence_free=True)


def duhamel_L(theta: FieldHistory, t: float, quad: TimeQuadrature = TimeQuadrature()) -> SpectralVector:
    """int_0^t e^{(t-s)Delta} P(theta(s) e3) ds."""
    grid = theta.state_at(0.0).grid
    acc = {"theta": DuhamelAccumulator(grid, grid.spectral_shape)}
    sweep(grid, integration_nodes(theta, t), quad,
          lambda s: {"theta": theta.state_at(s).theta.coeffs}, acc)
    return SpectralVector(grid, vertical_leray_coeffs(grid, acc["theta"].i0), divergence_free=True)


def duhamel_E(u: FieldHistory, theta: FieldHistory, t: float, quad: TimeQuadrature = TimeQuadrature()) -> SpectralVector:
    """-int_0^t (t-s) e^{(t-s)Delta} P((div(theta u))(s) e3) ds."""
    grid = u.state_at(0.0).grid
    acc = {"g": DuhamelAccumulator(grid, grid.spectral_shape, first_moment=True)}

    def forcing(s):
        uu = _physical(grid, u.state_at(s).u.coeffs)
        th = _physical(grid, theta.state_at(s).theta.coeffs)
        return {"g": scalar_flux_coeffs(grid, th, uu)}

    sweep(grid, integration_nodes(theta, t) if getattr(theta, "times", None) is not None else integration_nodes(u, t),
          quad, forcing, acc)
    return SpectralVector(grid, vertical_leray_coeffs(grid, acc["g"].i1), divergence_free=True)


def duhamel_Btilde(theta: FieldHistory, u: FieldHistory, t: float, quad: TimeQuadrature = TimeQuadrature()) -> SpectralScalar:
    """-int_0^t e^{(t-s)Delta} div(theta u)(s) ds."""
    grid = u.state_at(0.0).grid
    acc = {"g": DuhamelAccumulator(grid, grid.spectral_shape)}

    def forcing(s):
        uu = _physical(grid, u.state_at(s).u.coeffs)
        th = _physical(grid, theta.state_at(s).theta.coeffs)
        return {"g": scalar_flux_coeffs(grid, th, uu)}

    sweep(grid, integration_nodes(theta, t) if getattr(theta, "times", None) is not None else integration_nodes(u, t),
          quad, forcing, acc)
    return SpectralScalar(grid, acc["g"].i0)
