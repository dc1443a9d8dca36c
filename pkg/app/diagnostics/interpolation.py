# app/diagnostics/interpolation.py
"""
Empirical check of the fractional interpolation inequality

    sup_{t/2<=tau<=t} ||grad u(tau)||_p
        <= C (sup_{t/4<=tau<=t} ||u||_p)^{1/(2 alpha)} (sup_{t/4<=tau<=t} tau ||f||_p)^{1-1/(2 alpha)}
         + C t^{-1/(2 alpha)} sup_{t/4<=tau<=t} ||u||_p,

f = u_t + (-Delta)^alpha u. The observed C(t) = LHS / RHS is sampled over a
family of flows and judged by the max/median criterion.

Two flow families:
  GridFlow    scalar flow on the box, per mode u = m u0 + (1 - m)/|xi|^{2 alpha} F
              with m = e^{-tau |xi|^{2 alpha}} and a steady forcing F
  RadialFlow  whole-space flow of a gaussian, profile by Fourier-Bessel quadrature
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.special import spherical_jn

from app.diagnostics.fitting import bound_stability
from app.diagnostics.norms import derivative_magnitude
from app.kernels.quadrature import composite_rule, radial_integral
from app.spectral.fields import SpectralScalar
from app.spectral.grid import Grid
from app.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

INCONSISTENT = "inconsistent"
DEFAULT_SAMPLES = 13


def _check_alpha(alpha: float) -> None:
    if not alpha > 0.5:
        raise PreconditionError(f"interpolation check needs alpha > 1/2, got {alpha}")


def _lp(values: np.ndarray, weights, p: float) -> float:
    a = np.abs(values)
    if math.isinf(p):
        return float(np.max(a)) if a.size else 0.0
    return float(np.sum(weights * a ** p)) ** (1.0 / p)


class FlowFamily(Protocol):
    def norms(self, tau: float, p: float) -> Tuple[float, float, float]:
        """(||u||_p, ||grad u||_p, ||f||_p) at time tau."""
        ...


class GridFlow:
    def __init__(self, grid: Grid, alpha: float, u0: SpectralScalar, forcing: Optional[SpectralScalar] = None):
        _check_alpha(alpha)
        self.grid = grid
        self.alpha = alpha
        self.u0 = u0
        self.forcing = forcing
        self._lam = grid.xi2 ** alpha

    def coeffs(self, tau: float) -> np.ndarray:
        m = np.exp(-tau * self._lam)
        u = m * self.u0.coeffs
        if self.forcing is not None:
            phi = np.where(self._lam > 0, -np.expm1(-tau * self._lam) / np.where(self._lam > 0, self._lam, 1.0), tau)
            u = u + phi * self.forcing.coeffs
        return u

    def norms(self, tau: float, p: float) -> Tuple[float, float, float]:
        dv = self.grid.cell_volume
        field_ = SpectralScalar(self.grid, self.coeffs(tau))
        u_p = _lp(field_.physical(), dv, p)
        g_p = _lp(derivative_magnitude(field_, 1), dv, p)
        f_p = _lp(self.forcing.physical(), dv, p) if self.forcing is not None else 0.0
        return u_p, g_p, f_p


class RadialFlow:
    """Gaussian of unit mass and the given width evolved by e^{-tau (-Delta)^alpha} on R^3."""

    def __init__(self, alpha: float, width: float = 1.0, panels: int = 64, n: int = 16):
        _check_alpha(alpha)
        if not width > 0:
            raise PreconditionError(f"width must be positive, got {width}")
        self.alpha = alpha
        self.width = width
        self.panels = panels
        self.n = n

    def profile(self, tau: float, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(u(r), u_r(r)) at time tau."""
        w2 = self.width ** 2
        upper = math.sqrt(2.0 * math.log(1e16) / w2)
        panels = max(8, int(math.ceil(upper * float(np.max(r)) / math.pi)) + 8)
        grade = 0 if self.alpha == 1.0 else 16

        def integrand(rho):
            decay = np.exp(-0.5 * w2 * rho * rho - tau * rho ** (2.0 * self.alpha))
            z = np.outer(rho, r)
            return np.stack([(decay * rho ** 2)[:, None] * spherical_jn(0, z),
                             -(decay * rho ** 3)[:, None] * spherical_jn(1, z)], axis=-1)

        val, _ = radial_integral(integrand, upper, panels=panels, grade_levels=grade, tol=1e-11)
        val = val / (2.0 * math.pi ** 2)
        return val[:, 0], val[:, 1]

    def norms(self, tau: float, p: float) -> Tuple[float, float, float]:
        reach = 40.0 * (self.width + tau ** (1.0 / (2.0 * self.alpha)))
        r, w = composite_rule(np.linspace(0.0, reach, self.panels + 1), self.n)
        r = np.concatenate([[0.0], r])
        w = np.concatenate([[0.0], w])
        u, ur = self.profile(tau, r)
        shell = 4.0 * math.pi * w * r * r
        return _lp(u, shell, p), _lp(ur, shell, p), 0.0


@dataclass
class InterpolationReport:
    alpha: float
    p: float
    times: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    max_ratio: float = 0.0
    spread: float = 0.0
    passed: bool = False
    flags: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict:
        return {"alpha": self.alpha, "p": self.p, "times": self.times, "ratios": self.ratios,
                "max_ratio": self.max_ratio, "spread": self.spread, "pass": self.passed, "flags": self.flags}


def interpolation_ratio(flow: FlowFamily, alpha: float, p: float, t: float,
                        samples: int = DEFAULT_SAMPLES) -> Tuple[float, str]:
    taus = np.linspace(t / 4.0, t, samples)
    rows = [flow.norms(float(tau), p) for tau in taus]
    lhs = max(g for tau, (_, g, _) in zip(taus, rows) if tau >= t / 2.0 * (1.0 - 1e-12))
    u_sup = max(u for u, _, _ in rows)
    f_sup = max(tau * f for tau, (_, _, f) in zip(taus, rows))
    k = 1.0 / (2.0 * alpha)
    rhs = u_sup ** k * f_sup ** (1.0 - k) + t ** (-k) * u_sup
    if rhs > 0:
        return lhs / rhs, ""
    if lhs == 0:
        return 0.0, ""
    logger.warning("interpolation check at t=%g: right-hand side vanishes with ||grad u|| = %.3e", t, lhs)
    return math.inf, INCONSISTENT


def interpolation_check(alpha: float, p: float, flow: FlowFamily, times: Sequence[float],
                        samples: int = DEFAULT_SAMPLES) -> InterpolationReport:
    _check_alpha(alpha)
    if not p >= 1:
        raise PreconditionError(f"order p must lie in [1, inf], got {p}")
    ratios, flags = [], []
    for t in times:
        ratio, flag = interpolation_ratio(flow, alpha, p, float(t), samples)
        ratios.append(ratio)
        if flag:
            flags.append(flag)
    stab = bound_stability(ratios)
    report = InterpolationReport(alpha, p, [float(t) for t in times], ratios, stab.maximum, stab.ratio,
                                 stab.stable and not flags, sorted(set(flags)))
    logger.info("interpolation alpha=%g p=%g: max ratio %.3e spread %.2f pass=%s", alpha, p,
                report.max_ratio, report.spread, report.passed)
    return report


def grid_flow_family(grid: Grid, alpha: float, u0: SpectralScalar,
                     forcing: Optional[SpectralScalar] = None) -> GridFlow:
    return GridFlow(grid, alpha, u0, forcing)


def radial_flow_family(alpha: float, width: float = 1.0) -> RadialFlow:
    return RadialFlow(alpha, width)
