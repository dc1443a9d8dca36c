# app/diagnostics/profiles.py
"""
Far-field asymptotic profiles of the velocity.

Variants (u0, theta0 the initial data, m0 = int theta0, m1 = int y theta0):
  R1   u - e^{t Delta} u0 - t e^{t Delta} P(theta0 e3)
  R2   u - e^{t Delta} u0 - t K_{j3}(t, x) m0
  R3   u - e^{t Delta} u0 - t R_{j3}(x) m0
  Rt1  u - e^{t Delta} u0 + t sum_h F_{j;h,3}(t, x) m1_h
         + int_0^t (t-s) sum_h F_{j;h,3}(t-s, x) mu_h(s) ds,   mu_h(s) = int theta u_h (s)
  Rt2  Rt1 with F(t-s, x) replaced by its homogeneous part d_h R_{j3}(x)
The residual is reported as sup |R| |x|^3 / t (|x|^4 / t for the tilde
variants) over the far-field region kappa sqrt t <= |x| <= L/4. The tilde
variants need m0 = 0.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import stats

from app.diagnostics.moments import Moments, moments as compute_moments
from app.kernels.harmonic import harmonic_derivatives
from app.kernels.oseen import div_kernel_eval, oseen_eval
from app.solver.duhamel import TimeQuadrature
from app.solver.state import Trajectory
from app.spectral.fields import SpectralScalar
from app.spectral.grid import Grid
from app.spectral.operators import vertical_leray_coeffs
from app.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

VARIANTS = ("R1", "R2", "R3", "Rt1", "Rt2")
TILDE = ("Rt1", "Rt2")
E3 = 2


@dataclass
class ProfileResidual:
    variant: str
    t: float
    kappa: float
    ratio: float
    sup_residual: float
    points: int
    weight_power: int
    flag: str = ""

    def as_dict(self) -> Dict:
        return {"variant": self.variant, "t": self.t, "kappa": self.kappa, "ratio": self.ratio,
                "sup_residual": self.sup_residual, "points": self.points,
                "weight_power": self.weight_power, "flag": self.flag}


def far_field(grid: Grid, t: float, kappa: float) -> np.ndarray:
    r = grid.radius
    mask = (r >= kappa * np.sqrt(t)) & (r <= grid.length / 4.0)
    if not np.any(mask):
        raise PreconditionError(f"far-field region kappa sqrt(t) <= |x| <= L/4 is empty (kappa={kappa}, t={t})")
    return mask


def _box_products(grid: Grid, theta: np.ndarray, u: np.ndarray) -> np.ndarray:
    """mu_h = int theta u_h over the box, from coefficients (Parseval)."""
    w = grid.mode_weights
    return np.array([float(np.sum(w * np.real(theta * np.conj(u[h])))) for h in range(3)]) * grid.length ** 3


def _flux_history(trajectory: Trajectory, t: float, quad: TimeQuadrature) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quadrature nodes s in (0, t) with weights, and mu(s) at each node."""
    nodes = [0.0] + [s for s in trajectory.times if 0.0 < s < t] + [t]
    ss, ws, mus = [], [], []
    for a, b in zip(nodes[:-1], nodes[1:]):
        s_nodes, weights = quad.rule(a, b)
        for s, w in zip(s_nodes, weights):
            st = trajectory.state_at(float(s))
            ss.append(float(s))
            ws.append(float(w))
            mus.append(_box_products(trajectory.grid, st.theta.coeffs, st.u.coeffs))
    return np.asarray(ss), np.asarray(ws), np.asarray(mus)


def _linear_remainder(trajectory: Trajectory, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """(u(t) - e^{t Delta} u0, theta0 coefficients)."""
    i = trajectory.node_index(t)
    u0 = trajectory.states[0]
    if u0.t != 0.0:
        raise PreconditionError("profile residuals need a trajectory starting at t = 0")
    grid = trajectory.grid
    u = trajectory.states[i].u.coeffs - u0.u.coeffs * grid.heat_multiplier(t)
    return u, u0.theta.coeffs


def residual_field(trajectory: Trajectory, variant: str, t: float, kappa: float,
                   data_moments: Optional[Moments] = None,
                   quad: Optional[TimeQuadrature] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Residual vectors (M, 3) and radii (M,) on the far-field points."""
    if variant not in VARIANTS:
        raise PreconditionError(f"unknown profile variant {variant!r}; expected one of {VARIANTS}")
    grid = trajectory.grid
    base, th0 = _linear_remainder(trajectory, t)
    mask = far_field(grid, t, kappa)
    pts = grid.points(mask)
    r = np.linalg.norm(pts, axis=-1)

    if variant == "R1":
        coeffs = base - t * grid.heat_multiplier(t) * vertical_leray_coeffs(grid, th0)
        phys = grid.inverse(coeffs)
        return np.stack([c[mask] for c in phys], axis=-1), r

    mom = data_moments or compute_moments(SpectralScalar(grid, th0))
    phys = grid.inverse(base)
    res = np.stack([c[mask] for c in phys], axis=-1)

    if variant == "R2":
        return res - t * mom.m0 * oseen_eval(t, pts)[..., :, E3], r
    if variant == "R3":
        return res - t * mom.m0 * harmonic_derivatives(pts, 2)[..., :, E3], r

    if not mom.mass_is_zero():
        raise PreconditionError(f"variant {variant} needs int theta0 = 0, got m0={mom.m0:.3e}")
    quad = quad or TimeQuadrature()
    s, w, mu = _flux_history(trajectory, t, quad)
    if variant == "Rt1":
        res = res + t * np.einsum("mjh,h->mj", div_kernel_eval(t, pts)[..., :, :, E3], mom.m1)
        for s_k, w_k, mu_k in zip(s, w, mu):
            tau = t - s_k
            res = res + w_k * tau * np.einsum("mjh,h->mj", div_kernel_eval(tau, pts)[..., :, :, E3], mu_k)
        return res, r
    homogeneous = harmonic_derivatives(pts, 3)[..., :, :, E3]
    weighted_flux = np.sum((w * (t - s))[:, None] * mu, axis=0)
    res = res + np.einsum("mjh,h->mj", homogeneous, t * mom.m1 + weighted_flux)
    return res, r


def profile_residual(trajectory: Trajectory, variant: str, t: float, kappa: float,
                     data_moments: Optional[Moments] = None,
                     quad: Optional[TimeQuadrature] = None) -> ProfileResidual:
    res, r = residual_field(trajectory, variant, t, kappa, data_moments, quad)
    power = 4 if variant in TILDE else 3
    mag = np.linalg.norm(res, axis=-1)
    weighted = mag * r ** power / t
    out = ProfileResidual(variant, t, kappa, float(np.max(weighted)), float(np.max(mag)), int(r.size), power)
    logger.info("profile %s t=%g kappa=%g: ratio=%.4e over %d points", variant, t, kappa, out.ratio, out.points)
    return out


@dataclass
class BuoyancyProfile:
    order: int
    t: float
    kappa: float
    relative: float
    envelope_c: float
    envelope_b: float
    points: int

    def as_dict(self) -> Dict:
        return {"order": self.order, "t": self.t, "kappa": self.kappa, "relative": self.relative,
                "envelope_c": self.envelope_c, "envelope_b": self.envelope_b, "points": self.points}


def fit_power_envelope(r: np.ndarray, values: np.ndarray, t: float, bins: int = 12) -> Tuple[float, float]:
    """Fit |values| <= C t |x|^{-b}: slope of binned maxima in log-log, C lifted over all samples."""
    edges = np.geomspace(r.min(), r.max() * (1 + 1e-12), bins + 1)
    rs, vs = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (r >= lo) & (r < hi) & (values > 0)
        if np.any(sel):
            j = np.argmax(np.where(sel, values, -np.inf))
            rs.append(r[j])
            vs.append(values[j])
    if len(rs) < 2:
        raise PreconditionError("power envelope fit needs samples in at least two radial bins")
    fit = stats.linregress(np.log(rs), np.log(vs))
    b = -float(fit.slope)
    c = float(np.max(values * r ** b / t))
    return c, b


def buoyancy_profile_residual(grid: Grid, theta0: SpectralScalar, t: float, kappa: float,
                              order: int = 0, data_moments: Optional[Moments] = None) -> BuoyancyProfile:
    """
    Compare t e^{t Delta} P(theta0 e3) with its leading far-field term:
    t R_{j3}(x) m0 (order 0) or -t sum_h d_h R_{j3}(x) m1_h (order 1).
    """
    if order not in (0, 1):
        raise PreconditionError(f"profile order must be 0 or 1, got {order}")
    mom = data_moments or compute_moments(theta0)
    mask = far_field(grid, t, kappa)
    pts = grid.points(mask)
    r = np.linalg.norm(pts, axis=-1)
    field_ = grid.inverse(t * grid.heat_multiplier(t) * vertical_leray_coeffs(grid, theta0.coeffs))
    values = np.stack([c[mask] for c in field_], axis=-1)
    if order == 0:
        leading = t * mom.m0 * harmonic_derivatives(pts, 2)[..., :, E3]
    else:
        leading = -t * np.einsum("mjh,h->mj", harmonic_derivatives(pts, 3)[..., :, :, E3], mom.m1)
    diff = np.linalg.norm(values - leading, axis=-1)
    lead_mag = np.linalg.norm(leading, axis=-1)
    scale = float(np.max(lead_mag))
    relative = float(np.max(diff)) / scale if scale > 0 else np.inf
    c, b = fit_power_envelope(r, diff, t)
    logger.info("buoyancy profile order %d t=%g: relative=%.3e envelope C=%.3e b=%.3f", order, t, relative, c, b)
    return BuoyancyProfile(order, t, kappa, relative, c, b, int(r.size))
