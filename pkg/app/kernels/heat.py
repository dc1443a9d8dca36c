# app/kernels/heat.py
"""
Heat kernel g_t and the fractional heat kernel G(t, x) of e^{-t(-Delta)^alpha}.

G is radial; its profile comes from the 1-D Fourier-Bessel integral
    G(t, r) = 1/(2 pi^2) int_0^inf e^{-t rho^{2 alpha}} rho^2 j0(rho r) d rho
and its radial derivative from
    G_r(t, r) = -1/(2 pi^2) int_0^inf e^{-t rho^{2 alpha}} rho^3 j1(rho r) d rho.
"""
from typing import Union

import numpy as np
from scipy.special import spherical_jn

from app.kernels.quadrature import fourier_cutoff, radial_integral
from app.utils.errors import PreconditionError

ArrayLike = Union[float, np.ndarray]


def check_time(t: float) -> None:
    if not (t > 0 and np.isfinite(t)):
        raise PreconditionError(f"time must be positive, got t={t}")


def _check_alpha(alpha: float) -> None:
    if not alpha > 0.5:
        raise PreconditionError(f"fractional exponent must exceed 1/2, got alpha={alpha}")


def _radius(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (3,):
        raise PreconditionError(f"points must have a trailing axis of length 3, got shape {x.shape}")
    return np.linalg.norm(x, axis=-1)


def _scalar_or_array(v: np.ndarray):
    return float(v) if np.ndim(v) == 0 else v


def heat_kernel(t: float, x) -> ArrayLike:
    """(4 pi t)^{-3/2} exp(-|x|^2 / 4t) at one point (3,) or many (..., 3)."""
    check_time(t)
    r = _radius(x)
    return _scalar_or_array((4.0 * np.pi * t) ** -1.5 * np.exp(-r * r / (4.0 * t)))


def heat_kernel_radial(t: float, r) -> np.ndarray:
    check_time(t)
    r = np.asarray(r, dtype=float)
    return (4.0 * np.pi * t) ** -1.5 * np.exp(-r * r / (4.0 * t))


def heat_kernel_gradient(t: float, x) -> np.ndarray:
    """grad g_t(x) = -x / (2t) g_t(x), shape (..., 3)."""
    check_time(t)
    x = np.asarray(x, dtype=float)
    return -x / (2.0 * t) * np.asarray(heat_kernel(t, x))[..., None]


def frac_heat_radial(alpha: float, t: float, r, derivative: bool = False) -> np.ndarray:
    """Radial profile of G(t, .) (or of its r-derivative) by Fourier-Bessel quadrature."""
    check_time(t)
    if alpha < 0.5:
        # the profile integral still converges at alpha = 1/2 (Poisson kernel)
        raise PreconditionError(f"fractional exponent must be at least 1/2, got alpha={alpha}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    upper = fourier_cutoff(t, alpha)
    grade = 0 if alpha == 1.0 else 24
    # oscillation count grows like upper * max(r)
    panels = max(8, int(np.ceil(upper * float(np.max(r, initial=0.0)) / np.pi)) + 8)
    order = 1 if derivative else 0
    power = 3 if derivative else 2
    sign = -1.0 if derivative else 1.0

    def integrand(rho):
        decay = np.exp(-t * rho ** (2.0 * alpha)) * rho ** power
        return decay[:, None] * spherical_jn(order, np.outer(rho, r))

    value, _ = radial_integral(integrand, upper, panels=panels, grade_levels=grade)
    return sign * value / (2.0 * np.pi ** 2)


def frac_heat_kernel(alpha: float, t: float, x, method: str = "direct") -> ArrayLike:
    """
    G(t, x) with G^(t, xi) = e^{-t |xi|^{2 alpha}}.

    method="direct" integrates at time t; method="similarity" evaluates the
    t = 1 profile K at x t^{-1/(2 alpha)} and rescales by t^{-3/(2 alpha)}.
    """
    _check_alpha(alpha)
    check_time(t)
    r = _radius(x)
    flat = np.ravel(r)
    if method == "direct":
        vals = frac_heat_radial(alpha, t, flat)
    elif method == "similarity":
        s = t ** (-1.0 / (2.0 * alpha))
        vals = t ** (-3.0 / (2.0 * alpha)) * frac_heat_radial(alpha, 1.0, flat * s)
    else:
        raise PreconditionError(f"unknown evaluation method {method!r}")
    return _scalar_or_array(vals.reshape(np.shape(r)))


def frac_heat_gradient(alpha: float, t: float, x) -> np.ndarray:
    """grad G(t, x) = G_r(t, |x|) x/|x|, shape (..., 3); zero at the origin."""
    _check_alpha(alpha)
    check_time(t)
    x = np.asarray(x, dtype=float)
    if alpha == 1.0:
        return heat_kernel_gradient(t, x)
    r = _radius(x)
    dr = frac_heat_radial(alpha, t, np.ravel(r), derivative=True).reshape(np.shape(r))
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(r[..., None] > 0, x / np.where(r > 0, r, 1.0)[..., None], 0.0)
    return dr[..., None] * unit


def poisson_kernel(t: float, x) -> ArrayLike:
    """Closed form of G at alpha = 1/2: t / (pi^2 (t^2 + |x|^2)^2)."""
    check_time(t)
    r = _radius(x)
    return _scalar_or_array(t / (np.pi ** 2 * (t * t + r * r) ** 2))
