# app/kernels/oseen.py
"""
Kernel K(t, x) of e^{t Delta} P (Oseen-type tensor) and its derivative
F_{j;h,k}(t, x) = d_h K_jk(t, x).

Two evaluation paths:
  - quadrature: the angular integrals of the projector are done analytically,
    leaving radial Fourier-Bessel integrals
        K_jk = 1/(2 pi^2) int rho^2 e^{-t rho^2} [delta_jk (j0 - j1/z) + n_j n_k j2] d rho
        F_jhk = 1/(2 pi^2) int rho^3 e^{-t rho^2} [-j1 n_h delta_jk
                 + (j2/z)(delta_hj n_k + delta_hk n_j + delta_jk n_h) - j3 n_h n_j n_k] d rho
    with z = rho |x| and n = x/|x|.
  - decomposition: K = g delta + R + D^2 h and F = grad g (x) delta + Fh + D^3 h,
    where R, Fh are derivatives of E = 1/(4 pi |x|) and h = -erfc(|x|/2 sqrt t)/(4 pi |x|)
    is the Gaussian-decaying correction of the Newtonian potential of g.

"auto" picks the decomposition for |x|/sqrt(t) >= 1/2 and quadrature inside.
"""
from typing import Tuple

import numpy as np
from scipy.special import erfc, spherical_jn

from app.kernels.harmonic import DELTA, harmonic_derivatives, outer3, sym_delta_unit
from app.kernels.heat import check_time
from app.kernels.quadrature import fourier_cutoff, radial_integral
from app.utils.errors import PreconditionError

AUTO_SWITCH = 0.5
_SERIES_Z = 1e-2


def _j1_over_z(z: np.ndarray) -> np.ndarray:
    small = z < _SERIES_Z
    zz = np.where(small, 1.0, z)
    z2 = z * z
    return np.where(small, 1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0, spherical_jn(1, zz) / zz)


def _j2_over_z(z: np.ndarray) -> np.ndarray:
    small = z < _SERIES_Z
    zz = np.where(small, 1.0, z)
    z2 = z * z
    return np.where(small, z / 15.0 - z * z2 / 210.0 + z * z2 * z2 / 7560.0, spherical_jn(2, zz) / zz)


def _points(x) -> Tuple[np.ndarray, np.ndarray, np.ndarray, tuple]:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (3,):
        raise PreconditionError(f"points must have a trailing axis of length 3, got shape {x.shape}")
    lead = x.shape[:-1]
    flat = x.reshape(-1, 3)
    r = np.linalg.norm(flat, axis=-1)
    n = np.zeros_like(flat)
    nz = r > 0
    n[nz] = flat[nz] / r[nz, None]
    # any direction works at the origin: every n-dependent term carries a factor z
    n[~nz] = (0.0, 0.0, 1.0)
    return flat, r, n, lead


# ------------------------------------------------------------ quadrature
def _oseen_quadrature(t: float, r: np.ndarray, n: np.ndarray) -> np.ndarray:
    upper = fourier_cutoff(t)
    panels = max(8, int(np.ceil(upper * float(np.max(r, initial=0.0)) / np.pi)) + 8)

    def integrand(rho):
        z = np.outer(rho, r)
        w = (rho * rho * np.exp(-t * rho * rho))[:, None]
        a = spherical_jn(0, z) - _j1_over_z(z)
        b = spherical_jn(2, z)
        return np.stack([w * a, w * b], axis=-1)

    val, _ = radial_integral(integrand, upper, panels=panels)
    val = val / (2.0 * np.pi ** 2)
    nn = np.einsum("mj,mk->mjk", n, n)
    return val[:, 0, None, None] * DELTA + val[:, 1, None, None] * nn


def _div_quadrature(t: float, r: np.ndarray, n: np.ndarray) -> np.ndarray:
    upper = fourier_cutoff(t)
    panels = max(8, int(np.ceil(upper * float(np.max(r, initial=0.0)) / np.pi)) + 8)

    def integrand(rho):
        z = np.outer(rho, r)
        w = (rho ** 3 * np.exp(-t * rho * rho))[:, None]
        return np.stack([-w * spherical_jn(1, z), w * _j2_over_z(z), -w * spherical_jn(3, z)], axis=-1)

    val, _ = radial_integral(integrand, upper, panels=panels)
    val = val / (2.0 * np.pi ** 2)
    first = np.einsum("mh,jk->mjhk", n, DELTA)
    return (val[:, 0, None, None, None] * first
            + val[:, 1, None, None, None] * sym_delta_unit(n)
            + val[:, 2, None, None, None] * outer3(n))


# ------------------------------------------------------------ decomposition
def _h_derivatives(t: float, r: np.ndarray):
    """h', h'', h''' of h(r) = -erfc(r / 2 sqrt t) / (4 pi r)."""
    e = np.exp(-r * r / (4.0 * t))
    c = erfc(r / (2.0 * np.sqrt(t)))
    k = 1.0 / np.sqrt(np.pi * t)
    four_pi = 4.0 * np.pi
    h1 = (k * e / r + c / r ** 2) / four_pi
    h2 = (k * e * (-1.0 / (2.0 * t) - 2.0 / r ** 2) - 2.0 * c / r ** 3) / four_pi
    h3 = (k * e * (r / (4.0 * t * t) + 1.0 / (t * r) + 6.0 / r ** 3) + 6.0 * c / r ** 4) / four_pi
    return h1, h2, h3


def _oseen_remainder(t: float, r: np.ndarray, n: np.ndarray) -> np.ndarray:
    """K - R = g delta + D^2 h."""
    g = (4.0 * np.pi * t) ** -1.5 * np.exp(-r * r / (4.0 * t))
    h1, h2, _ = _h_derivatives(t, r)
    nn = np.einsum("mj,mk->mjk", n, n)
    return ((g + h1 / r)[:, None, None] * DELTA + (h2 - h1 / r)[:, None, None] * nn)


def _div_remainder(t: float, r: np.ndarray, n: np.ndarray) -> np.ndarray:
    """F - Fh = grad g (x) delta + D^3 h."""
    g = (4.0 * np.pi * t) ** -1.5 * np.exp(-r * r / (4.0 * t))
    gr = -r / (2.0 * t) * g
    h1, h2, h3 = _h_derivatives(t, r)
    a = h2 - h1 / r
    first = np.einsum("mh,jk->mjhk", n, DELTA)
    return (gr[:, None, None, None] * first
            + (h3 - 3.0 * a / r)[:, None, None, None] * outer3(n)
            + (a / r)[:, None, None, None] * sym_delta_unit(n))


def _select(method: str, t: float, r: np.ndarray) -> np.ndarray:
    if method == "auto":
        return r / np.sqrt(t) >= AUTO_SWITCH
    if method == "decomposition":
        if np.any(r == 0.0):
            raise PreconditionError("decomposition path is singular at x = 0")
        return np.ones_like(r, dtype=bool)
    if method == "quadrature":
        return np.zeros_like(r, dtype=bool)
    raise PreconditionError(f"unknown evaluation method {method!r}")


def oseen_eval(t: float, x, method: str = "auto") -> np.ndarray:
    """K(t, x), shape (..., 3, 3)."""
    check_time(t)
    flat, r, n, lead = _points(x)
    far = _select(method, t, r)
    out = np.empty((r.size, 3, 3))
    if np.any(far):
        out[far] = harmonic_derivatives(flat[far], 2) + _oseen_remainder(t, r[far], n[far])
    if np.any(~far):
        out[~far] = _oseen_quadrature(t, r[~far], n[~far])
    return out.reshape(lead + (3, 3))


def div_kernel_eval(t: float, x, method: str = "auto") -> np.ndarray:
    """F_{j;h,k}(t, x) indexed [..., j, h, k]."""
    check_time(t)
    flat, r, n, lead = _points(x)
    far = _select(method, t, r)
    out = np.empty((r.size, 3, 3, 3))
    if np.any(far):
        out[far] = harmonic_derivatives(flat[far], 3) + _div_remainder(t, r[far], n[far])
    if np.any(~far):
        out[~far] = _div_quadrature(t, r[~far], n[~far])
    return out.reshape(lead + (3, 3, 3))


def psi(y) -> np.ndarray:
    """|y|^3 (K(1, y) - R(y)); decays like a Gaussian in |y|."""
    flat, r, n, lead = _points(y)
    if np.any(r == 0.0):
        raise PreconditionError("psi is evaluated away from the origin")
    out = r[:, None, None] ** 3 * _oseen_remainder(1.0, r, n)
    return out.reshape(lead + (3, 3))


def psi_tilde(y) -> np.ndarray:
    """|y|^4 (F(1, y) - Fh(y))."""
    flat, r, n, lead = _points(y)
    if np.any(r == 0.0):
        raise PreconditionError("psi_tilde is evaluated away from the origin")
    out = r[:, None, None, None] ** 4 * _div_remainder(1.0, r, n)
    return out.reshape(lead + (3, 3, 3))


def fit_gaussian_envelope(rho, values) -> Tuple[float, float]:
    """
    Fit |values| <= C exp(-c rho^2): least squares on log|v| against rho^2 gives
    c, then C is lifted so the bound holds at every sample.
    """
    rho = np.asarray(rho, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if rho.size < 2 or np.any(v <= 0):
        raise PreconditionError("envelope fit needs at least two positive samples")
    slope, _ = np.polyfit(rho ** 2, np.log(v), 1)
    c = -float(slope)
    big_c = float(np.max(v * np.exp(c * rho ** 2)))
    return big_c, c
