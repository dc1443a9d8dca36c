# app/kernels/lp_norms.py
"""
L^p norms of the kernels G, grad G, K and F over R^3.

Every kernel here has a radial pointwise (Frobenius) magnitude, so
    ||k||_p^p = 4 pi int_0^inf |k(r)|^p r^2 dr.
The integral is split into a core [0, R0] (R0 = 8 t^{1/(2 alpha)}) and
doubling shells [R, 2R] integrated on log-spaced Gauss-Legendre nodes. The
shells stop when one adds less than CONVERGED_GROWTH of the running total;
a tail that keeps adding at least DIVERGENT_GROWTH per doubling for three
doublings in a row (after MIN_DOUBLINGS) is reported as non-integrable.
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.optimize import minimize_scalar

from app.kernels.heat import check_time, frac_heat_gradient, frac_heat_radial, heat_kernel_radial
from app.kernels.oseen import div_kernel_eval, oseen_eval
from app.kernels.quadrature import gauss_legendre, radial_integral
from app.utils.errors import NonIntegrableError, PreconditionError

logger = logging.getLogger(__name__)

KERNELS = ("G", "gradG", "K", "F")

CONVERGED_GROWTH = 1e-10
DIVERGENT_GROWTH = 0.05
MIN_DOUBLINGS = 10
MAX_DOUBLINGS = 64
# quadrature-evaluated fractional kernels stop here and add their algebraic tail
FRACTIONAL_FAR_FIELD = 32.0
_SHELL_NODES = 24


@dataclass
class KernelNorm:
    kernel: str
    t: float
    p: float
    alpha: float
    value: float
    integrable: bool = True
    doublings: int = 0
    growth: List[float] = field(default_factory=list)


def radial_magnitude(kernel: str, t: float, r, alpha: float = 1.0) -> np.ndarray:
    """|k(t, r e)| for any unit vector e (the magnitudes are rotation invariant)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if kernel == "G":
        if alpha == 1.0:
            return heat_kernel_radial(t, r)
        return np.abs(frac_heat_radial(alpha, t, r))
    pts = np.zeros((r.size, 3))
    pts[:, 2] = r
    if kernel == "gradG":
        return np.linalg.norm(frac_heat_gradient(alpha, t, pts), axis=-1)
    if kernel == "K":
        return np.linalg.norm(oseen_eval(t, pts).reshape(r.size, -1), axis=-1)
    if kernel == "F":
        return np.linalg.norm(div_kernel_eval(t, pts).reshape(r.size, -1), axis=-1)
    raise PreconditionError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


def predicted_kernel_slope(kernel: str, p: float, alpha: float = 1.0) -> float:
    """Exponent of t in ||k(t)||_p implied by self-similarity (n = 3)."""
    q = 0.0 if np.isinf(p) else 1.0 / p
    if kernel == "G":
        return -(3.0 / (2.0 * alpha)) * (1.0 - q)
    if kernel == "gradG":
        return -1.0 / (2.0 * alpha) - (3.0 / (2.0 * alpha)) * (1.0 - q)
    if kernel == "K":
        return -1.5 * (1.0 - q)
    if kernel == "F":
        return -2.0 + 1.5 * q
    raise PreconditionError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


def _tail_power(kernel: str, alpha: float) -> float:
    # far-field power law of the fractional kernels (alpha < 1)
    return 3.0 + 2.0 * alpha if kernel == "G" else 4.0 + 2.0 * alpha


def _sup_norm(kernel: str, t: float, alpha: float) -> float:
    scale = t ** (1.0 / (2.0 * alpha))
    r = np.concatenate([[0.0], np.geomspace(1e-3 * scale, 16.0 * scale, 256)])
    vals = radial_magnitude(kernel, t, r, alpha)
    i = int(np.argmax(vals))
    lo, hi = r[max(i - 1, 0)], r[min(i + 1, r.size - 1)]
    if hi <= lo:
        return float(vals[i])
    res = minimize_scalar(lambda s: -float(radial_magnitude(kernel, t, [s], alpha)[0]),
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-10 * scale})
    return float(max(vals[i], -res.fun))


def kernel_lp_report(kernel: str, t: float, p: float, alpha: float = 1.0) -> KernelNorm:
    check_time(t)
    if kernel not in KERNELS:
        raise PreconditionError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
    if not p >= 1:
        raise PreconditionError(f"order p must lie in [1, inf], got {p}")
    if np.isinf(p):
        return KernelNorm(kernel, t, p, alpha, _sup_norm(kernel, t, alpha))

    scale = t ** (1.0 / (2.0 * alpha))
    r0 = 8.0 * scale

    def density(r):
        return 4.0 * np.pi * radial_magnitude(kernel, t, r, alpha) ** p * r * r

    core, _ = radial_integral(density, r0, panels=16, tol=1e-12, n=16)
    total = float(core)
    x, w = gauss_legendre(_SHELL_NODES)
    fractional = alpha != 1.0 and kernel in ("G", "gradG")
    growth: List[float] = []
    lo = r0
    for k in range(1, MAX_DOUBLINGS + 1):
        hi = 2.0 * lo
        s = 0.5 * (np.log(hi) + np.log(lo)) + 0.5 * np.log(2.0) * x
        rr = np.exp(s)
        shell = float(np.sum(0.5 * np.log(2.0) * w * density(rr) * rr))
        total += shell
        growth.append(shell / total if total > 0 else 0.0)
        lo = hi
        if growth[-1] < CONVERGED_GROWTH:
            return KernelNorm(kernel, t, p, alpha, total ** (1.0 / p), True, k, growth)
        if fractional and lo >= FRACTIONAL_FAR_FIELD * scale:
            m = _tail_power(kernel, alpha)
            amp = float(radial_magnitude(kernel, t, [lo], alpha)[0]) * lo ** m
            if m * p <= 3.0:
                raise NonIntegrableError(f"{kernel} tail |x|^-{m:g} is not L^{p:g}-integrable", growth)
            total += 4.0 * np.pi * amp ** p * lo ** (3.0 - m * p) / (m * p - 3.0)
            return KernelNorm(kernel, t, p, alpha, total ** (1.0 / p), True, k, growth)
        if k >= MIN_DOUBLINGS and all(g >= DIVERGENT_GROWTH for g in growth[-3:]):
            logger.warning("%s(t=%g) flagged non-integrable in L^%g after %d doublings", kernel, t, p, k)
            raise NonIntegrableError(
                f"||{kernel}(t={t:g})||_{p:g}: tail grows >= {DIVERGENT_GROWTH:.0%} per doubling", growth)
    raise NonIntegrableError(f"||{kernel}(t={t:g})||_{p:g}: no convergence after {MAX_DOUBLINGS} doublings", growth)


def kernel_lp_norm(kernel: str, t: float, p: float, alpha: float = 1.0) -> float:
    """||kernel(t, .)||_{L^p(R^3)}; raises NonIntegrableError for divergent tails."""
    return kernel_lp_report(kernel, t, p, alpha).value

