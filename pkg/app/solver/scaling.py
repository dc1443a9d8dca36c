# app/solver/scaling.py
"""
The scaling u -> lambda u(lambda^2 t, lambda x), theta -> lambda^3 theta(lambda^2 t, lambda x).

On a grid the spatial part is free: the Fourier coefficients of lambda f(lambda x)
on a box of side L/lambda are lambda times those of f on the box of side L.
Only resampling to another N can lose information.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.utils.errors import PreconditionError, ResolutionError

logger = logging.getLogger(__name__)

# relative energy allowed outside the target grid's dealiased band
RESOLUTION_TOL = 1e-12


def _axis_map(n_from: int, n_to: int, half: bool):
    """Index pairs (src, dst) of the modes both grids represent strictly below Nyquist."""
    if half:
        k = np.arange(min(n_from, n_to) // 2)
        return k, k
    m = min(n_from, n_to) // 2
    k = np.concatenate([np.arange(0, m), np.arange(-m + 1, 0)])
    return k % n_from, k % n_to


def resample_coeffs(coeffs: np.ndarray, n_from: int, n_to: int) -> np.ndarray:
    lead = coeffs.shape[:-3]
    out = np.zeros(lead + (n_to, n_to, n_to // 2 + 1), dtype=np.complex128)
    sx, dx = _axis_map(n_from, n_to, False)
    sz, dz = _axis_map(n_from, n_to, True)
    out[..., dx[:, None, None], dx[None, :, None], dz[None, None, :]] = \
        coeffs[..., sx[:, None, None], sx[None, :, None], sz[None, None, :]]
    return out


def _check_resolved(grid: Grid, coeffs: np.ndarray, target: Grid, name: str) -> None:
    """Energy outside the target's dealiased band, relative to the total."""
    c = target.n // 3
    kx, ky, kz = grid.k_int
    inside = (np.abs(kx) <= c) & (np.abs(ky) <= c) & (np.abs(kz) <= c)
    power = grid.mode_weights * np.abs(coeffs) ** 2
    power = power.reshape((-1,) + grid.spectral_shape).sum(axis=0)
    total = float(np.sum(power))
    lost = float(np.sum(power[~inside]))
    if total > 0 and lost > RESOLUTION_TOL * total:
        raise ResolutionError(
            f"{name}: {lost / total:.2e} of the energy lies beyond the N={target.n} dealiasing cutoff")


def scaling_transform(u0: SpectralVector, theta0: SpectralScalar, lam: float,
                      target_n: Optional[int] = None) -> Tuple[SpectralVector, SpectralScalar]:
    """(lambda u0(lambda .), lambda^3 theta0(lambda .)) on a box of side L/lambda."""
    if not (lam > 0 and np.isfinite(lam)):
        raise PreconditionError(f"scaling factor must be positive, got {lam}")
    grid = u0.grid
    n = target_n or grid.n
    new_grid = Grid(n, grid.length / lam)
    u = lam * u0.coeffs
    th = lam ** 3 * theta0.coeffs
    if n != grid.n:
        _check_resolved(grid, u, new_grid, "velocity")
        _check_resolved(grid, th, new_grid, "temperature")
        u = resample_coeffs(u, grid.n, n)
        th = resample_coeffs(th, grid.n, n)
    logger.debug("scaled data by lambda=%g onto N=%d, L=%g", lam, n, new_grid.length)
    return (SpectralVector(new_grid, u, divergence_free=u0.divergence_free),
            SpectralScalar(new_grid, th))


def scaled_times(times: Sequence[float], lam: float) -> list:
    """Times of the scaled solution matching the original times t: t / lambda^2."""
    return [float(t) / (lam * lam) for t in times]
