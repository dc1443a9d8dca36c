# app/solver/initial_data.py
"""
Initial data built from exact Fourier coefficients where a closed transform
exists. Gaussians here are the periodic sums of their whole-space versions;
for width << L the difference is far below double precision.

  gaussian  theta(x) = m (2 pi s^2)^{-3/2} exp(-|x|^2 / 2 s^2)          (mass m)
  dipole    d_3 of the gaussian                                     (m0 = 0, m1 = -m e3)
  algebraic theta(x) = 3 eps (1 + |x|^2)^{-3/2}                      (not integrable)
  vortex    u = P curl(A s exp(-|x|^2 / 2 s^2) d), d = (1, 1, 1)/sqrt 3
"""
import logging
from typing import Callable, Dict

import numpy as np

from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.spectral.operators import curl_coeffs, leray_coeffs
from app.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

VORTEX_AXIS = np.ones(3) / np.sqrt(3.0)


def _gaussian_coeffs(grid: Grid, weight: float, width: float) -> np.ndarray:
    """Coefficients of weight * (normalised gaussian of std width)."""
    if not width > 0:
        raise PreconditionError(f"width must be positive, got {width}")
    return (weight / grid.length ** 3) * np.exp(-0.5 * width * width * grid.xi2) + 0j


def gaussian(grid: Grid, amplitude: float, width: float) -> SpectralScalar:
    return SpectralScalar(grid, _gaussian_coeffs(grid, amplitude, width))


def dipole(grid: Grid, amplitude: float, width: float) -> SpectralScalar:
    return SpectralScalar(grid, 1j * grid.dxi[2] * _gaussian_coeffs(grid, amplitude, width))


def algebraic(grid: Grid, amplitude: float, width: float = 1.0) -> SpectralScalar:
    """3 eps (1 + |x|^2 / width^2)^{-3/2}, sampled on the grid (minimal image)."""
    r2 = (grid.radius / width) ** 2
    return SpectralScalar.from_physical(grid, 3.0 * amplitude * (1.0 + r2) ** -1.5)


def zero_scalar(grid: Grid, amplitude: float = 0.0, width: float = 1.0) -> SpectralScalar:
    return SpectralScalar.zeros(grid)


def vortex_blob(grid: Grid, amplitude: float, width: float) -> SpectralVector:
    # pointwise potential A s exp(-|x|^2/2s^2) = A s (2 pi s^2)^{3/2} * normalised gaussian
    weight = amplitude * width * (2.0 * np.pi * width * width) ** 1.5
    psi = _gaussian_coeffs(grid, weight, width)
    potential = np.stack([d * psi for d in VORTEX_AXIS])
    u = leray_coeffs(grid, curl_coeffs(grid, potential))
    return SpectralVector(grid, u, divergence_free=True)


def zero_vector(grid: Grid, amplitude: float = 0.0, width: float = 1.0) -> SpectralVector:
    return SpectralVector.zeros(grid, divergence_free=True)


TEMPERATURE_FAMILIES: Dict[str, Callable[..., SpectralScalar]] = {
    "gaussian": gaussian,
    "dipole": dipole,
    "algebraic": algebraic,
    "zero": zero_scalar,
}

VELOCITY_FAMILIES: Dict[str, Callable[..., SpectralVector]] = {
    "vortex": vortex_blob,
    "zero": zero_vector,
}


def build_temperature(grid: Grid, family: str, amplitude: float, width: float = 1.0) -> SpectralScalar:
    try:
        factory = TEMPERATURE_FAMILIES[family]
    except KeyError:
        raise PreconditionError(f"unknown temperature family {family!r}; expected one of {sorted(TEMPERATURE_FAMILIES)}")
    return factory(grid, amplitude, width)


def build_velocity(grid: Grid, family: str, amplitude: float, width: float = 1.0) -> SpectralVector:
    try:
        factory = VELOCITY_FAMILIES[family]
    except KeyError:
        raise PreconditionError(f"unknown velocity family {family!r}; expected one of {sorted(VELOCITY_FAMILIES)}")
    return factory(grid, amplitude, width)


def gaussian_values(x: np.ndarray, mass: float, width: float) -> np.ndarray:
    """Whole-space gaussian of the given mass at points (..., 3)."""
    r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
    return mass * (2.0 * np.pi * width * width) ** -1.5 * np.exp(-0.5 * r2 / (width * width))
