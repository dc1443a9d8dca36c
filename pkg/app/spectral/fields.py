# app/spectral/fields.py
"""
Immutable spectral fields on a Grid.

A field owns a read-only coefficient array: scalars have the grid's spectral
shape, vectors carry a leading component axis of length 3. Arithmetic returns
new fields; nothing mutates in place.
"""
from typing import Optional

import numpy as np

from app.spectral.grid import Grid
from app.utils.errors import PreconditionError

DIVERGENCE_TOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=np.complex128).view()
    out.setflags(write=False)
    return out


class _SpectralField:
    components: Optional[int] = None

    def __init__(self, grid: Grid, coeffs: np.ndarray):
        expected = grid.spectral_shape if self.components is None else (self.components,) + grid.spectral_shape
        if tuple(coeffs.shape) != expected:
            raise PreconditionError(f"coefficient shape {coeffs.shape} does not match {expected}")
        self.grid = grid
        self.coeffs = _frozen(coeffs)

    # construction helpers
    @classmethod
    def zeros(cls, grid: Grid, **kw):
        shape = grid.spectral_shape if cls.components is None else (cls.components,) + grid.spectral_shape
        return cls(grid, np.zeros(shape, dtype=np.complex128), **kw)

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray, **kw):
        return cls(grid, grid.forward(np.asarray(values, dtype=np.float64)), **kw)

    def physical(self) -> np.ndarray:
        return self.grid.inverse(self.coeffs)

    def _like(self, coeffs: np.ndarray):
        return type(self)(self.grid, coeffs)

    # arithmetic
    def __add__(self, other):
        self._check_compatible(other)
        return self._like(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_compatible(other)
        return self._like(self.coeffs - other.coeffs)

    def __mul__(self, c: float):
        return self._like(self.coeffs * c)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if type(other) is not type(self) or other.grid != self.grid:
            raise PreconditionError("fields live on different grids or have different ranks")

    def heat(self, t: float):
        """e^{t Delta} applied per mode."""
        return self._like(self.coeffs * self.grid.heat_multiplier(t))

    def dealiased(self):
        return self._like(self.coeffs * self.grid.dealias_mask)

    def l2_norm(self) -> float:
        return self.grid.l2_from_coeffs(self.coeffs)

    def max_abs_coeff(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))

    def hermitian_defect(self) -> float:
        """Max deviation of the coefficients from those of a real field."""
        back = self.grid.forward(self.physical())
        scale = max(self.max_abs_coeff(), np.finfo(float).tiny)
        return float(np.max(np.abs(back - self.coeffs)) / scale)


class SpectralScalar(_SpectralField):
    components = None


class SpectralVector(_SpectralField):
    components = 3

    def __init__(self, grid: Grid, coeffs: np.ndarray, divergence_free: bool = False):
        super().__init__(grid, coeffs)
        self.divergence_free = bool(divergence_free)

    def _like(self, coeffs: np.ndarray):
        return SpectralVector(self.grid, coeffs, divergence_free=self.divergence_free)

    def __add__(self, other):
        self._check_compatible(other)
        return SpectralVector(self.grid, self.coeffs + other.coeffs,
                              divergence_free=self.divergence_free and other.divergence_free)

    def __sub__(self, other):
        self._check_compatible(other)
        return SpectralVector(self.grid, self.coeffs - other.coeffs,
                              divergence_free=self.divergence_free and other.divergence_free)

    def component(self, j: int) -> SpectralScalar:
        return SpectralScalar(self.grid, self.coeffs[j])

    def divergence_residual(self) -> float:
        """max |xi . u_hat| relative to max |u_hat| (full wavenumbers)."""
        kx, ky, kz = self.grid.xi
        div = kx * self.coeffs[0] + ky * self.coeffs[1] + kz * self.coeffs[2]
        scale = self.max_abs_coeff()
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(div)) / scale)

    def check_divergence_free(self, tol: float = DIVERGENCE_TOL) -> None:
        res = self.divergence_residual()
        if res > tol:
            raise PreconditionError(f"vector field is not divergence-free (residual {res:.3e} > {tol:.1e})")
