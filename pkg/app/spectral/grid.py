# app/spectral/grid.py
"""
Periodic box [-L/2, L/2)^3 sampled on N^3 points, standing in for R^3.

Transform conventions (fixed everywhere in the package):
  - forward is scipy.fft.rfftn with norm="forward", so the forward transform
    carries the 1/N^3 factor and coefficients are Fourier-series coefficients:
    f(x) = sum_k c_k exp(i xi_k . x), xi_k = 2 pi k / L, k in [-N/2, N/2).
  - the last axis is the half axis (length N//2 + 1); real fields satisfy the
    conjugate symmetry implied by irfftn.
  - Parseval: (1/L^3) int |f|^2 dx = sum over all modes |c_k|^2, evaluated on the
    half spectrum with weight 2 on interior last-axis modes.
  - array index i on any axis is the physical point x = i*dx with minimal-image
    wrapping, so the origin sits at index (0, 0, 0).
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np
import scipy.fft

from app import config
from app.utils.errors import PreconditionError


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    n: int
    length: float

    def __post_init__(self):
        if not _is_power_of_two(int(self.n)) or self.n < 4:
            raise PreconditionError(f"grid size N={self.n} must be a power of two >= 4")
        if not (self.length > 0 and np.isfinite(self.length)):
            raise PreconditionError(f"box length L={self.length} must be positive")

    # ---- physical space ----
    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx ** 3

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def spectral_shape(self) -> Tuple[int, int, int]:
        return (self.n, self.n, self.n // 2 + 1)

    @cached_property
    def axis(self) -> np.ndarray:
        """Minimal-image coordinates of one axis, index order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n) * self.dx

    @cached_property
    def coords(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        a = self.axis
        return (a[:, None, None], a[None, :, None], a[None, None, :])

    @cached_property
    def radius(self) -> np.ndarray:
        x, y, z = self.coords
        r = np.sqrt(x * x + y * y + z * z)
        r.setflags(write=False)
        return r

    def points(self, mask: np.ndarray) -> np.ndarray:
        """Cartesian coordinates (M, 3) of the grid points selected by mask."""
        x, y, z = np.broadcast_arrays(*self.coords)
        return np.stack([x[mask], y[mask], z[mask]], axis=-1)

    # ---- spectral space ----
    @cached_property
    def k_int(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        full = np.fft.fftfreq(self.n, d=1.0 / self.n)
        half = np.fft.rfftfreq(self.n, d=1.0 / self.n)
        return (full[:, None, None], full[None, :, None], half[None, None, :])

    @cached_property
    def xi(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Full wavenumbers 2 pi k / L (Nyquist kept); used for |xi|^2 and projection."""
        s = 2.0 * np.pi / self.length
        return tuple(s * k for k in self.k_int)

    @cached_property
    def dxi(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Derivative wavenumbers: Nyquist zeroed so odd multipliers keep fields real."""
        out = []
        for k in self.xi:
            d = np.array(k, copy=True)
            d[np.isclose(np.abs(d), np.pi * self.n / self.length)] = 0.0
            out.append(d)
        return tuple(out)

    @cached_property
    def xi2(self) -> np.ndarray:
        kx, ky, kz = self.xi
        q = kx * kx + ky * ky + kz * kz
        q.setflags(write=False)
        return q

    @cached_property
    def inv_xi2(self) -> np.ndarray:
        """1/|xi|^2 with the mean mode set to 0."""
        q = np.zeros(self.spectral_shape)
        nz = self.xi2 > 0
        q[nz] = 1.0 / self.xi2[nz]
        q.setflags(write=False)
        return q

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3 rule: keep modes with every |k_i| <= N//3."""
        c = self.n // 3
        kx, ky, kz = self.k_int
        m = (np.abs(kx) <= c) & (np.abs(ky) <= c) & (np.abs(kz) <= c)
        m.setflags(write=False)
        return m

    @cached_property
    def mode_weights(self) -> np.ndarray:
        """Multiplicity of each half-spectrum mode in the full spectrum."""
        w = np.full(self.spectral_shape[-1], 2.0)
        w[0] = 1.0
        if self.n % 2 == 0:
            w[-1] = 1.0
        return w[None, None, :]

    # ---- transforms ----
    def forward(self, values: np.ndarray) -> np.ndarray:
        return scipy.fft.rfftn(values, axes=(-3, -2, -1), norm="forward", workers=config.NUM_THREADS)

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return scipy.fft.irfftn(coeffs, s=self.shape, axes=(-3, -2, -1), norm="forward",
                                workers=config.NUM_THREADS)

    def l2_from_coeffs(self, coeffs: np.ndarray) -> float:
        """Physical L^2 norm over the box from coefficients (Parseval)."""
        s = np.sum(self.mode_weights * np.abs(coeffs) ** 2)
        return float(np.sqrt(s * self.length ** 3))

    def heat_multiplier(self, t: float) -> np.ndarray:
        return np.exp(-t * self.xi2)

    def horizon(self) -> float:
        """Largest time allowed by the box-horizon rule."""
        return self.length ** 2 / 64.0
