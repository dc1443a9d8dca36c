# app/spectral/operators.py
"""
Per-mode differential operators, Leray projection and the dealiased
quadratic terms of the Boussinesq system.

The *_coeffs helpers work on raw coefficient arrays and are what the solvers
call in their inner loops; the field-level functions wrap them.
"""
from typing import Tuple

import numpy as np

from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid

E3 = 2  # component index of the vertical unit vector


# ---------------------------------------------------------------- arrays
def leray_coeffs(grid: Grid, v: np.ndarray) -> np.ndarray:
    """v - xi (xi . v) / |xi|^2 per mode; the mean mode passes through."""
    kx, ky, kz = grid.xi
    proj = (kx * v[0] + ky * v[1] + kz * v[2]) * grid.inv_xi2
    return np.stack([v[0] - kx * proj, v[1] - ky * proj, v[2] - kz * proj])


def vertical_leray_coeffs(grid: Grid, s: np.ndarray) -> np.ndarray:
    """P(s e3) for a scalar s, without building the intermediate vector."""
    kx, ky, kz = grid.xi
    proj = kz * s * grid.inv_xi2
    return np.stack([-kx * proj, -ky * proj, s - kz * proj])


def curl_coeffs(grid: Grid, u: np.ndarray) -> np.ndarray:
    kx, ky, kz = grid.dxi
    return 1j * np.stack([
        ky * u[2] - kz * u[1],
        kz * u[0] - kx * u[2],
        kx * u[1] - ky * u[0],
    ])


def divergence_coeffs(grid: Grid, v: np.ndarray) -> np.ndarray:
    kx, ky, kz = grid.dxi
    return 1j * (kx * v[0] + ky * v[1] + kz * v[2])


def gradient_coeffs(grid: Grid, s: np.ndarray) -> np.ndarray:
    return 1j * np.stack([k * s for k in grid.dxi])


def momentum_flux_coeffs(grid: Grid, u_phys: np.ndarray, v_phys: np.ndarray) -> np.ndarray:
    """-div(u (x) v) dealiased: component j is -sum_h d_h (u_h v_j)."""
    symmetric = u_phys is v_phys
    products = {}
    for h in range(3):
        for j in range(3):
            if symmetric and (j, h) in products:
                products[(h, j)] = products[(j, h)]
            else:
                products[(h, j)] = grid.forward(u_phys[h] * v_phys[j])
    out = np.zeros((3,) + grid.spectral_shape, dtype=np.complex128)
    for j in range(3):
        for h, k in enumerate(grid.dxi):
            out[j] -= 1j * k * products[(h, j)]
    return out * grid.dealias_mask


def scalar_flux_coeffs(grid: Grid, theta_phys: np.ndarray, u_phys: np.ndarray) -> np.ndarray:
    """-div(theta u) dealiased."""
    out = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for h, k in enumerate(grid.dxi):
        out -= 1j * k * grid.forward(theta_phys * u_phys[h])
    return out * grid.dealias_mask


def nonlinear_coeffs(grid: Grid, u: np.ndarray, theta: np.ndarray,
                     need_momentum: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """(f, g) = (-div(u (x) u), -div(theta u)) from coefficient arrays."""
    mask = grid.dealias_mask
    u_phys = grid.inverse(u * mask)
    th_phys = grid.inverse(theta * mask)
    g = scalar_flux_coeffs(grid, th_phys, u_phys)
    if need_momentum:
        f = momentum_flux_coeffs(grid, u_phys, u_phys)
    else:
        f = np.zeros((3,) + grid.spectral_shape, dtype=np.complex128)
    return f, g


# ---------------------------------------------------------------- fields
def leray_project(v: SpectralVector) -> SpectralVector:
    return SpectralVector(v.grid, leray_coeffs(v.grid, v.coeffs), divergence_free=True)


def curl(u: SpectralVector) -> SpectralVector:
    return SpectralVector(u.grid, curl_coeffs(u.grid, u.coeffs))


def divergence(v: SpectralVector) -> SpectralScalar:
    return SpectralScalar(v.grid, divergence_coeffs(v.grid, v.coeffs))


def gradient(s: SpectralScalar) -> SpectralVector:
    return SpectralVector(s.grid, gradient_coeffs(s.grid, s.coeffs))


def laplacian(field):
    """-|xi|^2 per mode, for scalars and vectors alike."""
    return field._like(-field.grid.xi2 * field.coeffs)


def nonlinear_terms(state) -> Tuple[SpectralVector, SpectralScalar]:
    """f = -div(u (x) u), g = -div(theta u), products dealiased by the 2/3 rule."""
    grid = state.u.grid
    f, g = nonlinear_coeffs(grid, state.u.coeffs, state.theta.coeffs)
    return SpectralVector(grid, f), SpectralScalar(grid, g)


def recover_pressure_gradient(state) -> SpectralVector:
    """
    grad P = grad (-Delta)^{-1} div(u.grad u - theta e3). Per mode this is
    -xi (xi . w) / |xi|^2 with w = (u.grad u)^ - theta^ e3 = -f^ - theta^ e3;
    the mean mode is set to zero.
    """
    grid = state.u.grid
    f, _ = nonlinear_terms(state)
    w = -f.coeffs
    w[E3] = w[E3] - state.theta.coeffs
    kx, ky, kz = grid.xi
    proj = (kx * w[0] + ky * w[1] + kz * w[2]) * grid.inv_xi2
    out = -np.stack([kx * proj, ky * proj, kz * proj])
    out[:, 0, 0, 0] = 0.0
    return SpectralVector(grid, out)
