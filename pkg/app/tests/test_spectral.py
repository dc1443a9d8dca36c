# tests/test_spectral.py
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.solver.state import State
from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.spectral.operators import (
    E3,
    curl,
    divergence,
    gradient,
    laplacian,
    leray_coeffs,
    leray_project,
    nonlinear_coeffs,
    nonlinear_terms,
    recover_pressure_gradient,
    scalar_flux_coeffs,
)
from app.utils.errors import PreconditionError

GRID = Grid(16, 2 * np.pi)


def _random_vector(seed: int) -> SpectralVector:
    rng = np.random.default_rng(seed)
    return SpectralVector.from_physical(GRID, rng.standard_normal((3,) + GRID.shape))


@pytest.mark.parametrize("n", [0, 3, 12, 2])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(PreconditionError):
        Grid(n, 10.0)


def test_grid_rejects_nonpositive_length():
    with pytest.raises(PreconditionError):
        Grid(16, 0.0)


def test_forward_inverse_round_trip():
    rng = np.random.default_rng(1)
    values = rng.standard_normal(GRID.shape)
    back = GRID.inverse(GRID.forward(values))
    assert np.max(np.abs(back - values)) < 1e-12


def test_fields_are_read_only():
    f = SpectralScalar.zeros(GRID)
    with pytest.raises(ValueError):
        f.coeffs[0, 0, 0] = 1.0


def test_fields_on_different_grids_do_not_add():
    a = SpectralScalar.zeros(GRID)
    b = SpectralScalar.zeros(Grid(8, 2 * np.pi))
    with pytest.raises(PreconditionError):
        a + b


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_leray_is_idempotent_and_divergence_free(seed):
    v = _random_vector(seed)
    p = leray_project(v)
    pp = leray_project(p)
    assert p.divergence_residual() < 1e-12
    assert np.max(np.abs(pp.coeffs - p.coeffs)) < 1e-12 * max(p.max_abs_coeff(), 1.0)


def test_leray_annihilates_gradients():
    rng = np.random.default_rng(3)
    # band-limited so no Nyquist mode loses its derivative
    s = SpectralScalar.from_physical(GRID, rng.standard_normal(GRID.shape)).dealiased()
    g = gradient(s)
    projected = leray_coeffs(GRID, g.coeffs)
    assert np.max(np.abs(projected)) < 1e-12 * max(g.max_abs_coeff(), 1.0)


def test_curl_of_gradient_and_divergence_of_curl_vanish():
    rng = np.random.default_rng(4)
    s = SpectralScalar.from_physical(GRID, rng.standard_normal(GRID.shape))
    assert curl(gradient(s)).max_abs_coeff() < 1e-10
    assert divergence(curl(_random_vector(5))).max_abs_coeff() < 1e-10


def test_check_divergence_free_rejects_gradient_field():
    x, _, _ = GRID.coords
    s = SpectralScalar.from_physical(GRID, np.broadcast_to(np.cos(x), GRID.shape))
    with pytest.raises(PreconditionError):
        gradient(s).check_divergence_free()


def test_heat_damps_single_mode_exactly():
    x, _, _ = GRID.coords
    s = SpectralScalar.from_physical(GRID, np.broadcast_to(np.cos(2 * x), GRID.shape))
    out = s.heat(0.3).physical()
    expected = np.exp(-4 * 0.3) * np.broadcast_to(np.cos(2 * x), GRID.shape)
    assert np.max(np.abs(out - expected)) < 1e-12


def test_scalar_flux_matches_closed_form():
    # theta = cos x carried by u = (1, 0, 0): -div(theta u) = sin x
    x, _, _ = GRID.coords
    theta = np.broadcast_to(np.cos(x), GRID.shape).copy()
    u = np.zeros((3,) + GRID.shape)
    u[0] = 1.0
    g = GRID.inverse(scalar_flux_coeffs(GRID, theta, u))
    assert np.max(np.abs(g - np.sin(x))) < 1e-12


def test_dealiased_product_drops_modes_above_two_thirds():
    # cos(5x)^2 = (1 + cos 10x) / 2; mode 10 lies beyond the 2/3 cutoff at N=16
    x, _, _ = GRID.coords
    c = np.broadcast_to(np.cos(5 * x), GRID.shape).copy()
    u = np.zeros((3,) + GRID.shape)
    u[0] = c
    g = GRID.inverse(scalar_flux_coeffs(GRID, c, u))
    assert np.max(np.abs(g)) < 1e-12


def test_l2_norm_matches_physical_sum():
    v = _random_vector(9)
    direct = np.sqrt(np.sum(v.physical() ** 2) * GRID.cell_volume)
    assert v.l2_norm() == pytest.approx(direct, rel=1e-12)


BAND = 2
_INT_K = np.fft.fftfreq(GRID.n, d=1.0 / GRID.n)


def _band_limited(rng: np.random.Generator, lead=()) -> np.ndarray:
    """Random real field with every |k_i| <= BAND; its products are not aliased at N=16."""
    keep = np.abs(_INT_K) <= BAND
    band = keep[:, None, None] & keep[None, :, None] & keep[None, None, :]
    values = rng.standard_normal(tuple(lead) + GRID.shape)
    full = np.fft.fftn(values, axes=(-3, -2, -1)) * band
    return np.real(np.fft.ifftn(full, axes=(-3, -2, -1)))


def _full_coeffs(values: np.ndarray) -> np.ndarray:
    return np.fft.fftn(values) / GRID.n ** 3


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sum_m a_m b_{k-m} over the band of a."""
    out = np.zeros(GRID.shape, dtype=np.complex128)
    for m in itertools.product(range(-BAND, BAND + 1), repeat=3):
        out += a[m] * np.roll(b, m, axis=(0, 1, 2))
    return out


def test_nonlinear_terms_match_direct_convolution():
    rng = np.random.default_rng(4)
    u_phys = _band_limited(rng, (3,))
    th_phys = _band_limited(rng)
    u_hat = [_full_coeffs(u_phys[h]) for h in range(3)]
    th_hat = _full_coeffs(th_phys)
    # L = 2 pi, so xi equals the integer wavenumber
    k = (_INT_K[:, None, None], _INT_K[None, :, None], _INT_K[None, None, :])
    f_ref = np.stack([-sum(1j * k[h] * _convolve(u_hat[h], u_hat[j]) for h in range(3)) for j in range(3)])
    g_ref = -sum(1j * k[h] * _convolve(th_hat, u_hat[h]) for h in range(3))

    f, g = nonlinear_coeffs(GRID, GRID.forward(u_phys), GRID.forward(th_phys))
    half = GRID.n // 2 + 1
    assert np.max(np.abs(f - f_ref[..., :half])) < 1e-12 * np.max(np.abs(f_ref))
    assert np.max(np.abs(g - g_ref[..., :half])) < 1e-12 * np.max(np.abs(g_ref))


def _band_limited_state(seed: int) -> State:
    rng = np.random.default_rng(seed)
    u = leray_project(SpectralVector.from_physical(GRID, _band_limited(rng, (3,))))
    theta = SpectralScalar.from_physical(GRID, _band_limited(rng))
    return State(u, theta, 0.5)


def test_pressure_gradient_is_curl_free():
    grad_p = recover_pressure_gradient(_band_limited_state(5))
    scale = np.max(np.abs(grad_p.coeffs))
    assert scale > 0
    assert np.max(np.abs(curl(grad_p).coeffs)) < 1e-12 * scale
    assert np.all(grad_p.coeffs[:, 0, 0, 0] == 0)


def test_momentum_balance_is_divergence_free():
    state = _band_limited_state(6)
    f, _ = nonlinear_terms(state)
    buoyancy = np.zeros_like(f.coeffs)
    buoyancy[E3] = state.theta.coeffs
    rhs = laplacian(state.u) + f + SpectralVector(GRID, buoyancy) - recover_pressure_gradient(state)
    scale = np.max(np.abs(f.coeffs)) + np.max(np.abs(state.theta.coeffs))
    assert np.max(np.abs(divergence(rhs).coeffs)) < 1e-12 * scale


def test_laplacian_of_single_mode():
    x, y, _ = GRID.coords
    s = SpectralScalar.from_physical(GRID, np.broadcast_to(np.cos(2 * x) * np.cos(y), GRID.shape).copy())
    assert np.max(np.abs(laplacian(s).physical() + 5.0 * s.physical())) < 1e-12
    v = _random_vector(11)
    assert np.allclose(laplacian(v).coeffs, -GRID.xi2 * v.coeffs)
