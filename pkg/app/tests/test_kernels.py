# tests/test_kernels.py
import numpy as np
import pytest

from app.experiments.kernels import run_kernel_validation
from app.kernels.harmonic import harmonic_derivatives
from app.kernels.heat import (
    frac_heat_gradient,
    frac_heat_kernel,
    frac_heat_radial,
    heat_kernel,
    heat_kernel_gradient,
    poisson_kernel,
)
from app.kernels.lp_norms import kernel_lp_norm, kernel_lp_report, predicted_kernel_slope
from app.kernels.oseen import div_kernel_eval, fit_gaussian_envelope, oseen_eval, psi, psi_tilde
from app.kernels.quadrature import radial_integral
from app.models.schemas import ExperimentConfig
from app.utils.errors import NonIntegrableError, PreconditionError, QuadratureError

POINTS = np.array([[0.3, 0.1, -0.2], [1.0, 0.0, 0.0], [0.5, -1.5, 2.0], [2.0, 2.0, 1.0]])


def test_radial_integral_of_sine():
    value, est = radial_integral(lambda rho: np.sin(rho), np.pi)
    assert float(value) == pytest.approx(2.0, abs=1e-12)
    assert est <= 1e-12


def test_radial_integral_needs_two_levels():
    with pytest.raises(QuadratureError):
        radial_integral(lambda rho: np.sin(rho), np.pi, max_refinements=1)


def test_heat_kernel_rejects_nonpositive_time():
    with pytest.raises(PreconditionError):
        heat_kernel(0.0, [1.0, 0.0, 0.0])


def test_fractional_kernel_at_alpha_one_is_the_heat_kernel():
    direct = frac_heat_kernel(1.0, 0.7, POINTS)
    exact = heat_kernel(0.7, POINTS)
    assert np.allclose(direct, exact, rtol=1e-8, atol=1e-14)


def test_similarity_evaluation_matches_direct():
    a = frac_heat_kernel(0.75, 2.0, POINTS, method="direct")
    b = frac_heat_kernel(0.75, 2.0, POINTS, method="similarity")
    assert np.allclose(a, b, rtol=1e-7)


def test_half_laplacian_profile_is_the_poisson_kernel():
    r = np.array([0.5, 1.0, 2.0])
    pts = np.stack([np.zeros(3), np.zeros(3), r], axis=-1)
    assert np.allclose(frac_heat_radial(0.5, 1.0, r), poisson_kernel(1.0, pts), rtol=1e-6)


def test_harmonic_hessian_is_trace_free_and_rejects_origin():
    hess = harmonic_derivatives(POINTS, 2)
    assert np.max(np.abs(np.trace(hess, axis1=-2, axis2=-1))) < 1e-12
    with pytest.raises(PreconditionError):
        harmonic_derivatives([0.0, 0.0, 0.0], 1)


@pytest.mark.parametrize("t", [0.5, 1.0, 4.0])
def test_oseen_decomposition_agrees_with_quadrature(t):
    pts = POINTS * np.sqrt(t) * 2.0
    a = oseen_eval(t, pts, method="decomposition")
    b = oseen_eval(t, pts, method="quadrature")
    assert np.max(np.abs(a - b)) <= 1e-8 * np.max(np.abs(b))


def test_oseen_trace_is_twice_the_heat_kernel():
    k = oseen_eval(1.0, POINTS)
    assert np.allclose(np.trace(k, axis1=-2, axis2=-1), 2.0 * heat_kernel(1.0, POINTS), rtol=1e-8)


def test_div_kernel_is_divergence_free():
    f = div_kernel_eval(1.0, POINTS)
    contraction = np.einsum("...jjk->...k", f)
    assert np.max(np.abs(contraction)) <= 1e-8 * np.max(np.abs(f))


def test_remainder_profile_has_gaussian_envelope():
    rho = np.linspace(1.0, 6.0, 12)
    pts = np.stack([np.zeros_like(rho), np.zeros_like(rho), rho], axis=-1)
    mags = np.linalg.norm(psi(pts).reshape(rho.size, -1), axis=-1)
    big_c, c = fit_gaussian_envelope(rho, mags)
    assert c > 0
    assert np.all(mags <= big_c * np.exp(-c * rho ** 2) * (1 + 1e-12))


def test_heat_kernel_norms_match_closed_forms():
    assert kernel_lp_norm("G", 1.0, 1.0) == pytest.approx(1.0, rel=1e-8)
    assert kernel_lp_norm("G", 2.0, 2.0) == pytest.approx((16 * np.pi) ** -0.75, rel=1e-8)
    assert kernel_lp_norm("G", 2.0, np.inf) == pytest.approx((8 * np.pi) ** -1.5, rel=1e-8)


def test_oseen_norm_follows_self_similar_rate():
    ratio = kernel_lp_norm("K", 4.0, 2.0) / kernel_lp_norm("K", 1.0, 2.0)
    assert ratio == pytest.approx(4.0 ** predicted_kernel_slope("K", 2.0), rel=1e-6)


def test_oseen_kernel_is_not_integrable():
    with pytest.raises(NonIntegrableError) as info:
        kernel_lp_report("K", 1.0, 1.0)
    assert info.value.history


@pytest.mark.parametrize("kernel,p,slope", [("G", 2.0, -0.75), ("gradG", np.inf, -2.0), ("K", 1.0, 0.0), ("F", 1.0, -0.5)])
def test_predicted_kernel_slopes(kernel, p, slope):
    assert predicted_kernel_slope(kernel, p) == pytest.approx(slope)


@pytest.mark.parametrize("p", [1.5, 2.0, 6.0])
def test_div_kernel_norm_follows_self_similar_rate(p):
    ratio = kernel_lp_norm("F", 4.0, p) / kernel_lp_norm("F", 1.0, p)
    assert ratio == pytest.approx(4.0 ** predicted_kernel_slope("F", p), rel=1e-6)


@pytest.mark.parametrize("t", [0.5, 1.0, 4.0])
def test_div_kernel_decomposition_agrees_with_quadrature(t):
    pts = POINTS * np.sqrt(t) * 2.0
    a = div_kernel_eval(t, pts, method="decomposition")
    b = div_kernel_eval(t, pts, method="quadrature")
    assert np.max(np.abs(a - b)) <= 1e-8 * np.max(np.abs(b))


def test_div_remainder_profile_has_gaussian_envelope():
    rho = np.linspace(1.0, 6.0, 12)
    pts = np.stack([np.zeros_like(rho), rho / np.sqrt(2.0), rho / np.sqrt(2.0)], axis=-1)
    mags = np.linalg.norm(psi_tilde(pts).reshape(rho.size, -1), axis=-1)
    big_c, c = fit_gaussian_envelope(rho, mags)
    assert c > 0
    assert np.all(mags <= big_c * np.exp(-c * rho ** 2) * (1 + 1e-12))


def test_div_remainder_is_kernel_minus_harmonic_part():
    pts = POINTS[1:]
    r = np.linalg.norm(pts, axis=-1)
    direct = r[:, None, None, None] ** 4 * (div_kernel_eval(1.0, pts, method="quadrature")
                                             - harmonic_derivatives(pts, 3))
    assert np.max(np.abs(psi_tilde(pts) - direct)) <= 1e-8 * np.max(np.abs(direct))
    with pytest.raises(PreconditionError):
        psi_tilde(np.zeros((1, 3)))


def test_heat_gradient_matches_finite_differences():
    x = np.array([0.7, -0.4, 1.1])
    h = 1e-5
    numeric = np.array([(heat_kernel(1.5, x + h * e) - heat_kernel(1.5, x - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.allclose(heat_kernel_gradient(1.5, x), numeric, rtol=1e-7, atol=0.0)
    assert np.allclose(frac_heat_gradient(1.0, 1.5, x), numeric, rtol=1e-7, atol=0.0)


def test_fractional_gradient_is_radial():
    x = np.array([[0.0, 0.0, 0.0], [0.6, 0.8, 0.0], [0.0, 0.0, 1.0]])
    grad = frac_heat_gradient(0.75, 1.0, x)
    assert np.all(grad[0] == 0.0)
    # same radius, same magnitude, pointing inward
    assert np.linalg.norm(grad[1]) == pytest.approx(np.linalg.norm(grad[2]), rel=1e-10)
    assert np.dot(grad[1], x[1]) < 0


@pytest.mark.parametrize("p", [2.0, np.inf])
def test_heat_gradient_norm_follows_self_similar_rate(p):
    ratio = kernel_lp_norm("gradG", 4.0, p) / kernel_lp_norm("gradG", 1.0, p)
    assert ratio == pytest.approx(4.0 ** predicted_kernel_slope("gradG", p), rel=1e-6)


@pytest.mark.slow
def test_kernel_validation_checks_both_kernels():
    config = ExperimentConfig(kind="kernel-validation", diagnostics={"kernel": {
        "radii": [2.0, 3.0, 4.0], "directions": 2, "norm_times": [1.0, 2.0, 4.0],
        "norm_orders": [1.5, 6.0], "kernels": ["F"]}})
    report = run_kernel_validation(config)
    names = {c["name"]: c["pass"] for c in report["result"]["checks"]}
    assert names["div-quadrature-decomposition-agreement"]
    assert names["div-gaussian-envelope"]
    assert names["F-lp-rate:p=1.5"] and names["F-lp-rate:p=6"]
    assert report["status"] == "pass"
