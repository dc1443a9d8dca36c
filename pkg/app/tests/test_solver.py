# tests/test_solver.py
import numpy as np
import pytest

from app.diagnostics.norms import x_norm_coeffs, y_norm_coeffs
from app.experiments._common import relative_l2
from app.solver.duhamel import TimeQuadrature, duhamel_B, duhamel_Btilde, duhamel_E, duhamel_L
from app.solver.initial_data import build_temperature, build_velocity, gaussian
from app.solver.picard import PicardConfig, bilinear_constants, picard_solve
from app.solver.scaling import scaled_times, scaling_transform
from app.solver.state import FrozenHistory, LinearFlow, State, Trajectory
from app.solver.timestepper import timestep_solve
from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.spectral.operators import leray_coeffs, nonlinear_coeffs, vertical_leray_coeffs
from app.utils.errors import (
    ConvergenceError,
    InsufficientCoverageError,
    PreconditionError,
    ResolutionError,
    SolverError,
)

GRID = Grid(16, 2 * np.pi)


def _smooth_data(amp_u: float, amp_theta: float):
    """Low-mode divergence-free velocity (each component independent of its own axis) and temperature."""
    x, y, z = np.broadcast_arrays(*GRID.coords)
    u = amp_u * np.stack([np.sin(z), np.sin(x), np.sin(y)])
    theta = amp_theta * np.cos(x) * np.cos(y) * np.cos(z)
    return (SpectralVector.from_physical(GRID, u, divergence_free=True),
            SpectralScalar.from_physical(GRID, theta))


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def test_duhamel_L_of_frozen_temperature_matches_closed_form():
    _, theta0 = _smooth_data(0.0, 1.0)
    history = FrozenHistory(State(SpectralVector.zeros(GRID, divergence_free=True), theta0, 0.0), [0.0, 0.5, 1.0])
    out = duhamel_L(history, 1.0)
    lam = GRID.xi2
    factor = np.where(lam > 0, -np.expm1(-lam) / np.where(lam > 0, lam, 1.0), 1.0)
    expected = vertical_leray_coeffs(GRID, factor * theta0.coeffs)
    assert _rel(out.coeffs, expected) < 1e-10
    assert out.divergence_residual() < 1e-12


def test_duhamel_rejects_short_history():
    u0, theta0 = _smooth_data(0.1, 0.1)
    history = FrozenHistory(State(u0, theta0, 0.0), [0.0, 0.5])
    with pytest.raises(InsufficientCoverageError):
        duhamel_Btilde(history, history, 1.0)


def test_time_quadrature_panels_grade_toward_right_end():
    edges = TimeQuadrature(finest_panel=0.1).edges(0.0, 1.0)
    widths = np.diff(edges)
    assert edges[0] == 0.0 and edges[-1] == 1.0
    assert widths[-1] == pytest.approx(0.1)
    assert widths.min() == pytest.approx(0.1)
    assert widths.sum() == pytest.approx(1.0)


def test_picard_config_rejects_unsorted_times():
    with pytest.raises(PreconditionError):
        PicardConfig(times=(1.0, 0.5))


def test_linear_picard_reproduces_exact_linear_flow():
    _, theta0 = _smooth_data(0.0, 1.0)
    u0 = SpectralVector.zeros(GRID, divergence_free=True)
    traj = picard_solve(u0, theta0, PicardConfig(times=(0.5, 1.0), nonlinear=False))
    exact = LinearFlow(u0, theta0).state_at(1.0)
    assert _rel(traj.final().u.coeffs, exact.u.coeffs) < 1e-12
    assert _rel(traj.final().theta.coeffs, exact.theta.coeffs) < 1e-12


def test_classical_formula_matches_new_formula_without_flux():
    _, theta0 = _smooth_data(0.0, 1.0)
    u0 = SpectralVector.zeros(GRID, divergence_free=True)
    cfg = dict(times=(0.25, 0.5, 1.0), nonlinear=False)
    a = picard_solve(u0, theta0, PicardConfig(formula="new_b4", **cfg)).final()
    b = picard_solve(u0, theta0, PicardConfig(formula="classical", **cfg)).final()
    assert _rel(b.u.coeffs, a.u.coeffs) < 1e-10


def test_timestepper_is_exact_for_linear_buoyancy():
    _, theta0 = _smooth_data(0.0, 1.0)
    u0 = SpectralVector.zeros(GRID, divergence_free=True)
    traj = timestep_solve(u0, theta0, 0.05, 1.0, nonlinear=False)
    exact = LinearFlow(u0, theta0).state_at(1.0)
    assert traj.times == [0.0, 1.0]
    assert _rel(traj.final().u.coeffs, exact.u.coeffs) < 1e-12


def test_timestepper_hits_output_times():
    u0, theta0 = _smooth_data(0.01, 0.01)
    traj = timestep_solve(u0, theta0, 0.03, 0.5, output_times=[0.1, 0.25])
    assert traj.times == pytest.approx([0.0, 0.1, 0.25, 0.5])


def test_picard_and_timestepper_agree_for_small_data():
    u0, theta0 = _smooth_data(1e-3, 1e-3)
    times = tuple(np.linspace(0.05, 0.5, 10))
    picard = picard_solve(u0, theta0, PicardConfig(times=times))
    stepped = timestep_solve(u0, theta0, 0.005, 0.5, output_times=times)
    assert picard.provenance["iterations"] >= 2
    assert _rel(picard.final().u.coeffs, stepped.final().u.coeffs) < 1e-3
    assert _rel(picard.final().theta.coeffs, stepped.final().theta.coeffs) < 1e-3
    for st in picard.states:
        st.check_invariants()


def test_picard_reports_exhausted_iterations():
    u0, theta0 = _smooth_data(0.01, 0.01)
    with pytest.raises(ConvergenceError) as info:
        picard_solve(u0, theta0, PicardConfig(times=(0.5, 1.0), max_iterations=1))
    assert len(info.value.differences) == 1


def test_picard_fails_for_large_data():
    u0, theta0 = _smooth_data(50.0, 50.0)
    with pytest.raises(SolverError):
        picard_solve(u0, theta0, PicardConfig(times=tuple(np.linspace(0.1, 1.0, 10)), max_iterations=12))


def test_trajectory_rejects_sampling_outside_its_span():
    u0, theta0 = _smooth_data(0.01, 0.01)
    traj = Trajectory([State(u0, theta0, 0.0), State(u0, theta0, 1.0)])
    with pytest.raises(InsufficientCoverageError):
        traj.state_at(1.5)
    with pytest.raises(PreconditionError):
        Trajectory([State(u0, theta0, 1.0), State(u0, theta0, 0.5)])


def test_bilinear_constants_are_finite_and_positive():
    u0, theta0 = _smooth_data(0.01, 0.01)
    traj = picard_solve(u0, theta0, PicardConfig(times=(0.25, 0.5, 1.0)))
    consts = bilinear_constants(traj)
    assert consts.u_norm > 0 and consts.theta_norm > 0
    for v in (consts.b, consts.e, consts.btilde):
        assert np.isfinite(v) and v > 0


def test_initial_data_families():
    grid = Grid(32, 40.0)
    theta = build_temperature(grid, "gaussian", 2.0, 3.0)
    # mean mode carries the mass
    assert theta.coeffs[0, 0, 0].real * grid.length ** 3 == pytest.approx(2.0)
    dipole = build_temperature(grid, "dipole", 1.0, 3.0)
    assert abs(dipole.coeffs[0, 0, 0]) < 1e-15
    u = build_velocity(grid, "vortex", 1.0, 3.0)
    assert u.divergence_residual() < 1e-12
    with pytest.raises(PreconditionError):
        build_temperature(grid, "plasma", 1.0, 1.0)


def test_scaling_multiplies_coefficients_and_shrinks_the_box():
    grid = Grid(32, 40.0)
    theta0 = gaussian(grid, 1.0, 3.0)
    u0 = build_velocity(grid, "vortex", 1.0, 3.0)
    u1, th1 = scaling_transform(u0, theta0, 2.0)
    assert th1.grid.length == pytest.approx(20.0)
    assert np.allclose(th1.coeffs, 8.0 * theta0.coeffs)
    assert np.allclose(u1.coeffs, 2.0 * u0.coeffs)
    # heat flow commutes with the scaling
    assert np.allclose(th1.heat(scaled_times([4.0], 2.0)[0]).coeffs, 8.0 * theta0.heat(4.0).coeffs)


def test_scaling_refuses_lossy_resampling():
    grid = Grid(32, 20.0)
    theta0 = gaussian(grid, 1.0, 0.4)
    u0 = SpectralVector.zeros(grid, divergence_free=True)
    with pytest.raises(ResolutionError):
        scaling_transform(u0, theta0, 2.0, target_n=8)
    with pytest.raises(PreconditionError):
        scaling_transform(u0, theta0, 0.0)


def _frozen_weights(t: float):
    """int_0^t e^{-(t-s) lam} ds and int_0^t (t-s) e^{-(t-s) lam} ds per mode."""
    lam = GRID.xi2
    safe = np.where(lam > 0, lam, 1.0)
    c0 = np.where(lam > 0, -np.expm1(-lam * t) / safe, t)
    c1 = np.where(lam > 0, (1.0 - np.exp(-lam * t) * (1.0 + lam * t)) / safe ** 2, 0.5 * t * t)
    return c0, c1


def test_duhamel_terms_of_frozen_fields_match_closed_forms():
    u0, theta0 = _smooth_data(1.0, 1.0)
    history = FrozenHistory(State(u0, theta0, 0.0), [0.0, 0.5, 1.0])
    f, g = nonlinear_coeffs(GRID, u0.coeffs, theta0.coeffs)
    c0, c1 = _frozen_weights(1.0)
    assert np.max(np.abs(g)) > 1e-3

    assert _rel(duhamel_B(history, history, 1.0).coeffs, leray_coeffs(GRID, c0 * f)) < 1e-10
    assert _rel(duhamel_Btilde(history, history, 1.0).coeffs, c0 * g) < 1e-10
    e = duhamel_E(history, history, 1.0)
    assert _rel(e.coeffs, vertical_leray_coeffs(GRID, c1 * g)) < 1e-10
    assert e.divergence_residual() < 1e-12


def test_duhamel_L_of_heat_flow_is_linear_in_time():
    _, theta0 = _smooth_data(0.0, 1.0)
    flow = LinearFlow(SpectralVector.zeros(GRID, divergence_free=True), theta0)
    t = 0.75
    expected = t * GRID.heat_multiplier(t) * vertical_leray_coeffs(GRID, theta0.coeffs)
    assert _rel(duhamel_L(flow, t).coeffs, expected) < 1e-12


def test_duhamel_quadrature_error_drops_with_panel_refinement():
    u0, theta0 = _smooth_data(1.0, 1.0)
    flow = LinearFlow(u0, theta0)
    reference = duhamel_Btilde(flow, flow, 1.0, TimeQuadrature(8, 0.01, 4)).coeffs

    def error(quad):
        return _rel(duhamel_Btilde(flow, flow, 1.0, quad).coeffs, reference)

    midpoint = error(TimeQuadrature(1, 0.25))
    assert midpoint > 1e-8
    assert error(TimeQuadrature(1, 0.25, panel_subdivisions=2)) < 0.5 * midpoint
    assert error(TimeQuadrature(2, 0.25)) < 0.1 * midpoint


def test_x_and_y_norms_are_scaling_invariant():
    grid = Grid(32, 40.0)
    u0 = build_velocity(grid, "vortex", 1.0, 3.0)
    theta0 = build_temperature(grid, "gaussian", 1.0, 3.0)
    lam = 2.0
    u1, th1 = scaling_transform(u0, theta0, lam)
    original = LinearFlow(u0, theta0).state_at(4.0)
    scaled = LinearFlow(u1, th1).state_at(scaled_times([4.0], lam)[0])
    x0, x1 = x_norm_coeffs(grid, original.u.coeffs, 4.0).value, x_norm_coeffs(u1.grid, scaled.u.coeffs, 1.0).value
    y0, y1 = (y_norm_coeffs(grid, original.theta.coeffs, 4.0).value,
              y_norm_coeffs(th1.grid, scaled.theta.coeffs, 1.0).value)
    assert x0 > 0 and y0 > 0
    assert x1 == pytest.approx(x0, rel=1e-10)
    assert y1 == pytest.approx(y0, rel=1e-10)


def test_formula_gap_shrinks_as_picard_converges():
    u0, theta0 = _smooth_data(1e-2, 1e-2)
    times = tuple(np.linspace(0.025, 0.5, 20))

    def gap(tolerance):
        finals = {formula: picard_solve(u0, theta0, PicardConfig(times=times, formula=formula,
                                                                 tolerance=tolerance)).final()
                  for formula in ("classical", "new_b4")}
        return relative_l2(GRID, finals["classical"], finals["new_b4"])

    # one iteration: the formulas differ by the E term alone
    loose = gap(0.5)
    tight = gap(1e-10)
    assert loose > 0
    assert tight < 0.1 * loose


def test_picard_states_stay_real():
    u0, theta0 = _smooth_data(1e-2, 1e-2)
    final = picard_solve(u0, theta0, PicardConfig(times=(0.25, 0.5))).final()
    assert final.u.hermitian_defect() < 1e-12
    assert final.theta.hermitian_defect() < 1e-12
    coeffs = np.zeros(GRID.spectral_shape, dtype=np.complex128)
    coeffs[0, 0, 0] = 1j
    assert SpectralScalar(GRID, coeffs).hermitian_defect() > 0.5
