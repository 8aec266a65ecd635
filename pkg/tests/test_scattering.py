import math
import warnings

import numpy as np
import pytest
from scipy import special

from nvscatter import scattering as sc
from nvscatter.errors import AnnulusError, InvalidInputError, NumericalError, SingularSystemError
from nvscatter.grid import make_grid
from nvscatter.identities import translation_phase
from nvscatter.potentials import gaussian, sample_potential, translate_spec
from nvscatter.scattering import (IncidentWave, LippmannSchwingerSolver, amplitude_norm, angle_grid,
                                  far_field_amplitude, far_field_fit, gaussian_born_amplitude,
                                  scattering_amplitude, solve_lippmann_schwinger)

G64 = make_grid(20.0, 64)


def test_incident_wave():
    k = IncidentWave.from_angle(4.0, math.pi / 2)
    np.testing.assert_allclose(k.k, [0.0, 2.0], atol=1e-15)
    assert k.theta == pytest.approx(math.pi / 2)
    with pytest.raises(InvalidInputError):
        IncidentWave(np.array([1.0, 0.5]), 1.0)
    with pytest.raises(InvalidInputError):
        IncidentWave.from_angle(-1.0, 0.0)


def test_zero_potential_exact():
    V = sample_potential(gaussian(0.0), G64)
    k = IncidentWave.from_angle(1.0, 0.7)
    sol = solve_lippmann_schwinger(V, k)
    x1, x2 = G64.mesh
    assert np.array_equal(sol.psi_plus.values, np.exp(1j * (k.k[0] * x1 + k.k[1] * x2)))
    assert np.all(far_field_amplitude(sol, angle_grid(16)).values == 0)
    assert far_field_fit(sol) == 0.0
    amp = scattering_amplitude(V, 1.0, M=16)
    assert amplitude_norm(amp) == 0.0


def test_energy_mismatch():
    solver = LippmannSchwingerSolver(sample_potential(gaussian(0.1), G64), 1.0)
    with pytest.raises(InvalidInputError):
        solver.solve(IncidentWave.from_angle(2.0, 0.0))
    with pytest.raises(InvalidInputError):
        LippmannSchwingerSolver(sample_potential(gaussian(0.1), G64), 1.0, method="qr")


def test_first_born_iterate():
    # independent oracle: direct sum of scipy's Hankel kernel against v exp(ikx)
    V = sample_potential(gaussian(1e-3), G64)
    sol = solve_lippmann_schwinger(V, IncidentWave.from_angle(1.0, 0.0))
    y1, y2 = G64.mesh
    w = V.values * np.exp(1j * y1) * G64.h**2
    pts = np.array([[0.5, 0.2], [3.1, -2.2], [-1.3, 0.05], [6.0, 6.0]])
    born = []
    for p in pts:
        r = np.hypot(p[0] - y1, p[1] - y2)
        born.append(np.sum(-0.25j * special.hankel1(0, r) * w))
    born = np.array(born)
    assert np.max(np.abs(sol.scattered_at(pts) - born) / np.abs(born)) <= 1e-2


def test_scattered_at_node_rejected():
    V = sample_potential(gaussian(0.1), G64)
    sol = solve_lippmann_schwinger(V, IncidentWave.from_angle(1.0, 0.0))
    with pytest.raises(InvalidInputError):
        sol.scattered_at([[0.0, 0.0]])


def test_dense_and_fft_routes_agree():
    g = make_grid(20.0, 96)
    V = sample_potential(gaussian(0.2), g)
    dense = LippmannSchwingerSolver(V, 1.0, method="dense")
    fft = LippmannSchwingerSolver(V, 1.0, method="fft")
    assert dense.method == "dense" and fft.method == "fft"
    th = angle_grid(8)
    a, b = dense.solve_thetas(th), fft.solve_thetas(th)
    assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(a))
    assert 1.0 < dense.condition_estimate < 1e3
    assert fft.iterations and max(fft.iterations) < 60


def test_support_restriction():
    V = sample_potential(gaussian(0.1), G64)
    s = LippmannSchwingerSolver(V, 1.0)
    assert s.n_active == np.count_nonzero(np.abs(V.values) > 1e-12 * 0.1)
    # exp(-r^2) > 1e-12 means r < sqrt(12 ln 10)
    assert s.support_radius < math.sqrt(12 * math.log(10))


def test_pde_residual_second_order():
    # the Nystrom solution satisfies the differential equation up to the
    # quadrature error, which a 5-point Laplacian sees as O(h^2)
    res = []
    for N in (64, 128):
        g = make_grid(20.0, N)
        V = sample_potential(gaussian(0.1), g)
        psi = solve_lippmann_schwinger(V, IncidentWave.from_angle(1.0, 0.3)).psi_plus.values
        lap = (np.roll(psi, 1, 0) + np.roll(psi, -1, 0) + np.roll(psi, 1, 1) + np.roll(psi, -1, 1) - 4 * psi) / g.h**2
        r = -lap + (V.values - 1.0) * psi
        x1, x2 = g.mesh
        res.append(np.max(np.abs(r[np.hypot(x1, x2) < 4])))
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.05)


def test_integral_equation_residual():
    g = make_grid(20.0, 96)
    V = sample_potential(gaussian(0.2), g)
    for method in ("dense", "fft"):
        s = LippmannSchwingerSolver(V, 1.0, method=method, tol=1e-10)
        rhs = s.incident_on_support([0.4])[:, 0]
        psi = s.solve_thetas([0.4])[:, 0]
        assert np.max(np.abs(s._matvec(psi) - rhs)) <= 1e-9


def test_refinement_of_psi():
    sols = []
    for N in (128, 256):
        g = make_grid(20.0, N)
        sols.append(solve_lippmann_schwinger(sample_potential(gaussian(0.1), g),
                                             IncidentWave.from_angle(1.0, 0.0)).psi_plus.values)
    assert np.max(np.abs(sols[1][::2, ::2] - sols[0])) <= 1e-4


def test_amplitude_refinement_cauchy():
    amps = [scattering_amplitude(sample_potential(gaussian(0.1), make_grid(20.0, N)), 1.0, M=16).samples
            for N in (48, 96, 192)]
    d1 = np.max(np.abs(amps[1] - amps[0]))
    d2 = np.max(np.abs(amps[2] - amps[1]))
    assert d2 <= d1 / 2


@pytest.fixture(scope="module")
def born_amp():
    V = sample_potential(gaussian(1e-3), make_grid(20.0, 128))
    return scattering_amplitude(V, 1.0, M=32)


def test_forward_and_back_scattering(born_amp):
    f = born_amp.samples
    fwd = 1e-3 / (4 * math.pi)
    assert fwd == pytest.approx(7.9577e-5, rel=1e-4)
    assert abs(f[0, 0]) == pytest.approx(fwd, rel=0.02)
    assert abs(f[0, 16]) == pytest.approx(fwd * math.exp(-1.0), rel=0.02)
    assert amplitude_norm(born_amp) == pytest.approx(fwd, rel=0.02)


def test_born_closed_form(born_amp):
    fb = gaussian_born_amplitude(1e-3, 1.0, 1.0, born_amp.theta, born_amp.theta_l)
    assert np.max(np.abs(born_amp.samples - fb)) / np.max(np.abs(fb)) <= 2e-2
    assert np.isfinite(born_amp.continuity_proxy())
    assert born_amp.M == 32 and born_amp.lam.shape == (32,)


def test_born_error_is_linear_in_amplitude():
    g = make_grid(20.0, 64)
    th = angle_grid(16)
    errs = []
    for A in (1e-2, 1e-3, 1e-4):
        f = scattering_amplitude(sample_potential(gaussian(A), g), 1.0, M=16).samples
        fb = gaussian_born_amplitude(A, 1.0, 1.0, th, th)
        errs.append(np.max(np.abs(f - fb)) / np.max(np.abs(fb)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[1] == pytest.approx(10, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(10, rel=0.1)


def test_translation_covariance():
    g = make_grid(20.0, 96)
    spec = gaussian(1e-3)
    tol = 1e-10
    f0 = scattering_amplitude(sample_potential(spec, g), 1.0, M=32, tol=tol)
    for y in ((1.0, 0.0), (0.3, 0.7)):
        fy = scattering_amplitude(sample_potential(translate_spec(spec, y), g), 1.0, M=32, tol=tol)
        k = np.stack([np.cos(f0.theta), np.sin(f0.theta)], -1)
        pred = f0.samples * translation_phase(y, k[:, None], k[None])
        assert np.max(np.abs(fy.samples - pred)) / np.max(np.abs(pred)) <= 10 * tol
        assert np.max(np.abs(np.abs(fy.samples) - np.abs(f0.samples))) <= 10 * tol * amplitude_norm(f0)


def test_born_amplitude_translation_phase():
    th = angle_grid(8)
    f0 = gaussian_born_amplitude(1.0, 1.0, 2.0, th, th)
    fy = gaussian_born_amplitude(1.0, 1.0, 2.0, th, th, center=(0.5, -1.0))
    k = math.sqrt(2.0) * np.stack([np.cos(th), np.sin(th)], -1)
    np.testing.assert_allclose(fy, f0 * translation_phase((0.5, -1.0), k[:, None], k[None]), atol=1e-15)


@pytest.fixture(scope="module")
def far_solution():
    g = make_grid(40.0, 512)
    V = sample_potential(gaussian(1e-3), g)
    return solve_lippmann_schwinger(V, IncidentWave.from_angle(1.0, 0.0))


def test_far_field_fit(far_solution):
    errs = [far_field_fit(far_solution, radius_fraction=r) for r in (0.3, 0.35, 0.4, 0.45)]
    assert errs[1] <= 5e-2
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_far_field_fit_detects_wrong_normalization(far_solution):
    row = far_field_amplitude(far_solution, angle_grid(64))
    doubled = sc.FarFieldRow(row.theta_k, row.angles, 2 * row.values, row.E)
    assert far_field_fit(far_solution, doubled) >= 0.5


def test_far_field_fit_annulus_errors(far_solution):
    with pytest.raises(AnnulusError):
        far_field_fit(far_solution, radius_fraction=0.2)
    with pytest.raises(AnnulusError):
        far_field_fit(far_solution, radius_fraction=0.5)
    wide = sample_potential(gaussian(1e-3, 2.0), make_grid(20.0, 64))
    sol = solve_lippmann_schwinger(wide, IncidentWave.from_angle(1.0, 0.0))
    with pytest.raises(AnnulusError):
        far_field_fit(sol)


def test_conditioning_guards(monkeypatch):
    V = sample_potential(gaussian(0.1), make_grid(20.0, 32))
    monkeypatch.setattr(sc, "COND_WARN", 1.0)
    with pytest.warns(sc.ResonanceWarning):
        LippmannSchwingerSolver(V, 1.0, method="dense")
    monkeypatch.setattr(sc, "COND_FAIL", 1.0)
    with pytest.raises(SingularSystemError):
        LippmannSchwingerSolver(V, 1.0, method="dense")


def test_no_warning_for_weak_potential():
    V = sample_potential(gaussian(0.1), make_grid(20.0, 32))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        LippmannSchwingerSolver(V, 1.0, method="dense")


def test_gmres_failure_reported():
    V = sample_potential(gaussian(0.5), make_grid(20.0, 32))
    s = LippmannSchwingerSolver(V, 1.0, method="fft", tol=1e-30)
    with pytest.raises(NumericalError):
        s.solve_thetas([0.0])


def test_amplitude_rejects_nan():
    with pytest.raises(NumericalError):
        sc.ScatteringAmplitude(1.0, angle_grid(4), np.full((4, 4), np.nan))
