"""Tests for readout predictions, fidelity norms and bandwidth estimates."""
import dataclasses

import numpy as np
import pytest
from scipy.integrate import quad

from slowlight import AnalysisError, ConfigError
from slowlight.fields import Grid1D, LightFields, SpinorWavefunction
from slowlight.groundstate import tf_radius
from slowlight.lightprop import integrate_light_adiabatic
from slowlight.params import PhysicalParams, optical_density
from slowlight.revival import (RevivedProbePrediction, adiabaton_total_field,
                               bandwidth_transmission, effective_potential,
                               ideal_revived_probe, map_output_to_space,
                               minimum_pulse_duration, output_error,
                               state_length_scale, write_error)

TWO_PI = 2 * np.pi


def slab_params(dp, f13=0.5, f23=0.5):
    area = 1e-10
    sigma0 = 1e-13
    return PhysicalParams(atom_mass=1e-26, Nc=dp * area / (f13 * sigma0),
                          omega_z=TWO_PI * 20.0, area_A=area,
                          Gamma=TWO_PI * 1e7, sigma0=sigma0, f13=f13, f23=f23,
                          a11=0.0, a12=0.0, a22=0.0)


# ---------------------------------------------------------------------------
# analytic stored state used for the phase-prediction oracle

L_BOX = 60e-6
Z0 = 30e-6
SIGMA = 8e-6


def analytic_state(grid, a2=0.5):
    nbar = 1.0 / L_BOX
    u = (grid.z - Z0) / SIGMA
    w = TWO_PI * (grid.z - Z0) / L_BOX
    r1 = np.sqrt(nbar) * (1 + 0.2 * np.cos(w))
    r2 = a2 * np.sqrt(nbar) * np.exp(-u ** 2)
    psi1 = r1 * np.exp(1j * 0.4 * np.sin(w))
    psi2 = r2 * np.exp(1j * 1.1 * np.tanh(u))
    return SpinorWavefunction(psi1, psi2)


def nl_phase_integrand(z, a2=0.5):
    nbar = 1.0 / L_BOX
    u = (z - Z0) / SIGMA
    w = TWO_PI * (z - Z0) / L_BOX
    r1sq = nbar * (1 + 0.2 * np.cos(w)) ** 2
    r2sq = (a2 ** 2) * nbar * np.exp(-2 * u ** 2)
    dphi21 = (1.1 / SIGMA) / np.cosh(u) ** 2 \
        - 0.4 * (TWO_PI / L_BOX) * np.cos(w)
    return r2sq / (r1sq + r2sq) * dphi21


def test_nonlinear_phase_against_quadrature():
    grid = Grid1D(0.0, L_BOX, 2048)
    pred = ideal_revived_probe(analytic_state(grid), 2e6, grid)
    for z_t in (15e-6, 25e-6, 30e-6, 40e-6, 52e-6):
        oracle, err = quad(nl_phase_integrand, grid.z[0], z_t,
                           limit=200, epsabs=1e-12)
        assert err < 1e-9
        got = np.interp(z_t, grid.z, pred.nonlinear_phase)
        assert got == pytest.approx(-oracle, abs=1e-6)


def test_revived_probe_amplitude_and_phase_conventions():
    grid = Grid1D(0.0, L_BOX, 2048)
    psi = analytic_state(grid)
    omega_c0 = 2e6 * np.exp(0.7j)
    pred = ideal_revived_probe(psi, omega_c0, grid)
    r1 = np.abs(psi.psi1)
    r2 = np.abs(psi.psi2)
    np.testing.assert_allclose(
        pred.amplitude, r2 / np.sqrt(r1 ** 2 + r2 ** 2) * abs(omega_c0),
        rtol=1e-12)
    # full complex prediction: r2/psi0 * Oc0 * e^{i(phi21 + pi + phi_nl)}
    u = (grid.z - Z0) / SIGMA
    w = TWO_PI * (grid.z - Z0) / L_BOX
    phi21 = 1.1 * np.tanh(u) - 0.4 * np.sin(w)
    expected = (r2 / np.sqrt(r1 ** 2 + r2 ** 2)) * abs(omega_c0) * np.exp(
        1j * (phi21 + np.pi + pred.nonlinear_phase + 0.7))
    core = r2 > 1e-3 * r2.max()
    np.testing.assert_allclose(pred.complex_field()[core], expected[core],
                               rtol=1e-6)


def test_nonlinear_phase_is_quadratic_in_amplitude():
    grid = Grid1D(0.0, L_BOX, 2048)
    peaks = {}
    for a2 in (0.02, 0.05, 0.1):
        pred = ideal_revived_probe(analytic_state(grid, a2), 1.0, grid)
        peaks[a2] = np.max(np.abs(pred.nonlinear_phase))
    assert peaks[0.02] < 1e-3
    assert peaks[0.1] / peaks[0.05] == pytest.approx(4.0, rel=5e-2)


def test_revival_singular_when_psi1_vanishes():
    grid = Grid1D(0.0, L_BOX, 512)
    nbar = 1.0 / L_BOX
    psi1 = np.sqrt(nbar) * np.tanh((grid.z - Z0) / 2e-6) + 0j
    psi2 = 0.3 * np.sqrt(nbar) * np.exp(-((grid.z - Z0) / 5e-6) ** 2) + 0j
    with pytest.raises(AnalysisError, match="singular"):
        ideal_revived_probe(SpinorWavefunction(psi1, psi2), 1.0, grid)


def test_map_output_to_space_uniform_slab():
    p = slab_params(dp=120.0)
    grid = Grid1D(0.0, 100e-6, 1024)
    nbar = 1.0 / (grid.dz * grid.n_points)
    psi1G = np.sqrt(nbar) * np.ones(grid.n_points)
    grid.set_edges_from_density(psi1G ** 2)
    omega_c0 = TWO_PI * 8e6
    t = np.linspace(0.0, 20e-6, 20000)
    tau_p = 3e-6
    pulse = lambda tt: np.exp(-((tt - 12e-6) / tau_p) ** 2) * np.exp(
        2j * np.pi * 1e4 * tt)
    t_origin = 2e-6
    mapped = map_output_to_space(p, grid, psi1G, omega_c0, t, pulse(t),
                                 t_origin)
    # uniform cloud: tau(z) is linear, so the map is an exact time reversal
    slope = (p.Gamma / omega_c0 ** 2) * (p.Nc * p.f13 * p.sigma0
                                         / p.area_A) * nbar
    expected = pulse(t_origin + slope * (grid.z_out - grid.z))
    np.testing.assert_allclose(mapped, expected,
                               atol=1e-6 * np.max(np.abs(expected)))


def test_bandwidth_transmission_pulse_route():
    p = slab_params(dp=390.0)
    omega_c0 = TWO_PI * 8e6
    for tau0, T_exp in ((1.0e-6, 0.71343), (1.5e-6, 0.83660),
                        (3.0e-6, 0.95036)):
        T, beta = bandwidth_transmission(p, tau0=tau0, D_interval=390.0,
                                         omega_c0=omega_c0)
        assert T == pytest.approx(T_exp, rel=1e-4)
        assert T == pytest.approx(1.0 / np.sqrt(1.0 + beta), rel=1e-12)


def test_bandwidth_transmission_pattern_route():
    p = slab_params(dp=300.0)
    T, beta = bandwidth_transmission(p, L_psi=10e-6, D_interval=308.76,
                                     alpha_a_peak=5.226126e6)
    assert beta == pytest.approx(0.11305, rel=1e-4)
    assert T == pytest.approx(1.0 / np.sqrt(1.0 + beta), rel=1e-12)


def test_bandwidth_transmission_argument_validation():
    p = slab_params(dp=100.0)
    with pytest.raises(ConfigError):
        bandwidth_transmission(p, tau0=1e-6, L_psi=1e-5, D_interval=100.0,
                               omega_c0=1e6, alpha_a_peak=1e6)
    with pytest.raises(ConfigError):
        bandwidth_transmission(p, D_interval=100.0)
    with pytest.raises(ConfigError):
        bandwidth_transmission(p, tau0=1e-6, omega_c0=1e6)
    with pytest.raises(ConfigError):
        bandwidth_transmission(p, tau0=1e-6, D_interval=100.0)
    with pytest.raises(ConfigError):
        bandwidth_transmission(p, L_psi=1e-5, D_interval=100.0)


def test_minimum_pulse_duration():
    p = slab_params(dp=390.0)
    tau_min = minimum_pulse_duration(p, 390.0, TWO_PI * 8e6)
    assert tau_min == pytest.approx(0.9822e-6, rel=1e-4)


def test_state_length_scale():
    assert state_length_scale(10e-6) == pytest.approx(10e-6, rel=1e-12, abs=0)
    combined = state_length_scale(10e-6, A_phi2=-0.2 * np.pi, L_phi2=5e-6,
                                  A_phi1=0.5 * np.pi, L_phi1=5e-6)
    assert combined == pytest.approx(3.19496e-6, rel=1e-4, abs=0)
    # a phase amplitude without its length scale contributes nothing
    assert state_length_scale(10e-6, A_phi2=0.3) == pytest.approx(
        10e-6, rel=1e-12, abs=0)


def flat_prediction(n, amp):
    return RevivedProbePrediction(amplitude=amp * np.ones(n),
                                  phase=np.zeros(n),
                                  nonlinear_phase=np.zeros(n),
                                  z=np.linspace(0, 1e-4, n))


def test_write_error_norm():
    pred = flat_prediction(200, 2.0)
    field = pred.complex_field()
    assert write_error(field, pred) == 0.0
    # a uniform offset: |(A+d) - A|^2 / (A+d)^2
    off = (2.0 + 0.3) * np.ones(200, complex)
    assert write_error(off, pred) == pytest.approx(0.09 / 2.3 ** 2, rel=1e-12)
    # a global phase is NOT divided out
    rot = field * np.exp(0.1j)
    assert write_error(rot, pred) == pytest.approx(
        2 * (1 - np.cos(0.1)), rel=1e-9)
    # mask restricts the comparison window
    half = np.zeros(200, bool)
    half[:100] = True
    mixed = field.copy()
    mixed[100:] = 99.0
    assert write_error(mixed, pred, mask=half) == 0.0
    with pytest.raises(AnalysisError):
        write_error(np.zeros(200), pred)


def test_output_error_norm():
    z = np.linspace(0, 1e-4, 128)
    a = np.full(128, 1.5 + 0.5j)
    assert output_error(a, a, z) == 0.0
    assert output_error(a, 1.2 * a, z) == pytest.approx(0.2 ** 2, rel=1e-12)


def test_effective_potential_flat_for_equal_scattering(na_cloud):
    veff = effective_potential(na_cloud.params, na_cloud.grid,
                               na_cloud.psi1G, na_cloud.ground.mu)
    R = tf_radius(na_cloud.params)
    bulk = np.abs(na_cloud.grid.z) < 0.8 * R
    assert np.max(np.abs(veff[bulk])) < 1e-3 * na_cloud.ground.mu


def test_effective_potential_hill(rb4_cloud):
    """a12 > a11 turns the cloud into a barrier of height (a12/a11 - 1) mu."""
    veff = effective_potential(rb4_cloud.params, rb4_cloud.grid,
                               rb4_cloud.psi1G, rb4_cloud.ground.mu)
    i0 = np.argmin(np.abs(rb4_cloud.grid.z))
    assert veff[i0] == pytest.approx(0.024 * rb4_cloud.ground.mu, rel=2e-2,
                                     abs=0)


def test_effective_potential_trough_curvature(rb4_cloud):
    """a12 < a11 digs a harmonic well: omega_eff = omega sqrt(1 - a12/a11)."""
    p = dataclasses.replace(rb4_cloud.params, a12=0.95 * rb4_cloud.params.a11)
    veff = effective_potential(p, rb4_cloud.grid, rb4_cloud.psi1G,
                               rb4_cloud.ground.mu)
    R = tf_radius(rb4_cloud.params)
    sel = np.abs(rb4_cloud.grid.z) < 0.3 * R
    c2 = np.polyfit(rb4_cloud.grid.z[sel], veff[sel], 2)[0]
    omega_eff = np.sqrt(2 * c2 / p.atom_mass)
    assert omega_eff == pytest.approx(p.omega_z * np.sqrt(1 - 0.95), rel=5e-2)
    # the offset term just shifts the curve
    q = dataclasses.replace(p, V2_offset=3e-31)
    shifted = effective_potential(q, rb4_cloud.grid, rb4_cloud.psi1G,
                                  rb4_cloud.ground.mu)
    np.testing.assert_allclose(shifted - veff, 3e-31, rtol=1e-9)


def test_adiabaton_invariant_constant_in_dark_slab():
    p = slab_params(dp=400.0, f13=0.5, f23=0.5)
    grid = Grid1D(0.0, 50e-6, 2048)
    nbar = 1.0 / (grid.dz * grid.n_points)
    psi1 = np.sqrt(nbar) * (1 + 0.3 * np.sin(TWO_PI * grid.z / 50e-6)) + 0j
    op_in, oc_in = 0.3 * np.exp(0.2j), 1.0
    psi = SpinorWavefunction(psi1, -(op_in / oc_in) * psi1)
    lights = integrate_light_adiabatic(p, grid, psi, op_in, oc_in)
    total = adiabaton_total_field(lights, p)
    # equal couplings: the invariant is the plain photon flux
    np.testing.assert_allclose(
        total, np.abs(lights.omega_p) ** 2 + np.abs(lights.omega_c) ** 2,
        rtol=1e-14)
    assert np.ptp(total) < 1e-12 * total[0]


def test_adiabaton_decay_tracks_absorbed_intensity():
    """d/dz of the invariant equals -(f23/f13) dp |Op psi1 + Oc psi2|^2."""
    p = slab_params(dp=550.0, f13=0.5, f23=0.2)
    grid = Grid1D(0.0, 50e-6, 4096)
    nbar = 1.0 / (grid.dz * grid.n_points)
    u = (grid.z - 30e-6) / 4e-6
    psi1 = np.sqrt(nbar) * np.ones(grid.n_points, complex)
    psi2 = 0.8 * np.sqrt(nbar) * np.exp(-u ** 2) * np.exp(
        0.3j * np.pi * np.tanh(u))
    psi = SpinorWavefunction(psi1, psi2)
    lights = integrate_light_adiabatic(p, grid, psi, 0.3 * np.exp(0.2j), 1.0)
    total = adiabaton_total_field(lights, p)
    grad = np.gradient(total, grid.dz)
    dp = p.Nc * p.f13 * p.sigma0 / p.area_A
    source = psi.psi1 * lights.omega_p + psi.psi2 * lights.omega_c
    expected = -(p.f23 / p.f13) * dp * np.abs(source) ** 2
    scale = np.max(np.abs(expected))
    sel = slice(10, -10)
    rms = np.sqrt(np.mean((grad[sel] - expected[sel]) ** 2))
    assert scale > 0
    assert rms < 5e-3 * scale
