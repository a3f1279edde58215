import dataclasses

import numpy as np
import pytest
from scipy.constants import hbar

from slowlight import ConfigError, imaginary_time_relax
from slowlight.fields import Grid1D
from slowlight.groundstate import tf_radius, thomas_fermi, thomas_fermi_mu
from slowlight.scenarios import preset


@pytest.mark.parametrize("name,R_um", [
    ("usl_na_fig2", 50.130),
    ("gauss_write_fig9", 44.310),
    ("fringes_rb_fig4", 34.043),
    ("solitons_rb_fig6", 27.020),
])
def test_tf_radius(name, R_um):
    p = preset(name).to_params()
    assert tf_radius(p) == pytest.approx(R_um * 1e-6, rel=1e-4, abs=0)


def test_tf_mu_na():
    p = preset("usl_na_fig2").to_params()
    assert thomas_fermi_mu(p) == pytest.approx(8.351205e-31, rel=1e-5, abs=0)


def test_tf_needs_repulsion():
    p = dataclasses.replace(preset("usl_na_fig2").to_params(), a11=0.0)
    with pytest.raises(ConfigError):
        thomas_fermi_mu(p)


def test_tf_profile_is_inverted_parabola():
    p = preset("usl_na_fig2").to_params()
    grid = Grid1D(-80e-6, 80e-6, 2048)
    res = thomas_fermi(p, grid)
    dens = np.abs(res.psi1G) ** 2
    # normalized and peaked at the frozen central density
    assert np.sum(dens) * grid.dz == pytest.approx(1.0, rel=1e-6)
    assert dens.max() == pytest.approx(1.496107e4, rel=1e-4)
    R = tf_radius(p)
    outside = np.abs(grid.z) > R
    assert np.all(dens[outside] == 0.0)
    # parabolic in |z| < R: density at R/2 is 3/4 of the peak
    at_half = np.interp(R / 2, grid.z, dens)
    assert at_half == pytest.approx(0.75 * dens.max(), rel=1e-3)


def test_relaxation_matches_tf_in_the_bulk(na_cloud):
    p, grid = na_cloud.params, na_cloud.grid
    tf = thomas_fermi(p, grid)
    dens_tf = np.abs(tf.psi1G) ** 2
    dens = np.abs(na_cloud.psi1G) ** 2
    bulk = np.abs(grid.z) < 0.5 * tf_radius(p)
    np.testing.assert_allclose(dens[bulk], dens_tf[bulk], rtol=0.02)
    # kinetic energy only nudges the chemical potential
    assert na_cloud.ground.mu == pytest.approx(tf.mu, rel=5e-3, abs=0)
    assert na_cloud.ground.iterations > 0
    assert na_cloud.ground.residual < 1e-8
    assert np.sum(dens) * grid.dz == pytest.approx(1.0, rel=1e-10)


def test_relaxation_ideal_gas_limit():
    """With interactions off the ground state is the bare oscillator state."""
    p = dataclasses.replace(preset("usl_na_fig2").to_params(),
                            a11=0.0, a12=0.0, a22=0.0)
    a_ho = np.sqrt(hbar / (p.atom_mass * p.omega_z))
    grid = Grid1D(-8 * a_ho, 8 * a_ho, 256)
    res = imaginary_time_relax(p, grid, dtau=0.005, tol=1e-12)
    assert res.energy == pytest.approx(0.5 * hbar * p.omega_z, rel=1e-6, abs=0)
    assert res.mu == pytest.approx(0.5 * hbar * p.omega_z, rel=1e-4, abs=0)
    exact = np.exp(-grid.z ** 2 / (2 * a_ho ** 2)) / (np.pi * a_ho ** 2) ** 0.25
    np.testing.assert_allclose(res.psi1G, exact, atol=1e-6 * exact.max())


def test_relaxation_energy_monotone(na_cloud):
    """Resuming from a partial relaxation must keep lowering the energy."""
    p, grid = na_cloud.params, na_cloud.grid
    # start deliberately far from the ground state
    rng = np.random.default_rng(11)
    bad = np.abs(na_cloud.psi1G) * (1 + 0.2 * np.cos(grid.z / 5e-6))
    bad /= np.sqrt(np.sum(bad ** 2) * grid.dz)
    energies = []
    state = bad
    for _ in range(3):
        res = imaginary_time_relax(p, grid, tol=0.0, max_iter=40,
                                   initial=state)
        energies.append(res.energy)
        state = res.psi1G
    assert energies[0] > energies[1] > energies[2]
    assert energies[-1] >= na_cloud.ground.energy - 1e-40


def test_relaxation_converges_to_tolerance():
    p = preset("solitons_rb_fig6").to_params()
    grid = Grid1D(-60e-6, 60e-6, 512)
    res = imaginary_time_relax(p, grid, tol=1e-9)
    assert res.residual < 1e-9
    again = imaginary_time_relax(p, grid, tol=1e-9, initial=res.psi1G)
    # already converged: restart should give up almost immediately
    assert again.iterations <= res.iterations
