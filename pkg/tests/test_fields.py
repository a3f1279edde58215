import numpy as np
import pytest

from slowlight import ConfigError
from slowlight.fields import (Grid1D, LightFields, SpinorWavefunction,
                              ThreeLevelWavefunction, read_snapshot,
                              write_snapshot)
from slowlight.lightprop import read_pmt_trace, write_pmt_trace


def make_grid(n=256, half=50e-6):
    return Grid1D(-half, half, n)


def test_grid_basics():
    g = make_grid(256, 50e-6)
    assert g.n_points == 256
    assert g.dz == pytest.approx(100e-6 / 256, abs=0)
    assert g.z[0] == -50e-6
    np.testing.assert_allclose(np.diff(g.z), g.dz)
    # spectral wavenumbers match numpy's layout
    np.testing.assert_allclose(
        g.k, 2 * np.pi * np.fft.fftfreq(256, d=g.dz), rtol=1e-13)


@pytest.mark.parametrize("n", [0, 1, 32, 48, 100, 1000])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ConfigError):
        Grid1D(-1e-6, 1e-6, n)


def test_grid_edges_from_density():
    g = make_grid(1024, 80e-6)
    R = 50e-6
    dens = np.clip(1 - (g.z / R) ** 2, 0, None)
    g.set_edges_from_density(dens)
    assert g.z_in == pytest.approx(-R, abs=3 * g.dz)
    assert g.z_out == pytest.approx(R, abs=3 * g.dz)
    inside = g.inside()
    assert inside.dtype == bool
    assert np.all(np.abs(g.z[inside]) <= R + g.dz)
    tighter = g.inside(margin=10e-6)
    assert tighter.sum() < inside.sum()


def test_grid_edges_need_density():
    g = make_grid()
    with pytest.raises(ConfigError):
        g.set_edges_from_density(np.zeros(g.n_points))


def test_grid_scaled():
    g = make_grid(256, 50e-6)
    g.set_edges_from_density(np.clip(1 - (g.z / 40e-6) ** 2, 0, None))
    s = g.scaled(1e-6)
    np.testing.assert_allclose(s.z, g.z / 1e-6)
    assert s.z_in == pytest.approx(g.z_in / 1e-6)
    assert s.dz == pytest.approx(g.dz / 1e-6)


def test_spinor_norm_and_density():
    g = make_grid()
    psi1 = np.exp(-g.z ** 2 / (2 * (10e-6) ** 2)).astype(complex)
    psi2 = 0.5j * psi1
    wf = SpinorWavefunction(psi1, psi2)
    np.testing.assert_allclose(wf.total_density(),
                               np.abs(psi1) ** 2 + np.abs(psi2) ** 2)
    expected = np.sum(wf.total_density()) * g.dz
    assert wf.norm(g.dz) == pytest.approx(expected, rel=1e-13)
    cp = wf.copy()
    cp.psi1[:] = 0
    assert wf.psi1[10] != 0


def test_sample_at_interpolates():
    g = make_grid(256, 1e-3)
    field = (2.0 + 3.0 * g.z / g.z[-1]) + 1j * (g.z / g.z[-1])
    lights = LightFields(field, 2 * field)
    zq = 0.5 * (g.z[100] + g.z[101])
    op, oc = lights.sample_at(g.z, zq)
    assert op == pytest.approx(0.5 * (field[100] + field[101]), rel=1e-12)
    assert oc == pytest.approx(op * 2, rel=1e-12)


def test_snapshot_roundtrip_spinor(tmp_path):
    g = make_grid(128)
    rng = np.random.default_rng(3)
    wf = SpinorWavefunction(rng.normal(size=128) + 1j * rng.normal(size=128),
                            rng.normal(size=128) + 1j * rng.normal(size=128))
    path = tmp_path / "snap.csv"
    write_snapshot(str(path), g, wf)
    z, back = read_snapshot(str(path))
    assert isinstance(back, SpinorWavefunction)
    np.testing.assert_allclose(back.psi1, wf.psi1, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(back.psi2, wf.psi2, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(z, g.z, rtol=1e-12, atol=1e-300)


def test_snapshot_roundtrip_three_level(tmp_path):
    g = make_grid(128)
    rng = np.random.default_rng(4)
    arrs = [rng.normal(size=128) + 1j * rng.normal(size=128)
            for _ in range(3)]
    wf = ThreeLevelWavefunction(*arrs)
    path = tmp_path / "snap3.csv"
    write_snapshot(str(path), g, wf)
    _, back = read_snapshot(str(path))
    assert isinstance(back, ThreeLevelWavefunction)
    np.testing.assert_allclose(back.psi3, wf.psi3, rtol=1e-12, atol=1e-300)


def test_read_snapshot_rejects_garbage(tmp_path):
    path = tmp_path / "garbage.csv"
    path.write_text("z,stuff\n1,2\n")
    with pytest.raises((ValueError, IndexError)):
        read_snapshot(str(path))


def test_pmt_trace_roundtrip(tmp_path):
    t = np.linspace(0, 1e-5, 50)
    op = np.exp(-((t - 5e-6) / 1e-6) ** 2) * np.exp(1j * 0.3)
    oc = np.full_like(t, 2.0) + 0j
    path = tmp_path / "pmt.csv"
    write_pmt_trace(str(path), t, op, oc)
    t2, ip, ic, phase = read_pmt_trace(str(path))
    np.testing.assert_allclose(t2, t, rtol=1e-12)
    np.testing.assert_allclose(ip, np.abs(op) ** 2, rtol=1e-12)
    np.testing.assert_allclose(ic, 4.0, rtol=1e-12)
    np.testing.assert_allclose(phase, 0.3, rtol=1e-10)
