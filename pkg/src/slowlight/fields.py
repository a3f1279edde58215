"""Grids, wavefunction containers, light-field containers, snapshot I/O.

Everything here is unit-agnostic: a Grid1D can hold meters (SI) or trap
lengths (internal), as long as wavefunctions and fields on it are consistent.
Snapshot CSV files are always written in SI.
"""

import numpy as np

from .errors import ConfigError


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


class Grid1D:
    """Uniform periodic grid on [z_min, z_max), FFT-ready.

    n_points must be a power of two (>= 64) so the split-step FFTs stay fast
    and reproducible.  z_in/z_out mark where the condensate effectively
    begins and ends; they default to the box edges until set from a density.
    """

    def __init__(self, z_min, z_max, n_points, z_in=None, z_out=None):
        if z_max <= z_min:
            raise ConfigError(f"empty grid: z_min={z_min}, z_max={z_max}")
        if not _is_power_of_two(int(n_points)) or n_points < 64:
            raise ConfigError(f"n_points must be a power of two >= 64, got {n_points}")
        self.z_min = float(z_min)
        self.z_max = float(z_max)
        self.n_points = int(n_points)
        self.dz = (self.z_max - self.z_min) / self.n_points
        self.z = self.z_min + self.dz * np.arange(self.n_points)
        self.k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dz)
        self.z_in = self.z_min if z_in is None else float(z_in)
        self.z_out = self.z_max if z_out is None else float(z_out)

    def scaled(self, factor):
        """New grid with all coordinates divided by `factor` (unit changes)."""
        return Grid1D(self.z_min / factor, self.z_max / factor, self.n_points,
                      z_in=self.z_in / factor, z_out=self.z_out / factor)

    def locate_edges(self, density, frac=1e-6):
        """(z_in, z_out) where `density` first/last exceeds frac * peak."""
        density = np.asarray(density)
        thr = frac * density.max()
        idx = np.nonzero(density > thr)[0]
        if len(idx) == 0:
            raise ConfigError("density is identically zero; cannot locate edges")
        return self.z[idx[0]], self.z[idx[-1]]

    def set_edges_from_density(self, density, frac=1e-6):
        self.z_in, self.z_out = self.locate_edges(density, frac)

    def inside(self, margin=0.0):
        """Boolean mask for z_in+margin <= z <= z_out-margin."""
        return (self.z >= self.z_in + margin) & (self.z <= self.z_out - margin)


def _interp_complex(z_query, z_grid, values):
    re = np.interp(z_query, z_grid, values.real)
    im = np.interp(z_query, z_grid, values.imag)
    return re + 1j * im


class SpinorWavefunction:
    """Two-component condensate wavefunction on a grid."""

    def __init__(self, psi1, psi2):
        self.psi1 = np.asarray(psi1, dtype=complex)
        self.psi2 = np.asarray(psi2, dtype=complex)

    def copy(self):
        return SpinorWavefunction(self.psi1.copy(), self.psi2.copy())

    def total_density(self):
        return np.abs(self.psi1) ** 2 + np.abs(self.psi2) ** 2

    def norm(self, dz):
        """integral (|psi1|^2 + |psi2|^2) dz on the grid."""
        return float(np.sum(self.total_density()) * dz)

    def sample_at(self, z_grid, z):
        """Linear interpolation of both components at position(s) z."""
        return (_interp_complex(z, z_grid, self.psi1),
                _interp_complex(z, z_grid, self.psi2))


class ThreeLevelWavefunction:
    """Adds the radiatively decaying excited-state amplitude psi3."""

    def __init__(self, psi1, psi2, psi3):
        self.psi1 = np.asarray(psi1, dtype=complex)
        self.psi2 = np.asarray(psi2, dtype=complex)
        self.psi3 = np.asarray(psi3, dtype=complex)

    def copy(self):
        return ThreeLevelWavefunction(self.psi1.copy(), self.psi2.copy(),
                                      self.psi3.copy())

    def total_density(self):
        return (np.abs(self.psi1) ** 2 + np.abs(self.psi2) ** 2
                + np.abs(self.psi3) ** 2)

    def norm(self, dz):
        return float(np.sum(self.total_density()) * dz)

    def sample_at(self, z_grid, z):
        return (_interp_complex(z, z_grid, self.psi1),
                _interp_complex(z, z_grid, self.psi2),
                _interp_complex(z, z_grid, self.psi3))


class LightFields:
    """Probe and coupling Rabi-frequency envelopes on a grid."""

    def __init__(self, omega_p, omega_c):
        self.omega_p = np.asarray(omega_p, dtype=complex)
        self.omega_c = np.asarray(omega_c, dtype=complex)

    def copy(self):
        return LightFields(self.omega_p.copy(), self.omega_c.copy())

    def peak(self):
        return max(np.abs(self.omega_p).max(), np.abs(self.omega_c).max())

    def sample_at(self, z_grid, z):
        return (_interp_complex(z, z_grid, self.omega_p),
                _interp_complex(z, z_grid, self.omega_c))


# ---------------------------------------------------------------------------
# snapshot I/O (CSV, SI units)

def write_snapshot(path, grid, wf):
    """CSV columns: z, Re/Im psi1, Re/Im psi2 [, Re/Im psi3]."""
    cols = [grid.z, wf.psi1.real, wf.psi1.imag, wf.psi2.real, wf.psi2.imag]
    header = "z,re_psi1,im_psi1,re_psi2,im_psi2"
    if hasattr(wf, "psi3"):
        cols += [wf.psi3.real, wf.psi3.imag]
        header += ",re_psi3,im_psi3"
    np.savetxt(path, np.column_stack(cols), delimiter=",",
               header=header, comments="", fmt="%.17e")


def read_snapshot(path):
    """Inverse of write_snapshot. Returns (z, wavefunction)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    z = data[:, 0]
    psi1 = data[:, 1] + 1j * data[:, 2]
    psi2 = data[:, 3] + 1j * data[:, 4]
    if data.shape[1] >= 7:
        return z, ThreeLevelWavefunction(psi1, psi2, data[:, 5] + 1j * data[:, 6])
    return z, SpinorWavefunction(psi1, psi2)
