"""Physical parameters and unit systems for the 1D light-matter solver.

Geometry: a cigar-shaped two-component condensate treated in 1D along z.
The transverse profile is folded into an effective area A, so wavefunctions
are normalized to integral(|psi1|^2 + |psi2|^2) dz = 1 and the atom number
N_c is absorbed into the interaction strengths

    U_ij = 4 pi N_c hbar^2 a_ij / (m A)        [J m]

Light couples the two stable internal states |1>, |2> to a radiatively
decaying excited state (rate Gamma) on transitions with oscillator-strength
fractions f13, f23 and resonant cross-section scale sigma0.

Solvers run in trap units of the |1> potential: length sqrt(hbar/(m omega_z)),
time 1/omega_z, energy hbar*omega_z.  `InternalParams` carries the handful of
dimensionless numbers they need.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

hbar = 1.054571817e-34  # J s

# convenience masses (kg)
MASS_NA = 3.81754e-26   # sodium-23
MASS_RB = 1.44316e-25   # rubidium-87


@dataclass
class PhysicalParams:
    """Everything about the atoms, the trap, and the optical transitions (SI)."""
    atom_mass: float        # kg
    Nc: float               # condensate atom number
    omega_z: float          # axial trap angular frequency, rad/s
    area_A: float           # effective transverse area, m^2
    Gamma: float            # excited-state decay rate, rad/s
    sigma0: float           # resonant cross-section scale, m^2
    f13: float              # oscillator strength fraction, |1>-|3>
    f23: float              # oscillator strength fraction, |2>-|3>
    a11: float              # scattering lengths, m
    a12: float
    a22: float
    V2_offset: float = 0.0  # constant energy offset of the |2> potential, J


def derive_interaction_strengths(params):
    """Return (U11, U12, U22) in J m with the atom number folded in."""
    pref = 4.0 * np.pi * params.Nc * hbar**2 / (params.atom_mass * params.area_A)
    return pref * params.a11, pref * params.a12, pref * params.a22


def optical_density(params, psi1_ground, z):
    """Cumulative optical density D(z) on the probe transition.

    D(z) = (N_c f13 sigma0 / A) * integral_{z[0]}^{z} |psi1G|^2 dz'.

    With the normalization used here the total (last element) is simply
    N_c f13 sigma0 / A, independent of the density profile.
    """
    dens = np.abs(np.asarray(psi1_ground)) ** 2
    pref = params.Nc * params.f13 * params.sigma0 / params.area_A
    return pref * cumulative_trapezoid(dens, z, initial=0.0)


def absorption_coefficient(params, psi, z=None):
    """Local amplitude-absorption coefficient of the probe, 1/m.

    alpha_A = (N_c sigma0 / 2A) (f13 |psi1|^2 + f23 |psi2|^2)

    `psi` is anything with .psi1/.psi2 arrays (a spinor wavefunction); the
    z argument is accepted for symmetry with optical_density but unused.
    """
    pref = params.Nc * params.sigma0 / (2.0 * params.area_A)
    return pref * (params.f13 * np.abs(psi.psi1) ** 2
                   + params.f23 * np.abs(psi.psi2) ** 2)


@dataclass
class UnitSystem:
    """SI <-> internal conversions. Internal = trap units of the |1> potential."""
    length_scale: float   # m
    time_scale: float     # s
    energy_scale: float   # J

    @classmethod
    def trap_units(cls, atom_mass, omega_z):
        a_ho = np.sqrt(hbar / (atom_mass * omega_z))
        return cls(length_scale=a_ho, time_scale=1.0 / omega_z,
                   energy_scale=hbar * omega_z)

    # lengths / times / energies
    def length_to_internal(self, z):
        return np.asarray(z) / self.length_scale if np.ndim(z) else z / self.length_scale

    def length_from_internal(self, x):
        return x * self.length_scale

    def time_to_internal(self, t):
        return t / self.time_scale

    def time_from_internal(self, t):
        return t * self.time_scale

    def energy_to_internal(self, e):
        return e / self.energy_scale

    def energy_from_internal(self, e):
        return e * self.energy_scale

    # rates (Rabi frequencies, decay rates): rad/s <-> dimensionless
    def rate_to_internal(self, omega):
        return omega * self.time_scale

    def rate_from_internal(self, omega):
        return omega / self.time_scale

    # wavefunctions keep unit norm: psi_int = psi_si * sqrt(length)
    def wavefunction_to_internal(self, psi):
        return psi * np.sqrt(self.length_scale)

    def wavefunction_from_internal(self, psi):
        return psi / np.sqrt(self.length_scale)


@dataclass
class InternalParams:
    """Dimensionless parameter set consumed by the steppers and light solvers."""
    u11: float
    u12: float
    u22: float
    gamma: float       # Gamma / omega_z
    dp: float          # N_c f13 sigma0 / A  (probe-transition optical density)
    dc: float          # N_c f23 sigma0 / A
    v2_offset: float   # V2_offset / (hbar omega_z)


def internal_params(params, units=None):
    if units is None:
        units = UnitSystem.trap_units(params.atom_mass, params.omega_z)
    U11, U12, U22 = derive_interaction_strengths(params)
    e_l = units.energy_scale * units.length_scale
    return InternalParams(
        u11=U11 / e_l, u12=U12 / e_l, u22=U22 / e_l,
        gamma=params.Gamma * units.time_scale,
        dp=params.Nc * params.f13 * params.sigma0 / params.area_A,
        dc=params.Nc * params.f23 * params.sigma0 / params.area_A,
        v2_offset=params.V2_offset / units.energy_scale,
    )
