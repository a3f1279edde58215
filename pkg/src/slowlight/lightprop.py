"""Quasi-static propagation of the probe/coupling fields through the cloud.

The fields adjust to the instantaneous matter state on a light-crossing time
(~ps), far faster than anything else in the problem, so they are obtained by
marching the steady-state equations along z at each matter step:

  two-level (excited state eliminated):
      dOp/dz = -(N_c f13 sigma0 / 2A) (Op |psi1|^2 + Oc psi1* psi2)
      dOc/dz = -(N_c f23 sigma0 / 2A) (Oc |psi2|^2 + Op psi1 psi2*)

  with the excited amplitude kept explicitly:
      dOp/dz = -i (N_c f13 sigma0 / A) (Gamma/2) psi3 psi1*
      dOc/dz = -i (N_c f23 sigma0 / A) (Gamma/2) psi3 psi2*

Everything is unit-agnostic as long as grid, wavefunctions and rates are
consistent (SI or trap units): the prefactors N_c f sigma0 / A are
dimensionless and |psi|^2 dz is an invariant.  The three-level form needs the
decay rate in the same units as the Rabi frequencies (pass gamma explicitly
when working in trap units).

The two-level march is an explicit-midpoint (second order) recurrence; it is
sequential in z, so the hot loop is compiled with numba when available.  The
three-level right-hand side does not involve the fields at all, so that one
is a plain cumulative quadrature.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .fields import LightFields

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional speedup
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def deco(f):
            return f
        return deco


@dataclass
class BoundaryDrive:
    """Input Rabi frequencies at the entering edge of the box, as functions of t."""
    omega_p_in: Callable[[float], complex]
    omega_c_in: Callable[[float], complex]

    def at(self, t):
        return complex(self.omega_p_in(t)), complex(self.omega_c_in(t))


def _march_core(cpp, cpc, ccp, ccc, p0, c0, dz, out_p, out_c):
    # midpoint rule; coefficients at i+1/2 approximated by the i,i+1 average
    n = cpp.shape[0]
    p = p0
    c = c0
    out_p[0] = p
    out_c[0] = c
    for i in range(n - 1):
        k1p = cpp[i] * p + cpc[i] * c
        k1c = ccp[i] * p + ccc[i] * c
        pm = p + 0.5 * dz * k1p
        cm = c + 0.5 * dz * k1c
        m11 = 0.5 * (cpp[i] + cpp[i + 1])
        m12 = 0.5 * (cpc[i] + cpc[i + 1])
        m21 = 0.5 * (ccp[i] + ccp[i + 1])
        m22 = 0.5 * (ccc[i] + ccc[i + 1])
        p = p + dz * (m11 * pm + m12 * cm)
        c = c + dz * (m21 * pm + m22 * cm)
        out_p[i + 1] = p
        out_c[i + 1] = c


_march_py = _march_core
_march_jit = njit(cache=True)(_march_core) if HAVE_NUMBA else _march_core


def integrate_light_adiabatic(params, grid, psi, omega_p_in, omega_c_in,
                              use_numba=True):
    """Steady-state probe/coupling fields for the current spinor state.

    omega_p_in / omega_c_in are the boundary values at grid.z[0] (complex
    Rabi frequencies).  Returns LightFields on the full grid.
    """
    dp = params.Nc * params.f13 * params.sigma0 / params.area_A
    dc = params.Nc * params.f23 * params.sigma0 / params.area_A
    cpp = (-0.5 * dp) * np.abs(psi.psi1) ** 2 + 0j
    cpc = (-0.5 * dp) * (np.conj(psi.psi1) * psi.psi2)
    ccp = (-0.5 * dc) * (psi.psi1 * np.conj(psi.psi2))
    ccc = (-0.5 * dc) * np.abs(psi.psi2) ** 2 + 0j
    out_p = np.empty(grid.n_points, dtype=complex)
    out_c = np.empty(grid.n_points, dtype=complex)
    march = _march_jit if (use_numba and HAVE_NUMBA) else _march_py
    march(cpp, cpc, ccp, ccc, complex(omega_p_in), complex(omega_c_in),
          grid.dz, out_p, out_c)
    return LightFields(out_p, out_c)


def integrate_light_three_level(params, grid, psi3, omega_p_in, omega_c_in,
                                gamma=None):
    """Fields driven by the explicit excited-state coherence psi3.

    gamma defaults to params.Gamma (SI); pass the trap-unit value when grid
    and psi3 are in trap units.
    """
    if gamma is None:
        gamma = params.Gamma
    dp = params.Nc * params.f13 * params.sigma0 / params.area_A
    dc = params.Nc * params.f23 * params.sigma0 / params.area_A
    src_p = -1j * dp * 0.5 * gamma * psi3.psi3 * np.conj(psi3.psi1)
    src_c = -1j * dc * 0.5 * gamma * psi3.psi3 * np.conj(psi3.psi2)
    op = omega_p_in + cumulative_trapezoid(src_p, dx=grid.dz, initial=0.0)
    oc = omega_c_in + cumulative_trapezoid(src_c, dx=grid.dz, initial=0.0)
    return LightFields(op, oc)


def group_velocity(params, omega_c0, psi1G, z=None):
    """Local group velocity of a weak probe under a coupling field omega_c0.

    V_g(z) = (omega_c0^2 / Gamma) * A / (N_c f13 sigma0 |psi1G(z)|^2), m/s for
    SI inputs.  Diverges outside the cloud; returns inf where the density
    vanishes.
    """
    dens = np.abs(np.asarray(psi1G)) ** 2
    pref = (abs(omega_c0) ** 2 / params.Gamma) * params.area_A / (
        params.Nc * params.f13 * params.sigma0)
    with np.errstate(divide="ignore"):
        return np.where(dens > 0, pref / np.where(dens > 0, dens, 1.0), np.inf)


def write_pmt_trace(path, t, omega_p_out, omega_c_out):
    """Detector record at z_out: t, |Op|^2, |Oc|^2, arg Op  (SI)."""
    op = np.asarray(omega_p_out)
    oc = np.asarray(omega_c_out)
    np.savetxt(path,
               np.column_stack([t, np.abs(op) ** 2, np.abs(oc) ** 2,
                                np.angle(op)]),
               delimiter=",", comments="",
               header="t,probe_intensity,coupling_intensity,probe_phase",
               fmt="%.17e")


def read_pmt_trace(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1], data[:, 2], data[:, 3]
