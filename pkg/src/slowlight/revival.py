"""Readout predictions and fidelity metrics for stored light.

When the coupling field is switched back on, the stored spinor pattern maps
back onto a revived probe.  In the ideal (dark, fully damped) limit:

    |Omega_p_rev(z)| = (|psi2|/psi0) * Omega_c0
    arg Omega_p_rev(z) = (phi2 - phi1) + pi + phi_nl(z)

where the accumulated propagation phase has the closed form

    phi_nl(z) = - integral_{z_in}^{z} (|psi2|^2/psi0^2) d(phi2-phi1)/dz' dz'
              =  phi1(z) - integral alpha_l dz'   (phi1(z_in)=0)

(second order in the stored amplitude).  The revived coupling field picks up
exactly the same phi_nl, which makes a handy cross-check.

The revived pattern then drains out of the cloud like an ordinary ultra-slow
pulse; comparing the recorded output, mapped back onto z through the delay
function tau(z), against the revived pattern gives the readout error E_out.
The mapping and the bandwidth transmission share the same beta parameter:
T = 1/sqrt(1+beta), with beta = 4 D (Gamma/(tau0 Omega_c0^2))^2 for an input
pulse of duration tau0, or beta = Delta D / (L_psi alpha_a)^2 for a stored
pattern of length scale L_psi.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .darkbasis import phase_gradient, unwrap_phase_masked
from .errors import AnalysisError, ConfigError
from .params import derive_interaction_strengths, optical_density


@dataclass
class RevivedProbePrediction:
    amplitude: np.ndarray        # |Omega_p|, units of omega_c0
    phase: np.ndarray            # unwrapped total phase, rad
    nonlinear_phase: np.ndarray  # phi_nl alone, rad
    z: np.ndarray = None

    def complex_field(self):
        return self.amplitude * np.exp(1j * self.phase)


@dataclass
class FidelityReport:
    e_write: float
    e_out: float
    beta: float
    transmission_T: float
    e_write_zc: float = None   # restricted to z > z_c


def ideal_revived_probe(psi, omega_c0, grid):
    """Prediction for the revived probe from the spinor state alone."""
    r1 = np.abs(psi.psi1)
    r2 = np.abs(psi.psi2)
    p02 = r1**2 + r2**2
    inside = p02 > 1e-12 * p02.max()
    if np.any(r2[inside] ** 2 > (1.0 - 1e-9) * p02[inside]):
        raise AnalysisError(
            "revival is singular: |psi2| -> psi0 (no |1> amplitude left)")

    w = psi.psi2 * np.conj(psi.psi1)          # r1 r2 e^{i(phi2-phi1)}
    amp_w = np.abs(w)
    phi21 = unwrap_phase_masked(np.angle(w), amp_w)

    # d(phi2-phi1)/dz without any unwrapping
    dphi21 = phase_gradient(psi.psi2, grid.dz) - phase_gradient(psi.psi1, grid.dz)
    weight = np.zeros_like(p02)
    weight[inside] = r2[inside] ** 2 / p02[inside]
    phi_nl = -cumulative_trapezoid(weight * dphi21, grid.z, initial=0.0)

    amp = np.zeros_like(p02)
    amp[inside] = r2[inside] / np.sqrt(p02[inside]) * abs(omega_c0)
    phase = phi21 + np.pi + phi_nl + np.angle(complex(omega_c0))
    return RevivedProbePrediction(amplitude=amp, phase=phase,
                                  nonlinear_phase=phi_nl, z=grid.z.copy())


def map_output_to_space(params, grid, psi1G, omega_c0, trace_t, trace_omega_p,
                        t_origin):
    """Project the recorded output pulse back onto the cloud.

    Light sitting at z at the map origin time arrives at the detector after
    the residual group delay tau(z_out) - tau(z), so the expected revived
    pattern is the time series read at t_origin + tau(z_out) - tau(z).
    """
    tau = (params.Gamma / abs(omega_c0) ** 2) * optical_density(params, psi1G, grid.z)
    tau_out = np.interp(grid.z_out, grid.z, tau)
    t_map = t_origin + tau_out - tau
    re = np.interp(t_map, trace_t, np.real(trace_omega_p), left=0.0, right=0.0)
    im = np.interp(t_map, trace_t, np.imag(trace_omega_p), left=0.0, right=0.0)
    return re + 1j * im


def bandwidth_transmission(params, tau0=None, L_psi=None, D_interval=None,
                           omega_c0=None, alpha_a_peak=None):
    """(T, beta) for either an input pulse (tau0) or a stored pattern (L_psi).

    beta = 4 * D_interval * (Gamma / (tau0 |Omega_c0|^2))^2          [pulse]
    beta = D_interval / (L_psi * alpha_a_peak)^2                     [pattern]
    T = 1 / sqrt(1 + beta)
    """
    if (tau0 is None) == (L_psi is None):
        raise ConfigError("give exactly one of tau0 / L_psi")
    if D_interval is None:
        raise ConfigError("D_interval is required")
    if tau0 is not None:
        if omega_c0 is None:
            raise ConfigError("the pulse route needs omega_c0")
        beta = 4.0 * D_interval * (params.Gamma / (tau0 * abs(omega_c0) ** 2)) ** 2
    else:
        if alpha_a_peak is None:
            raise ConfigError("the pattern route needs alpha_a_peak")
        beta = D_interval / (L_psi * alpha_a_peak) ** 2
    return 1.0 / np.sqrt(1.0 + beta), beta


def minimum_pulse_duration(params, D_total, omega_c0):
    """Shortest pulse that still fits the transparency bandwidth."""
    return 2.0 * np.sqrt(D_total) * params.Gamma / abs(omega_c0) ** 2


def state_length_scale(L2, A_phi2=0.0, L_phi2=None, A_phi1=0.0, L_phi1=None):
    """Combined length scale of a stored pattern with phase features."""
    acc = L2 ** -2.0
    if A_phi2 and L_phi2:
        acc += abs(A_phi2) * L_phi2 ** -2.0
    if A_phi1 and L_phi1:
        acc += abs(A_phi1) * L_phi1 ** -2.0
    return acc ** -0.5


def _ratio_error(field, reference, z, mask):
    num = np.trapezoid(np.abs(field - reference)[mask] ** 2, z[mask])
    den = np.trapezoid(np.abs(field)[mask] ** 2, z[mask])
    if den == 0:
        raise AnalysisError("revived field vanishes on the comparison region")
    return float(num / den)


def write_error(omega_p_rev, prediction, z=None, mask=None):
    """Normalized L2 mismatch between the simulated revived probe and the
    ideal prediction (amplitude and phase, phi_nl included)."""
    z = prediction.z if z is None else z
    if mask is None:
        mask = np.ones(len(z), dtype=bool)
    return _ratio_error(np.asarray(omega_p_rev), prediction.complex_field(),
                        z, mask)


def output_error(omega_p_rev, mapped_output, z, mask=None):
    """Same norm against the recorded output pulse mapped back onto z."""
    if mask is None:
        mask = np.ones(len(z), dtype=bool)
    return _ratio_error(np.asarray(omega_p_rev), np.asarray(mapped_output),
                        z, mask)


def effective_potential(params, grid, psi1G, mu):
    """Potential seen by the stored component on top of the |1> cloud:
    V2 + U12 |psi1G|^2 - mu  (flat when a12 = a11, hill/trough otherwise)."""
    _, U12, _ = derive_interaction_strengths(params)
    v2 = 0.5 * params.atom_mass * params.omega_z**2 * grid.z**2 + params.V2_offset
    return v2 + U12 * np.abs(psi1G) ** 2 - mu


def adiabaton_total_field(lights, params):
    """Invariant intensity combination |Oc|^2 + (f23/f13)|Op|^2.

    Constant in z while the matter follows the fields adiabatically; reduces
    to the photon flux |Op|^2 + |Oc|^2 when the two transitions couple
    equally.
    """
    return (np.abs(lights.omega_c) ** 2
            + (params.f23 / params.f13) * np.abs(lights.omega_p) ** 2)
