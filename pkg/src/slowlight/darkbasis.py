"""Dark/absorbed decomposition of the light fields and its propagation theory.

At each z the probe/coupling pair is rotated by the local spinor direction:

    Omega_D = (-psi2* Omega_p + psi1* Omega_c) / psi0      (dark: no absorption)
    Omega_A = ( psi1  Omega_p + psi2  Omega_c) / psi0      (absorbed)

with psi0^2 = |psi1|^2 + |psi2|^2.  The rotation is unitary, so it is its own
inverse transpose; where the cloud density vanishes the rotation is replaced
by the identity limit (Omega_D -> Omega_c, Omega_A -> Omega_p).

Propagating the steady-state field equations through this z-dependent
rotation gives

    d/dz (Omega_D, Omega_A)^T = G (Omega_D, Omega_A)^T
    G = [[-i alpha_l,              -conj(alpha_na_g) + conj(alpha_12)],
         [ alpha_na_g,              i alpha_l - alpha_a             ]]

where alpha_na_g = alpha_na * e^{i(phi1+phi2)}.  The coefficient arrays
returned by coupling_coefficients are written in terms of amplitudes and
phase gradients and do not carry that overall phase factor themselves; the
unit-modulus `gauge` array e^{i(phi1+phi2)} is tracked separately so the
propagation stays exact for complex wavefunctions.

When damping dominates (alpha_a >> |alpha_na|), the absorbed field slaves to
the dark one, Omega_A ~ (alpha_na_g/alpha_a) Omega_D, which holds once the
field has propagated one absorption length past the cloud edge (z > z_c with
integral_{z_in}^{z_c} alpha_a dz' = 1).  Substituting back gives a scalar
equation for the dark field alone (dark_propagation).
"""

from dataclasses import dataclass
import warnings

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import AnalysisError
from .fields import LightFields


@dataclass
class DarkAbsorbedFields:
    omega_d: np.ndarray
    omega_a: np.ndarray


@dataclass
class CouplingCoefficients:
    alpha_a: np.ndarray    # 1/length; damping of the absorbed channel
    alpha_12: np.ndarray   # complex; active when f13 != f23
    alpha_na: np.ndarray   # complex; relative-amplitude / phase-difference coupling
    alpha_l: np.ndarray    # real; common phase-gradient rotation
    gauge: np.ndarray = None  # e^{i(phi1+phi2)}, unit modulus (None -> 1)
    z: np.ndarray = None


def _psi0(psi, floor=1e-300):
    p0 = np.sqrt(np.abs(psi.psi1) ** 2 + np.abs(psi.psi2) ** 2)
    bare = p0 < 1e-12 * max(p0.max(), floor)
    return p0, bare


def to_dark_absorbed(psi, lights):
    p0, bare = _psi0(psi)
    safe = np.where(bare, 1.0, p0)
    od = (-np.conj(psi.psi2) * lights.omega_p + np.conj(psi.psi1) * lights.omega_c) / safe
    oa = (psi.psi1 * lights.omega_p + psi.psi2 * lights.omega_c) / safe
    od[bare] = lights.omega_c[bare]
    oa[bare] = lights.omega_p[bare]
    return DarkAbsorbedFields(omega_d=od, omega_a=oa)


def from_dark_absorbed(psi, da):
    p0, bare = _psi0(psi)
    safe = np.where(bare, 1.0, p0)
    op = (-psi.psi2 * da.omega_d + np.conj(psi.psi1) * da.omega_a) / safe
    oc = (psi.psi1 * da.omega_d + np.conj(psi.psi2) * da.omega_a) / safe
    op[bare] = da.omega_a[bare]
    oc[bare] = da.omega_d[bare]
    return LightFields(op, oc)


# ---------------------------------------------------------------------------
# spatial derivatives: spectral with a 2/3-Nyquist low-pass to keep the
# edge of a Thomas-Fermi profile from ringing into the coefficients

def spectral_derivative(f, dz, lowpass=2.0 / 3.0):
    n = len(f)
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=dz)
    mask = np.abs(k) <= lowpass * np.abs(k).max()
    g = np.fft.ifft(1j * k * mask * np.fft.fft(f))
    return g if np.iscomplexobj(f) else g.real


def phase_gradient(psi_component, dz, lowpass=2.0 / 3.0, floor_frac=1e-12):
    """d(arg psi)/dz computed as Im(psi* dpsi)/|psi|^2; zero where psi ~ 0."""
    dpsi = spectral_derivative(psi_component + 0j, dz, lowpass)
    dens = np.abs(psi_component) ** 2
    peak = dens.max()
    if peak == 0.0:
        return np.zeros_like(dens)
    good = dens >= floor_frac * peak
    out = np.zeros_like(dens)
    out[good] = (np.conj(psi_component[good]) * dpsi[good]).imag / dens[good]
    return out


def unwrap_phase_masked(values, amplitude, floor_frac=1e-12):
    """np.unwrap restricted to where the amplitude is meaningful.

    Outside the mask the phase is held at the nearest valid value, so the
    result is continuous and carries no noise from numerically-zero points.
    """
    amp = np.asarray(amplitude)
    valid = amp > floor_frac * amp.max()
    out = np.zeros(len(values))
    if not valid.any():
        return out
    idx = np.nonzero(valid)[0]
    ph = np.unwrap(np.asarray(values)[idx])
    out[idx] = ph
    out[: idx[0]] = ph[0]
    out[idx[-1] + 1:] = ph[-1]
    # fill interior gaps by the previous valid value
    last = ph[0]
    for i in range(idx[0], idx[-1] + 1):
        if valid[i]:
            last = out[i]
        else:
            out[i] = last
    return out


def coupling_coefficients(params, psi, grid):
    """Local coefficients of the dark/absorbed propagation equations.

    Units follow the inputs (1/m when grid and psi are SI).
    """
    r1 = np.abs(psi.psi1)
    r2 = np.abs(psi.psi2)
    n1 = r1**2
    n2 = r2**2
    p02 = n1 + n2
    pref = params.Nc * params.sigma0 / (2.0 * params.area_A)
    alpha_a = pref * (params.f13 * n1 + params.f23 * n2)
    alpha_12 = pref * (params.f13 - params.f23) * psi.psi1 * psi.psi2

    dr1 = spectral_derivative(r1, grid.dz)
    dr2 = spectral_derivative(r2, grid.dz)
    g1 = phase_gradient(psi.psi1, grid.dz)
    g2 = phase_gradient(psi.psi2, grid.dz)

    bare = p02 < 1e-24 * p02.max()
    safe = np.where(bare, 1.0, p02)
    alpha_na = ((r1 * dr2 - r2 * dr1) + 1j * (g2 - g1) * r1 * r2) / safe
    alpha_l = (n1 * g1 + n2 * g2) / safe
    alpha_na[bare] = 0.0
    alpha_l[bare] = 0.0

    r1r2 = r1 * r2
    tiny = r1r2 < 1e-12 * max(r1r2.max(), 1e-300)
    gauge = np.where(tiny, 1.0 + 0j,
                     psi.psi1 * psi.psi2 / np.where(tiny, 1.0, r1r2))
    return CouplingCoefficients(alpha_a=alpha_a, alpha_12=alpha_12,
                                alpha_na=alpha_na, alpha_l=alpha_l,
                                gauge=gauge, z=grid.z.copy())


def z_critical(params, psi1, grid):
    """Depth at which the absorbed field has seen one absorption length.

    Solves integral_{z[0]}^{z_c} alpha_a dz' = 1 for the |1>-only cloud
    (the region in front of the cloud contributes nothing).
    """
    pref = params.Nc * params.sigma0 * params.f13 / (2.0 * params.area_A)
    acc = cumulative_trapezoid(pref * np.abs(psi1) ** 2, grid.z, initial=0.0)
    if acc[-1] < 1.0:
        raise AnalysisError(
            f"cloud is optically thin (total = {acc[-1]:.3g} absorption lengths)")
    i = int(np.searchsorted(acc, 1.0))
    # linear interpolation inside the crossing interval
    z0, z1 = grid.z[i - 1], grid.z[i]
    a0, a1 = acc[i - 1], acc[i]
    return z0 + (1.0 - a0) / (a1 - a0) * (z1 - z0)


def absorbed_estimate(coeffs, omega_d, ratio_warn=0.3):
    """Slaved absorbed field (alpha_na_g/alpha_a) * Omega_D.

    Warns when the coupling-to-damping ratio gets large enough that slaving
    is questionable.
    """
    floor = 1e-8 * coeffs.alpha_a.max()
    ok = coeffs.alpha_a > floor
    ratio = np.zeros_like(coeffs.alpha_na)
    ratio[ok] = coeffs.alpha_na[ok] / coeffs.alpha_a[ok]
    if coeffs.gauge is not None:
        ratio = ratio * coeffs.gauge
    worst = np.abs(ratio[ok]).max() if ok.any() else 0.0
    if worst > ratio_warn:
        warnings.warn(
            f"absorbed-field slaving is marginal: max|alpha_na/alpha_a| = {worst:.3g}",
            stacklevel=2)
    return ratio * omega_d


def dark_propagation(coeffs, omega_d_in):
    """Dark field across the cloud from its value at z[0].

    Omega_D(z) = Omega_D_in * exp( integral [ (-|a_na|^2 + conj(a_12) g a_na)/a_a
                                              - i a_l ] dz' )
    """
    floor = 1e-8 * coeffs.alpha_a.max()
    ok = coeffs.alpha_a > floor
    gauge = coeffs.gauge if coeffs.gauge is not None else np.ones_like(coeffs.alpha_a)
    bracket = np.zeros(len(coeffs.alpha_a), dtype=complex)
    num = (-np.abs(coeffs.alpha_na[ok]) ** 2
           + np.conj(coeffs.alpha_12[ok]) * gauge[ok] * coeffs.alpha_na[ok])
    bracket[ok] = num / coeffs.alpha_a[ok]
    bracket -= 1j * coeffs.alpha_l
    phase = cumulative_trapezoid(bracket, coeffs.z, initial=0.0)
    return omega_d_in * np.exp(phase)


def write_coupling_csv(path, coeffs):
    np.savetxt(path, np.column_stack([
        coeffs.z, coeffs.alpha_a,
        coeffs.alpha_12.real, coeffs.alpha_12.imag,
        coeffs.alpha_na.real, coeffs.alpha_na.imag,
        coeffs.alpha_l]),
        delimiter=",", comments="", fmt="%.17e",
        header="z,alpha_a,re_alpha_12,im_alpha_12,re_alpha_na,im_alpha_na,alpha_l")
