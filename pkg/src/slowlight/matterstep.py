"""Split-step time evolution of the condensate under the light fields.

All functions here work in trap units (InternalParams, internal grid,
dimensionless Rabi frequencies, dimensionless dt).  The scheme is Strang:
half a kinetic step in Fourier space, a pointwise stage with the light
fields frozen, half a kinetic step.

Pointwise stage, two-level: the local 2x2 generator

    M = -i dt (H_r - i K),   H_r = diag(h1, h2),
    K = (1/2 gamma) * [[|Op|^2, Op* Oc], [Oc* Op, |Oc|^2]]

is exponentiated exactly with the closed 2x2 formula (series branch for a
small discriminant).  h_i are the trap + mean-field energies.  When the
lights are on, a midpoint-density predictor keeps the stage second order in
dt; with the lights off the densities are invariant and the stage is an
exact phase rotation.

Pointwise stage, three-level: a batched 3x3 matrix exponential
(Taylor to 6th order with adaptive scaling-and-squaring) of

    C = [[h1, 0, Op*/2], [0, h2, Oc*/2], [Op/2, Oc/2, -i gamma/2]]

The excited amplitude psi3 carries no kinetic, trap, or interaction terms.
"""

import cmath

import numpy as np

from .errors import NumericalError
from .fields import SpinorWavefunction, ThreeLevelWavefunction

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def deco(f):
            return f
        return deco

from dataclasses import dataclass


@dataclass
class StepperConfig:
    """Time steps in trap units; scheme is kept for provenance in manifests."""
    dt_light: float
    dt_storage: float
    scheme: str = "strang"


# --------------------------------------------------------------------------
# kinetic factors (cached: the same dt is reused for thousands of steps)

_KIN_CACHE = {}


def _kinetic_half(grid, dt):
    key = (grid.n_points, grid.dz, dt)
    fac = _KIN_CACHE.get(key)
    if fac is None:
        if len(_KIN_CACHE) > 32:
            _KIN_CACHE.clear()
        fac = np.exp(-0.25j * grid.k**2 * dt)  # exp(-i (k^2/2) dt/2)
        _KIN_CACHE[key] = fac
    return fac


def _apply_kinetic(psi_arr, fac):
    return np.fft.ifft(fac * np.fft.fft(psi_arr))


def trap_potentials(ip, grid):
    """(v1, v2) on the internal grid: harmonic |1> trap, offset |2> trap."""
    v1 = 0.5 * grid.z**2
    return v1, v1 + ip.v2_offset


def check_light_step(lights, dt, limit=0.5):
    """Refuse steps that under-resolve the Rabi dynamics."""
    peak = lights.peak()
    if peak * dt > limit:
        raise NumericalError(
            f"light step too coarse: |Omega|*dt = {peak * dt:.3g} > {limit}")


def adiabatic_excited_amplitude(psi, lights, gamma):
    """psi3 when the excited state follows the fields: -(i/gamma)(Op psi1 + Oc psi2)."""
    return (-1j / gamma) * (lights.omega_p * psi.psi1 + lights.omega_c * psi.psi2)


# --------------------------------------------------------------------------
# two-level pointwise stage

def _stage_two_level_core(psi1, psi2, p, c, v1, v2, u11, u12, u22, inv2g,
                          dt, predict):
    n = psi1.shape[0]
    for i in range(n):
        a1 = psi1[i]
        a2 = psi2[i]
        pi = p[i]
        ci = c[i]
        k11 = inv2g * (pi.real * pi.real + pi.imag * pi.imag)
        k22 = inv2g * (ci.real * ci.real + ci.imag * ci.imag)
        k12 = inv2g * np.conj(pi) * ci
        k21 = np.conj(k12)
        n1 = a1.real * a1.real + a1.imag * a1.imag
        n2 = a2.real * a2.real + a2.imag * a2.imag
        h1 = v1[i] + u11 * n1 + u12 * n2
        h2 = v2[i] + u12 * n1 + u22 * n2
        if predict:
            # half step to get midpoint densities
            b1, b2 = _expmv2(h1, h2, k11, k12, k21, k22, a1, a2, 0.5 * dt)
            n1 = b1.real * b1.real + b1.imag * b1.imag
            n2 = b2.real * b2.real + b2.imag * b2.imag
            h1 = v1[i] + u11 * n1 + u12 * n2
            h2 = v2[i] + u12 * n1 + u22 * n2
        psi1[i], psi2[i] = _expmv2(h1, h2, k11, k12, k21, k22, a1, a2, dt)


def _expmv2_core(h1, h2, k11, k12, k21, k22, a1, a2, dt):
    # exp(-i dt H_r - dt K) applied to (a1, a2), exact 2x2 exponential
    m11 = -1j * dt * h1 - dt * k11
    m22 = -1j * dt * h2 - dt * k22
    m12 = -dt * k12
    m21 = -dt * k21
    tr2 = 0.5 * (m11 + m22)
    d = 0.5 * (m11 - m22)
    q2 = d * d + m12 * m21
    q = cmath.sqrt(q2)
    if abs(q) > 1e-6:
        ch = cmath.cosh(q)
        sh = cmath.sinh(q) / q
    else:
        ch = 1.0 + q2 / 2.0 + q2 * q2 / 24.0
        sh = 1.0 + q2 / 6.0 + q2 * q2 / 120.0
    e = cmath.exp(tr2)
    b1 = e * ((ch + sh * d) * a1 + sh * m12 * a2)
    b2 = e * (sh * m21 * a1 + (ch - sh * d) * a2)
    return b1, b2


if HAVE_NUMBA:
    _expmv2 = njit(cache=True, inline="always")(_expmv2_core)
    _stage_two_level_jit = njit(cache=True)(_stage_two_level_core)
else:
    _expmv2 = _expmv2_core
    _stage_two_level_jit = _stage_two_level_core
_expmv2_py = _expmv2_core


def _stage_two_level_numpy(psi1, psi2, p, c, v1, v2, u11, u12, u22, inv2g,
                           dt, predict):
    """Vectorized fallback, same math as the compiled kernel."""
    def expm_apply(h1, h2, a1, a2, step):
        m11 = -1j * step * h1 - step * k11
        m22 = -1j * step * h2 - step * k22
        m12 = -step * k12
        m21 = -step * k21
        tr2 = 0.5 * (m11 + m22)
        d = 0.5 * (m11 - m22)
        q2 = d * d + m12 * m21
        q = np.sqrt(q2)
        small = np.abs(q) <= 1e-6
        qs = np.where(small, 1.0, q)
        ch = np.where(small, 1.0 + q2 / 2 + q2 * q2 / 24, np.cosh(qs))
        sh = np.where(small, 1.0 + q2 / 6 + q2 * q2 / 120, np.sinh(qs) / qs)
        e = np.exp(tr2)
        return (e * ((ch + sh * d) * a1 + sh * m12 * a2),
                e * (sh * m21 * a1 + (ch - sh * d) * a2))

    k11 = inv2g * np.abs(p) ** 2
    k22 = inv2g * np.abs(c) ** 2
    k12 = inv2g * np.conj(p) * c
    k21 = np.conj(k12)
    n1 = np.abs(psi1) ** 2
    n2 = np.abs(psi2) ** 2
    h1 = v1 + u11 * n1 + u12 * n2
    h2 = v2 + u12 * n1 + u22 * n2
    if predict:
        b1, b2 = expm_apply(h1, h2, psi1, psi2, 0.5 * dt)
        n1 = np.abs(b1) ** 2
        n2 = np.abs(b2) ** 2
        h1 = v1 + u11 * n1 + u12 * n2
        h2 = v2 + u12 * n1 + u22 * n2
    psi1[:], psi2[:] = expm_apply(h1, h2, psi1, psi2, dt)


def step_two_level(ip, grid, psi, lights, dt, potentials=None, use_numba=True):
    """One Strang step of the two-level matter equations; lights held frozen.

    Returns a new SpinorWavefunction; the input is not modified.
    """
    v1, v2 = trap_potentials(ip, grid) if potentials is None else potentials
    fac = _kinetic_half(grid, dt)
    psi1 = _apply_kinetic(psi.psi1, fac)
    psi2 = _apply_kinetic(psi.psi2, fac)
    stage = _stage_two_level_jit if (use_numba and HAVE_NUMBA) \
        else _stage_two_level_numpy
    stage(psi1, psi2, lights.omega_p, lights.omega_c, v1, v2,
          ip.u11, ip.u12, ip.u22, 0.5 / ip.gamma, dt, True)
    return SpinorWavefunction(_apply_kinetic(psi1, fac),
                              _apply_kinetic(psi2, fac))


# --------------------------------------------------------------------------
# lights-off evolution (storage)

def _phase_stage(ip, v1, v2, psi1, psi2, dt):
    # densities are invariant under the diagonal stage -> exact rotation
    n1 = np.abs(psi1) ** 2
    n2 = np.abs(psi2) ** 2
    psi1 *= np.exp(-1j * dt * (v1 + ip.u11 * n1 + ip.u12 * n2))
    psi2 *= np.exp(-1j * dt * (v2 + ip.u12 * n1 + ip.u22 * n2))


def evolve_storage(ip, grid, psi, duration, dt, record=None):
    """Propagate with both lights off for `duration` (trap units).

    Merges adjacent kinetic half-steps, so cost is one FFT pair per component
    per step.  `record(t, psi1, psi2)`, when given, is called after every step
    with the current (kinetic-half-shifted) state -- cheap diagnostics only.
    """
    if duration <= 0:
        return psi.copy()
    n_steps = max(1, int(round(duration / dt)))
    dt_eff = duration / n_steps
    v1, v2 = trap_potentials(ip, grid)
    fac_half = _kinetic_half(grid, dt_eff)
    fac_full = fac_half * fac_half
    psi1 = _apply_kinetic(psi.psi1, fac_half)
    psi2 = _apply_kinetic(psi.psi2, fac_half)
    for j in range(n_steps):
        _phase_stage(ip, v1, v2, psi1, psi2, dt_eff)
        if j < n_steps - 1:
            psi1 = _apply_kinetic(psi1, fac_full)
            psi2 = _apply_kinetic(psi2, fac_full)
            if record is not None:
                record((j + 1) * dt_eff, psi1, psi2)
    return SpinorWavefunction(_apply_kinetic(psi1, fac_half),
                              _apply_kinetic(psi2, fac_half))


# --------------------------------------------------------------------------
# three-level pointwise stage

def _expm_batch3(m):
    """exp of a stack of 3x3 matrices: Taylor-6 with scaling and squaring."""
    norm = np.abs(m).sum(axis=-1).max()  # inf-norm upper bound over the stack
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
        m = m / (2.0 ** s)
    eye = np.broadcast_to(np.eye(3, dtype=complex), m.shape)
    term = m
    out = eye + term
    for j in range(2, 7):
        term = np.matmul(term, m) / j
        out = out + term
    for _ in range(s):
        out = np.matmul(out, out)
    return out


def _stage_three_level(ip, v1, v2, psi1, psi2, psi3, p, c, dt):
    def build(h1, h2):
        n = len(psi1)
        mm = np.zeros((n, 3, 3), dtype=complex)
        mm[:, 0, 0] = -1j * dt * h1
        mm[:, 1, 1] = -1j * dt * h2
        mm[:, 2, 2] = -1j * dt * (-0.5j * ip.gamma)
        mm[:, 0, 2] = -1j * dt * 0.5 * np.conj(p)
        mm[:, 1, 2] = -1j * dt * 0.5 * np.conj(c)
        mm[:, 2, 0] = -1j * dt * 0.5 * p
        mm[:, 2, 1] = -1j * dt * 0.5 * c
        return mm

    def hfields(a1, a2):
        n1 = np.abs(a1) ** 2
        n2 = np.abs(a2) ** 2
        return v1 + ip.u11 * n1 + ip.u12 * n2, v2 + ip.u12 * n1 + ip.u22 * n2

    vec = np.stack([psi1, psi2, psi3], axis=-1)[..., None]
    # midpoint-density predictor: half step, refresh h1/h2, full step
    mid = np.matmul(_expm_batch3(build(*hfields(psi1, psi2)) * 0.5), vec)
    h1, h2 = hfields(mid[:, 0, 0], mid[:, 1, 0])
    out = np.matmul(_expm_batch3(build(h1, h2)), vec)
    return out[:, 0, 0], out[:, 1, 0], out[:, 2, 0]


def step_three_level(ip, grid, psi3, lights, dt, potentials=None):
    """One Strang step with the excited state explicit; lights frozen.

    Kinetic halves act on psi1, psi2 only.
    """
    v1, v2 = trap_potentials(ip, grid) if potentials is None else potentials
    fac = _kinetic_half(grid, dt)
    a1 = _apply_kinetic(psi3.psi1, fac)
    a2 = _apply_kinetic(psi3.psi2, fac)
    b1, b2, b3 = _stage_three_level(ip, v1, v2, a1, a2, psi3.psi3,
                                    lights.omega_p, lights.omega_c, dt)
    return ThreeLevelWavefunction(_apply_kinetic(b1, fac),
                                  _apply_kinetic(b2, fac), b3)


# --------------------------------------------------------------------------
# observables

def gpe_energy(ip, grid, psi, energy_scale=1.0):
    """Mean-field energy per atom (trap units unless energy_scale is given)."""
    v1, v2 = trap_potentials(ip, grid)
    n1 = np.abs(psi.psi1) ** 2
    n2 = np.abs(psi.psi2) ** 2
    d1 = np.fft.ifft(1j * grid.k * np.fft.fft(psi.psi1))
    d2 = np.fft.ifft(1j * grid.k * np.fft.fft(psi.psi2))
    e = (0.5 * (np.abs(d1) ** 2 + np.abs(d2) ** 2)
         + v1 * n1 + v2 * n2
         + 0.5 * ip.u11 * n1**2 + 0.5 * ip.u22 * n2**2 + ip.u12 * n1 * n2)
    return float(np.sum(e) * grid.dz) * energy_scale


def loss_rate(ip, grid, psi, lights):
    """Instantaneous norm-loss rate through the radiative channel (trap units).

    d/dt integral(|psi1|^2+|psi2|^2) dz = -integral |Op psi1 + Oc psi2|^2 / gamma dz
    """
    w = lights.omega_p * psi.psi1 + lights.omega_c * psi.psi2
    return float(np.sum(np.abs(w) ** 2) * grid.dz / ip.gamma)
