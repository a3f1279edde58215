"""Drive builders, synthetic stored states, and named experiment presets."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .config import ExperimentConfig, resolve_species_defaults
from .errors import ConfigError
from .fields import SpinorWavefunction

TWO_PI = 2 * math.pi


@dataclass
class PulseSpec:
    """Gaussian probe pulse: intensity 1/e half-width tau0."""
    omega_p0: float
    tau0: float
    t_peak: float = 0.0

    def __post_init__(self):
        if self.omega_p0 < 0 or self.tau0 <= 0:
            raise ConfigError("pulse needs omega_p0 >= 0 and tau0 > 0")


@dataclass
class SwitchSchedule:
    """Coupling switch-off/on with error-function ramps of width tau_s."""
    omega_c0: float
    tau_s: float
    t_off: float = None
    t_on: float = None

    def __post_init__(self):
        if self.omega_c0 < 0 or self.tau_s <= 0:
            raise ConfigError("schedule needs omega_c0 >= 0 and tau_s > 0")
        if self.t_off is not None and self.t_on is not None:
            if self.t_on <= self.t_off:
                raise ConfigError("t_on must come after t_off")


@dataclass
class TestWavefunctionSpec:
    __test__ = False            # keep pytest from collecting the dataclass
    A2: float
    L2: float
    A_phi2: float = 0.0
    L_phi2: float = 5e-6
    A_phi1: float = 0.0
    L_phi1: float = 5e-6

    def __post_init__(self):
        if not 0.0 <= self.A2 < 1.0:
            raise ConfigError("A2 must lie in [0, 1)")
        if self.L2 <= 0 or self.L_phi2 <= 0 or self.L_phi1 <= 0:
            raise ConfigError("length scales must be positive")


def gaussian_probe_drive(spec):
    """Boundary probe amplitude Omega_p0 * exp(-(t-t_peak)^2 / (2 tau0^2)).

    tau0 is the 1/e half-width of the *intensity* profile; this is the
    convention under which the bandwidth parameter beta = 4 D (Gamma /
    (tau0 Omega_c0^2))^2 reproduces the measured transmission.
    """
    om, tau, t0 = spec.omega_p0, spec.tau0, spec.t_peak

    def drive(t):
        return om * math.exp(-((t - t0) ** 2) / (2.0 * tau * tau)) + 0.0j

    return drive


def _erfstep(x):
    return 0.5 * (1.0 + erf(x))


def erf_switch_drive(sched):
    """Boundary coupling amplitude with erf-profile off/on switching."""
    if (sched.t_off is not None and sched.t_on is not None
            and sched.t_on - sched.t_off < 4.0 * sched.tau_s):
        raise ConfigError("switch-on ramp overlaps switch-off "
                          "(t_on - t_off < 4 tau_s)")
    om, ts = sched.omega_c0, sched.tau_s
    t_off, t_on = sched.t_off, sched.t_on

    def drive(t):
        if t_off is None and t_on is None:
            level = 1.0
        elif t_on is None:
            level = 1.0 - _erfstep((t - t_off) / ts)
        elif t_off is None:
            level = _erfstep((t - t_on) / ts)
        else:
            level = (1.0 - _erfstep((t - t_off) / ts)
                     + _erfstep((t - t_on) / ts))
        return om * min(max(level, 0.0), 1.0) + 0.0j

    return drive


def build_test_wavefunctions(spec, psi0_profile, z):
    """Imprint a stored pattern on a ground-state density profile.

    psi2 = psi0 * A2 exp(-z^2/2L2^2) * exp[i (A_phi2/2) erf(z/L_phi2)]
    psi1 carries the remaining density and phase (A_phi1/2) erf(z/L_phi1),
    so |psi1|^2 + |psi2|^2 matches |psi0|^2 exactly.
    """
    psi0 = np.abs(np.asarray(psi0_profile, dtype=complex))
    z = np.asarray(z, dtype=float)
    amp2 = spec.A2 * np.exp(-(z**2) / (2.0 * spec.L2**2))
    amp1 = np.sqrt(np.clip(1.0 - amp2**2, 0.0, None))
    phase2 = 0.5 * spec.A_phi2 * erf(z / spec.L_phi2)
    phase1 = 0.5 * spec.A_phi1 * erf(z / spec.L_phi1)
    return SpinorWavefunction(psi1=psi0 * amp1 * np.exp(1j * phase1),
                              psi2=psi0 * amp2 * np.exp(1j * phase2))


_NA_CLOUD = dict(species="na", nc=1.2e6, omega_z=TWO_PI * 21.0,
                 area=math.pi * (8.3e-6) ** 2, f13=1 / 2, f23=1 / 3)
_RB_A11 = 5.36e-9
_RB_FIG4 = dict(species="rb", nc=1.0e6, omega_z=TWO_PI * 21.0,
                area=math.pi * (5e-6) ** 2, f13=1 / 12, f23=1 / 4,
                a11=_RB_A11, a12=1.024 * _RB_A11, a22=1.057 * _RB_A11)
_RB_FIG9 = dict(species="rb", nc=2.0e6, omega_z=TWO_PI * 20.0,
                area=math.pi * (5e-6) ** 2, f13=1 / 12, f23=1 / 12,
                mode="test_state", omega_p0=0.0, omega_c0=TWO_PI * 8e6,
                t_on=1.0e-6, tau_s=0.1e-6, n_points=4096, t_end=16e-6,
                a2=0.5, l2=10e-6, a_phi2=-0.2 * math.pi, l_phi2=5e-6,
                a_phi1=0.5 * math.pi, l_phi1=5e-6)

PRESETS = {
    "usl_na_fig2": dict(
        _NA_CLOUD, mode="pulse", omega_p0=TWO_PI * 3.5e6, tau0=1.5e-6,
        t_peak=0.0, omega_c0=TWO_PI * 8.0e6, n_points=4096, t_end=20e-6),
    "stopped_na_fig2e": dict(
        _NA_CLOUD, mode="pulse", omega_p0=TWO_PI * 3.5e6, tau0=1.5e-6,
        t_peak=0.0, omega_c0=TWO_PI * 8.0e6, t_off=3.7e-6, t_on=15.3e-6,
        tau_s=0.1e-6, n_points=4096, t_end=30e-6,
        snapshot_times=(3.5e-6, 3.6e-6, 3.7e-6, 3.75e-6, 3.8e-6,
                        3.85e-6, 3.9e-6)),
    "fastswitch_fig3": dict(
        _NA_CLOUD, mode="three_level_windows", omega_p0=TWO_PI * 3.5e6,
        tau0=1.5e-6, t_peak=0.0, omega_c0=TWO_PI * 8.0e6, t_off=3.7e-6,
        tau_s=8e-9, monitor_z=-12e-6, n_points=4096, t_end=4.2e-6,
        norm_stride=25),
    "fringes_rb_fig4": dict(
        _RB_FIG4, mode="pulse", omega_p0=TWO_PI * 2e6, tau0=2.0e-6,
        t_peak=5.2e-6, omega_c0=TWO_PI * 8e6, t_off=7.5e-6, tau_s=0.1e-6,
        n_points=2048, snapshot_times=(8e-6, 101e-3), t_end=101.05e-3),
    "breathe_rb_fig5": dict(
        _RB_FIG4, a12=_RB_A11 / 1.024, mode="pulse", omega_p0=TWO_PI * 2e6,
        tau0=2.0e-6, t_peak=5.2e-6, omega_c0=TWO_PI * 8e6, t_off=7.5e-6,
        tau_s=0.1e-6, n_points=2048, t_end=342e-3,
        snapshot_times=(8e-6,) + tuple(float(t) for t in
                                       np.arange(279e-3, 341.5e-3, 2e-3))),
    "solitons_rb_fig6": dict(
        species="rb", nc=0.5e6, omega_z=TWO_PI * 21.0,
        area=math.pi * (5e-6) ** 2, f13=1 / 12, f23=1 / 12,
        a11=_RB_A11, a12=1.04 * _RB_A11, a22=_RB_A11,
        mode="pulse", omega_p0=TWO_PI * 5.7e6, tau0=1.0e-6, t_peak=4.0e-6,
        omega_c0=TWO_PI * 8e6, t_off=5.9e-6, t_on=110e-3, tau_s=0.1e-6,
        n_points=2048, t_end=110.015e-3,
        snapshot_times=(6.5e-6,) + tuple(float(t) for t in
                                         np.arange(30e-3, 61e-3, 2.5e-3))),
    "gauss_write_fig9": dict(_RB_FIG9),
    "length_sweep_fig8": dict(_RB_FIG9, a_phi2=0.0, a_phi1=0.0),
    "amp_sweep_fig9ef": dict(_RB_FIG9, a_phi2=+0.2 * math.pi),
    "strongprobe_fig10": dict(
        species="na", nc=1.067693e6, omega_z=TWO_PI * 21.0,
        area=math.pi * (8.3e-6) ** 2, f13=1 / 2, f23=1 / 2,
        mode="pulse", omega_p0=TWO_PI * 8.0e6, tau0=1.5e-6, t_peak=0.0,
        omega_c0=TWO_PI * 8.0e6, n_points=4096, t_end=20e-6),
    "unequal_f_fig11": dict(_RB_FIG9, f23=1 / 4),
}


def preset(name):
    """Fully populated ExperimentConfig for a named scenario."""
    try:
        overrides = PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r}; choose from: {known}") \
            from None
    cfg = ExperimentConfig(label=name)
    for attr, value in overrides.items():
        if not hasattr(cfg, attr):
            raise ConfigError(f"preset {name} sets unknown field {attr!r}")
        setattr(cfg, attr, value)
    return resolve_species_defaults(cfg)


def pulse_from_config(cfg):
    return PulseSpec(omega_p0=cfg.omega_p0, tau0=cfg.tau0, t_peak=cfg.t_peak)


def schedule_from_config(cfg):
    return SwitchSchedule(omega_c0=cfg.omega_c0, tau_s=cfg.tau_s,
                          t_off=cfg.t_off, t_on=cfg.t_on)


def state_from_config(cfg):
    return TestWavefunctionSpec(A2=cfg.a2, L2=cfg.l2,
                                A_phi2=cfg.a_phi2, L_phi2=cfg.l_phi2,
                                A_phi1=cfg.a_phi1, L_phi1=cfg.l_phi1)
