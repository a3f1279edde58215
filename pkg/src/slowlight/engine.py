"""Experiment runner: stage timeline, stepping, artifacts.

A run is a sequence of segments on the time axis, classified by what physics
is active:

  light    -- probe and/or coupling drives are significant at the boundary;
              fields are re-solved adiabatically every step and the matter is
              advanced with the two-level split-step.
  window   -- (mode "three_level_windows" only) a short interval around a
              switch time where the excited state is kept explicit, for
              studying non-adiabatic switching.
  storage  -- all drives negligible; no light anywhere, pure two-component
              GP evolution in large split steps.

Segment boundaries fall on drive on/off margins, the three-level windows,
and every requested capture time (snapshots, revival sampling), so captures
land exactly.  Atom dynamics are stepped in trap units throughout; light
fields are converted at the boundary so every on-disk artifact is SI.

run() writes, per run directory: manifest.json, pmt_trace.csv, norms.csv,
snapshots/NNNN.csv, fidelity.json, and monitor_trace.csv when a monitor
point is configured.  sweep() fans run() out over a cartesian parameter
grid; analyze() recomputes fidelity metrics from stored artifacts.
"""

import dataclasses
import json
import math
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import scenarios
from .config import ExperimentConfig, apply_override
from .darkbasis import z_critical
from .errors import AnalysisError, ConfigError, NumericalError, SlowlightError
from .fields import (Grid1D, LightFields, SpinorWavefunction,
                     ThreeLevelWavefunction, read_snapshot, write_snapshot)
from .groundstate import imaginary_time_relax, tf_radius, thomas_fermi
from .lightprop import (BoundaryDrive, integrate_light_adiabatic,
                        integrate_light_three_level, read_pmt_trace,
                        write_pmt_trace)
from .matterstep import (adiabatic_excited_amplitude, check_light_step,
                         evolve_storage, loss_rate, step_three_level,
                         step_two_level, trap_potentials)
from .params import (UnitSystem, absorption_coefficient, internal_params,
                     optical_density)
from .revival import (FidelityReport, bandwidth_transmission,
                      ideal_revived_probe, map_output_to_space,
                      minimum_pulse_duration, output_error,
                      state_length_scale, write_error)

# margins, in units of the relevant drive width, beyond which a drive is
# treated as exactly off (gaussian at 5.5 tau0: |Omega| < 3e-7 peak;
# erf at 6 tau_s: < 1e-9 peak)
_PULSE_MARGIN = 5.5
_SWITCH_MARGIN = 6.0

_BOUNDARY_DENSITY_LIMIT = 1e-8   # abort when edge density exceeds this x peak
_BOUNDARY_CHECK_EVERY = 50       # light steps between edge checks


def _fs(t):
    """Femtosecond-quantized integer key for exact time matching."""
    return int(round(t * 1e15))


# ---------------------------------------------------------------------------
# results

@dataclass
class Diagnostics:
    n_light_steps: int = 0
    n_window_steps: int = 0
    n_storage_steps: int = 0
    wall_time: float = 0.0
    min_norm: float = 1.0
    final_norm: float = 1.0
    dropped_excited_norm: float = 0.0
    notes: list = field(default_factory=list)


@dataclass
class RunResult:
    config: ExperimentConfig
    params: object
    units: UnitSystem
    grid: Grid1D                 # SI, edges set
    grid_internal: Grid1D
    ground: object               # GroundStateResult
    d_total: float
    trace_t: np.ndarray          # s
    trace_omega_p: np.ndarray    # complex rad/s at the exit boundary
    trace_omega_c: np.ndarray
    norms: np.ndarray            # rows (t, norm, norm_excited, loss_rate)
    monitor: np.ndarray          # rows (t, |Op|^2, |Oc|^2) or None
    snapshots: list              # [(t, wavefunction SI), ...]
    psi_final: SpinorWavefunction
    psi_rev: SpinorWavefunction = None   # SI, at t_rev
    lights_rev: LightFields = None       # SI, at t_rev
    t_rev: float = None
    fidelity: dict = None
    diagnostics: Diagnostics = None
    out_dir: str = None


# ---------------------------------------------------------------------------
# setup helpers

def build_grid(config, params):
    if config.z_half is not None:
        zh = config.z_half
    else:
        zh = 1.6 * tf_radius(params)
    return Grid1D(-zh, zh, config.n_points)


def solve_ground(config, params=None, grid=None):
    """Ground |1> state for this config (relaxation unless groundstate='tf')."""
    if params is None:
        params = config.to_params()
    if grid is None:
        grid = build_grid(config, params)
    if config.groundstate == "tf":
        return thomas_fermi(params, grid)
    return imaginary_time_relax(params, grid, dtau=config.relax_dtau,
                                tol=config.relax_tol)


def _check_timescales(config):
    # the light equations drop the 1/c term; everything configured must be
    # slow against the ~L/c transit (tens of ps across the box)
    scales = [config.tau_s, 1.0 / config.gamma_e]
    if config.omega_c0 > 0:
        scales.append(1.0 / config.omega_c0)
    if config.mode != "test_state" and config.omega_p0 > 0:
        scales += [config.tau0, 1.0 / config.omega_p0]
    if min(scales) <= 1e-11:
        raise ConfigError(
            "configured timescales reach below 10 ps; the quasi-static "
            "field solve is not valid there")


def _build_drive(config):
    if config.mode != "test_state" and config.omega_p0 > 0:
        probe = scenarios.gaussian_probe_drive(scenarios.pulse_from_config(config))
    else:
        probe = lambda t: 0.0j
    coupling = scenarios.erf_switch_drive(scenarios.schedule_from_config(config))
    return BoundaryDrive(probe, coupling)


def _merge_intervals(ivals):
    ivals = sorted((a, b) for a, b in ivals if b > a)
    out = []
    for a, b in ivals:
        if out and a <= out[-1][1]:
            out[-1] = [out[-1][0], max(out[-1][1], b)]
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def _light_intervals(config, t_start, t_end):
    """Union of times at which any boundary drive is non-negligible."""
    ivals = []
    if config.mode != "test_state" and config.omega_p0 > 0:
        half = _PULSE_MARGIN * config.tau0
        ivals.append((config.t_peak - half, config.t_peak + half))
    m = _SWITCH_MARGIN * config.tau_s
    t_off, t_on = config.t_off, config.t_on
    if t_off is None and t_on is None:
        ivals.append((t_start, t_end))
    elif t_on is None:
        ivals.append((t_start, t_off + m))
    elif t_off is None:
        ivals.append((t_on - m, t_end))
    else:
        ivals.append((t_start, t_off + m))
        ivals.append((t_on - m, t_end))
    clip = lambda x: min(max(x, t_start), t_end)
    return _merge_intervals([(clip(a), clip(b)) for a, b in ivals])


def _switch_windows(config, t_start, t_end):
    """Explicit-excited-state windows around each switch time."""
    if config.mode != "three_level_windows":
        return []
    if config.t_off is None and config.t_on is None:
        raise ConfigError("three_level_windows mode needs a switch time")
    half = config.window if config.window is not None \
        else max(400e-9, 5.0 * config.tau_s)
    wins = []
    for t_sw in (config.t_off, config.t_on):
        if t_sw is None:
            continue
        a, b = max(t_sw - half, t_start), min(t_sw + half, t_end)
        if b > a:
            wins.append((a, b, t_sw))
    return wins


# ---------------------------------------------------------------------------
# the stepping machine

class _Sim:
    def __init__(self, config, params, units, ip, grid, grid_int, pots,
                 drive, psi0_int, diag):
        self.config = config
        self.params = params
        self.units = units
        self.ip = ip
        self.grid = grid
        self.grid_int = grid_int
        self.pots = pots
        self.drive = drive
        self.psi = psi0_int
        self.diag = diag

        self.dt_light = config.dt_light if config.dt_light is not None else \
            1.0 / (20.0 * max(config.gamma_e, config.omega_c0, config.omega_p0))
        self.dt_fine = min(config.tau_s / 20.0, self.dt_light)
        # split-step develops a resonant instability once the kinetic phase
        # per step reaches pi at the grid's Nyquist wavenumber; keep the
        # storage step below that with some headroom
        k_nyq = math.pi / grid_int.dz
        dt_stable = 0.8 * 2.0 * math.pi / k_nyq ** 2
        if config.dt_storage is not None:
            self.dt_storage_int = config.dt_storage * params.omega_z
            if self.dt_storage_int > dt_stable:
                warnings.warn(
                    f"numerics.dt_storage={config.dt_storage:.3g}s exceeds "
                    f"the spectral stability bound "
                    f"{dt_stable / params.omega_z:.3g}s for this grid; "
                    "expect growth at the box edge")
        else:
            self.dt_storage_int = min(2.0 * math.pi / 2000.0, dt_stable)

        self.step_count = 0
        self.trace = []        # (t, Omega_p_out, Omega_c_out) SI
        self.norm_rows = []    # (t, norm, norm_excited, loss_rate)
        self.monitor_rows = []
        self.snapshots = []    # (t, wavefunction SI)
        self.psi_rev = None
        self.lights_rev = None
        self.t_rev_actual = None

        self.captures = {}     # _fs(t) -> set of kinds
        self.windows = []      # (a, b, t_sw)
        self.mz_int = None if config.monitor_z is None \
            else units.length_to_internal(config.monitor_z)

    # -- unit shims ---------------------------------------------------------

    def _lights_2lvl(self, t):
        p_in, c_in = self.drive.at(t)
        ts = self.units.time_scale
        return integrate_light_adiabatic(
            self.params, self.grid_int, self.psi, p_in * ts, c_in * ts,
            use_numba=self.config.use_numba)

    def _lights_3lvl(self, t):
        p_in, c_in = self.drive.at(t)
        ts = self.units.time_scale
        return integrate_light_three_level(
            self.params, self.grid_int, self.psi, p_in * ts, c_in * ts,
            gamma=self.ip.gamma)

    def _solve_lights(self, t):
        if isinstance(self.psi, ThreeLevelWavefunction):
            return self._lights_3lvl(t)
        return self._lights_2lvl(t)

    def _psi_si(self):
        u = self.units
        p1 = u.wavefunction_from_internal(self.psi.psi1)
        p2 = u.wavefunction_from_internal(self.psi.psi2)
        if isinstance(self.psi, ThreeLevelWavefunction):
            return ThreeLevelWavefunction(p1, p2,
                                          u.wavefunction_from_internal(self.psi.psi3))
        return SpinorWavefunction(p1, p2)

    # -- bookkeeping --------------------------------------------------------

    def _record_step(self, t, lights_int):
        self.step_count += 1
        inv_ts = 1.0 / self.units.time_scale
        if self.step_count % self.config.trace_stride == 0:
            self.trace.append((t, lights_int.omega_p[-1] * inv_ts,
                               lights_int.omega_c[-1] * inv_ts))
        if self.mz_int is not None:
            op, oc = lights_int.sample_at(self.grid_int.z, self.mz_int)
            self.monitor_rows.append((t, abs(op * inv_ts) ** 2,
                                      abs(oc * inv_ts) ** 2))
        if self.step_count % self.config.norm_stride == 0:
            self._log_norm(t, lights_int)
        if self.step_count % _BOUNDARY_CHECK_EVERY == 0:
            self._check_boundary()

    def _log_norm(self, t, lights_int=None):
        dz = self.grid_int.dz
        if isinstance(self.psi, ThreeLevelWavefunction):
            n12 = float(np.sum(np.abs(self.psi.psi1) ** 2
                               + np.abs(self.psi.psi2) ** 2) * dz)
            n3 = float(np.sum(np.abs(self.psi.psi3) ** 2) * dz)
            rate = self.ip.gamma * n3 / self.units.time_scale
        else:
            n12 = self.psi.norm(dz)
            n3 = 0.0
            rate = 0.0
            if lights_int is not None:
                rate = loss_rate(self.ip, self.grid_int, self.psi,
                                 lights_int) / self.units.time_scale
        self.norm_rows.append((t, n12, n3, rate))
        total = n12 + n3
        self.diag.min_norm = min(self.diag.min_norm, total)
        self.diag.final_norm = total

    def _check_boundary(self):
        dens = self.psi.total_density().real
        peak = dens.max()
        edge = max(dens[:3].max(), dens[-3:].max())
        if peak > 0 and edge > _BOUNDARY_DENSITY_LIMIT * peak:
            raise NumericalError(
                f"atoms reached the box edge (edge density {edge / peak:.2e} "
                "of peak); enlarge grid.half_width")

    def _capture_due(self, t):
        kinds = self.captures.pop(_fs(t), None)
        if not kinds:
            return
        wf_si = self._psi_si()
        if "snapshot" in kinds:
            self.snapshots.append((t, wf_si))
        if "rev" in kinds:
            lights_int = self._solve_lights(t)
            inv_ts = 1.0 / self.units.time_scale
            self.psi_rev = SpinorWavefunction(wf_si.psi1, wf_si.psi2)
            self.lights_rev = LightFields(lights_int.omega_p * inv_ts,
                                          lights_int.omega_c * inv_ts)
            self.t_rev_actual = t

    # -- segment runners ----------------------------------------------------

    def _run_light(self, a, b):
        m = max(1, int(math.ceil((b - a) / self.dt_light - 1e-9)))
        dt_si = (b - a) / m
        dt_int = self.units.time_to_internal(dt_si)
        for j in range(m):
            lights = self._lights_2lvl(a + dt_si * (j + 0.5))
            check_light_step(lights, dt_int)
            self.psi = step_two_level(self.ip, self.grid_int, self.psi,
                                      lights, dt_int, potentials=self.pots,
                                      use_numba=self.config.use_numba)
            self.diag.n_light_steps += 1
            self._record_step(a + dt_si * (j + 1), lights)

    def _run_window(self, a, b, t_sw):
        tau_s = self.config.tau_s
        t = a
        while t < b - 1e-18:
            base = self.dt_fine if abs(t - t_sw) < _SWITCH_MARGIN * tau_s \
                else self.dt_light
            dt_si = min(base, b - t)
            dt_int = self.units.time_to_internal(dt_si)
            lights = self._lights_3lvl(t + 0.5 * dt_si)
            check_light_step(lights, dt_int)
            self.psi = step_three_level(self.ip, self.grid_int, self.psi,
                                        lights, dt_int, potentials=self.pots)
            t = b if b - t <= dt_si * (1 + 1e-12) else t + dt_si
            self.diag.n_window_steps += 1
            self._record_step(t, lights)

    def _run_storage(self, a, b):
        duration = self.units.time_to_internal(b - a)
        n = max(1, int(round(duration / self.dt_storage_int)))
        self.psi = evolve_storage(self.ip, self.grid_int, self.psi, duration,
                                  self.dt_storage_int)
        self.diag.n_storage_steps += n

    # -- 2-level <-> 3-level handoff ----------------------------------------

    def _promote(self, t):
        lights = self._lights_2lvl(t)
        psi3 = adiabatic_excited_amplitude(self.psi, lights, self.ip.gamma)
        self.psi = ThreeLevelWavefunction(self.psi.psi1, self.psi.psi2, psi3)

    def _demote(self):
        dropped = float(np.sum(np.abs(self.psi.psi3) ** 2) * self.grid_int.dz)
        self.diag.dropped_excited_norm += dropped
        self.psi = SpinorWavefunction(self.psi.psi1, self.psi.psi2)

    # -- timeline -----------------------------------------------------------

    def execute(self, t_start, t_end, light_ivals, windows, capture_kinds):
        self.windows = windows
        clip = lambda x: min(max(x, t_start), t_end)
        pts = {_fs(t_start), _fs(t_end)}
        for a, b in light_ivals:
            pts.add(_fs(clip(a)))
            pts.add(_fs(clip(b)))
        for a, b, _ in windows:
            pts.add(_fs(clip(a)))
            pts.add(_fs(clip(b)))
        for t, kind in capture_kinds:
            if t_start <= t <= t_end:
                pts.add(_fs(t))
                self.captures.setdefault(_fs(t), set()).add(kind)
            else:
                self.diag.notes.append(
                    f"capture at t={t:.6g}s outside the run window; skipped")
        bounds = sorted(pts)

        self._log_norm(t_start)
        self._capture_due(t_start)
        for fa, fb in zip(bounds[:-1], bounds[1:]):
            a, b = fa * 1e-15, fb * 1e-15
            mid = 0.5 * (a + b)
            win = next(((wa, wb, ts) for wa, wb, ts in windows
                        if wa <= mid < wb), None)
            try:
                if win is not None:
                    stage = "switch window"
                    if not isinstance(self.psi, ThreeLevelWavefunction):
                        self._promote(a)
                    self._run_window(a, b, win[2])
                else:
                    if isinstance(self.psi, ThreeLevelWavefunction):
                        self._demote()
                    if any(ia <= mid < ib for ia, ib in light_ivals):
                        stage = "light"
                        self._run_light(a, b)
                    else:
                        stage = "storage"
                        self._run_storage(a, b)
                self._log_norm(b)
                self._check_boundary()
            except SlowlightError as exc:
                raise type(exc)(
                    f"{stage} stage failed in [{a:.6g}, {b:.6g}]s after "
                    f"{self.step_count} steps: {exc}") from exc
            self._capture_due(b)
        if isinstance(self.psi, ThreeLevelWavefunction):
            self._demote()


# ---------------------------------------------------------------------------
# fidelity

def _fidelity_metrics(config, params, grid, psi1G, sim, d_profile):
    """Write/output errors and the bandwidth estimate for this run."""
    fid = {"e_write": None, "e_write_zc": None, "e_out": None,
           "beta": None, "transmission_T": None, "t_rev": sim.t_rev_actual,
           "z_critical": None, "l_psi": None, "z_pattern": None,
           "d_interval": None}
    omega_c0 = config.omega_c0

    if sim.psi_rev is not None and omega_c0 > 0:
        psi = sim.psi_rev
        inside = grid.inside()
        try:
            pred = ideal_revived_probe(psi, omega_c0, grid)
            fid["e_write"] = write_error(sim.lights_rev.omega_p, pred,
                                         z=grid.z, mask=inside)
            try:
                zc = z_critical(params, psi1G, grid)
                fid["z_critical"] = float(zc)
                fid["e_write_zc"] = write_error(sim.lights_rev.omega_p, pred,
                                                z=grid.z,
                                                mask=inside & (grid.z > zc))
            except AnalysisError:
                pass
            if len(sim.trace) and sim.t_rev_actual is not None:
                tr = np.array([row[0] for row in sim.trace])
                op = np.array([row[1] for row in sim.trace])
                mapped = map_output_to_space(params, grid, psi1G, omega_c0,
                                             tr, op, sim.t_rev_actual)
                fid["e_out"] = output_error(sim.lights_rev.omega_p, mapped,
                                            grid.z, mask=inside)
        except AnalysisError as exc:
            sim.diag.notes.append(f"fidelity prediction unavailable: {exc}")

    # bandwidth estimate: stored-pattern route for synthetic states, pulse
    # route otherwise
    if config.mode == "test_state":
        l_psi = state_length_scale(config.l2, config.a_phi2, config.l_phi2,
                                   config.a_phi1, config.l_phi1)
        fid["l_psi"] = float(l_psi)
        psi_for_centroid = sim.psi_rev if sim.psi_rev is not None else None
        if psi_for_centroid is not None:
            dens2 = np.abs(psi_for_centroid.psi2) ** 2
            w = np.trapezoid(dens2, grid.z)
            if w > 0:
                z_p = float(np.trapezoid(grid.z * dens2, grid.z) / w)
                fid["z_pattern"] = z_p
                alpha = absorption_coefficient(
                    params, SpinorWavefunction(psi1G, np.zeros_like(psi1G)))
                alpha_zp = float(np.interp(z_p, grid.z, alpha))
                d_zp = float(np.interp(z_p, grid.z, d_profile))
                d_out = float(np.interp(grid.z_out, grid.z, d_profile))
                fid["d_interval"] = d_out - d_zp
                T, beta = bandwidth_transmission(params, L_psi=l_psi,
                                                 D_interval=d_out - d_zp,
                                                 alpha_a_peak=alpha_zp)
                fid["beta"], fid["transmission_T"] = float(beta), float(T)
    elif config.omega_p0 > 0 and omega_c0 > 0:
        d_total = float(d_profile[-1])
        fid["d_interval"] = d_total
        T, beta = bandwidth_transmission(params, tau0=config.tau0,
                                         D_interval=d_total,
                                         omega_c0=omega_c0)
        fid["beta"], fid["transmission_T"] = float(beta), float(T)

    report = FidelityReport(e_write=fid["e_write"], e_out=fid["e_out"],
                            beta=fid["beta"],
                            transmission_T=fid["transmission_T"],
                            e_write_zc=fid["e_write_zc"])
    return fid, report


# ---------------------------------------------------------------------------
# top-level operations

def run(config, out_dir=None, ground=None):
    """Execute one experiment end to end.

    config must be fully resolved (species defaults applied).  out_dir=None
    keeps everything in memory and writes nothing.  ground lets sweeps and
    tests reuse a relaxed |1> state; it must match the grid this config
    implies.
    """
    t_wall = time.time()
    if config.mode not in ("pulse", "test_state", "three_level_windows"):
        raise ConfigError(f"unknown run mode '{config.mode}'")
    if config.t_end is None:
        raise ConfigError("run.t_end is required")
    _check_timescales(config)

    params = config.to_params()
    units = UnitSystem.trap_units(params.atom_mass, params.omega_z)
    ip = internal_params(params, units)
    grid = build_grid(config, params)
    if ground is None:
        ground = solve_ground(config, params, grid)
    psi1G = np.asarray(ground.psi1G, dtype=float)
    grid.set_edges_from_density(psi1G ** 2, config.edge_fraction)
    grid_int = grid.scaled(units.length_scale)
    pots = trap_potentials(ip, grid_int)

    # the field solve marches in z explicitly; the absorption length
    # 1/alpha must stay resolved or the march is unstable
    dens_peak = float(np.max(psi1G ** 2)) * units.length_scale
    alpha_dz = 0.5 * max(ip.dp, ip.dc) * dens_peak * grid_int.dz
    if alpha_dz > 1.0:
        raise ConfigError(
            f"grid step under-resolves the absorption length "
            f"(alpha*dz = {alpha_dz:.2f} > 1); increase grid.points or "
            "lower the optical depth")
    d_profile = optical_density(params, psi1G, grid.z)
    d_total = float(d_profile[-1])

    diag = Diagnostics()
    if config.mode != "test_state" and config.omega_p0 > 0 \
            and config.omega_c0 > 0:
        tau_min = minimum_pulse_duration(params, d_total, config.omega_c0)
        if config.tau0 < tau_min:
            msg = (f"probe duration {config.tau0:.3g}s is under the "
                   f"bandwidth minimum {tau_min:.3g}s; expect pulse "
                   "distortion and loss")
            warnings.warn(msg)
            diag.notes.append(msg)

    drive = _build_drive(config)
    t_end = config.t_end
    if config.mode != "test_state" and config.omega_p0 > 0:
        t_start = min(0.0, config.t_peak - _PULSE_MARGIN * config.tau0)
    else:
        t_start = 0.0
    if t_end <= t_start:
        raise ConfigError(f"run.t_end={t_end:.3g}s does not reach past the "
                          f"input stage start {t_start:.3g}s")

    light_ivals = _light_intervals(config, t_start, t_end)
    windows = _switch_windows(config, t_start, t_end)
    captures = [(float(t), "snapshot") for t in config.snapshot_times]
    t_rev = None
    if config.t_on is not None:
        t_rev = config.t_on + 4.0 * config.tau_s
        if t_rev <= t_end:
            captures.append((t_rev, "rev"))
        else:
            diag.notes.append("revival sample time exceeds t_end; "
                              "no fidelity metrics")
            t_rev = None

    # initial state
    if config.mode == "test_state":
        wf0 = scenarios.build_test_wavefunctions(
            scenarios.state_from_config(config), psi1G, grid.z)
        psi0 = SpinorWavefunction(units.wavefunction_to_internal(wf0.psi1),
                                  units.wavefunction_to_internal(wf0.psi2))
    else:
        p1 = units.wavefunction_to_internal(psi1G).astype(complex)
        psi0 = SpinorWavefunction(p1, np.zeros_like(p1))

    sim = _Sim(config, params, units, ip, grid, grid_int, pots, drive,
               psi0, diag)
    sim.execute(t_start, t_end, light_ivals, windows, captures)

    fidelity, _report = _fidelity_metrics(config, params, grid, psi1G, sim,
                                          d_profile)
    diag.wall_time = time.time() - t_wall

    trace_t = np.array([r[0] for r in sim.trace])
    trace_p = np.array([r[1] for r in sim.trace], dtype=complex)
    trace_c = np.array([r[2] for r in sim.trace], dtype=complex)
    monitor = np.array(sim.monitor_rows) if sim.monitor_rows else None

    result = RunResult(
        config=config, params=params, units=units, grid=grid,
        grid_internal=grid_int, ground=ground, d_total=d_total,
        trace_t=trace_t, trace_omega_p=trace_p, trace_omega_c=trace_c,
        norms=np.array(sim.norm_rows), monitor=monitor,
        snapshots=sim.snapshots,
        psi_final=sim._psi_si(),
        psi_rev=sim.psi_rev, lights_rev=sim.lights_rev,
        t_rev=sim.t_rev_actual, fidelity=fidelity, diagnostics=diag,
        out_dir=out_dir)

    if out_dir is not None:
        _write_artifacts(result, t_start, t_end)
    return result


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_artifacts(result, t_start, t_end):
    out = result.out_dir
    os.makedirs(os.path.join(out, "snapshots"), exist_ok=True)

    write_pmt_trace(os.path.join(out, "pmt_trace.csv"), result.trace_t,
                    result.trace_omega_p, result.trace_omega_c)
    np.savetxt(os.path.join(out, "norms.csv"), result.norms, delimiter=",",
               header="t,norm,norm_excited,loss_rate", comments="",
               fmt="%.17e")
    if result.monitor is not None:
        np.savetxt(os.path.join(out, "monitor_trace.csv"), result.monitor,
                   delimiter=",",
                   header="t,probe_intensity,coupling_intensity",
                   comments="", fmt="%.17e")

    snap_entries = []
    for i, (t, wf) in enumerate(result.snapshots):
        name = f"{i:04d}.csv"
        write_snapshot(os.path.join(out, "snapshots", name), result.grid, wf)
        snap_entries.append({"index": i, "time": t,
                             "file": f"snapshots/{name}"})

    if result.fidelity is not None:
        with open(os.path.join(out, "fidelity.json"), "w") as fh:
            json.dump(_jsonable(result.fidelity), fh, indent=2,
                      sort_keys=True)
            fh.write("\n")

    manifest = {
        "label": result.config.label,
        "config": result.config.to_manifest_dict(),
        "derived": {
            "mu_J": result.ground.mu,
            "d_total": result.d_total,
            "a_ho_m": result.units.length_scale,
            "z_in_m": result.grid.z_in,
            "z_out_m": result.grid.z_out,
            "t_start_s": t_start,
            "t_end_s": t_end,
            "t_rev_s": result.t_rev,
            "n_light_steps": result.diagnostics.n_light_steps,
            "n_window_steps": result.diagnostics.n_window_steps,
            "n_storage_steps": result.diagnostics.n_storage_steps,
        },
        "snapshots": snap_entries,
        "notes": list(result.diagnostics.notes),
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# parameter sweeps

_STATE_COLUMNS = ("l2", "a2", "a_phi2", "l_phi2", "a_phi1", "l_phi1")
_METRIC_COLUMNS = ("e_write", "e_write_zc", "e_out", "beta", "transmission_T")
_GROUND_SAFE_SECTIONS = {"probe", "coupling", "state", "run"}


def _sweep_row(task):
    base, overrides, row_dir, label, ground = task
    cfg = dataclasses.replace(base, label=label)
    row = {"row": label.split("_")[-1], "label": label, "status": "ok",
           "message": ""}
    try:
        for key, val in overrides:
            apply_override(cfg, key, repr(val))
        row.update({key: val for key, val in overrides})
        res = run(cfg, out_dir=row_dir, ground=ground)
        for name in _STATE_COLUMNS:
            row[name] = getattr(cfg, name)
        for name in _METRIC_COLUMNS:
            v = (res.fidelity or {}).get(name)
            row[name] = "" if v is None else v
    except Exception as exc:  # keep sweeping; record the failure
        row["status"] = "error"
        row["message"] = f"{type(exc).__name__}: {exc}"
        for key, val in overrides:
            row.setdefault(key, val)
        for name in _STATE_COLUMNS:
            row.setdefault(name, getattr(cfg, name, ""))
        for name in _METRIC_COLUMNS:
            row.setdefault(name, "")
    return row


def sweep(base_config, axes, out_dir=None, workers=None):
    """Cartesian sweep over config fields.

    axes: sequence of (dotted_key, values) pairs, e.g.
    [("state.l2", [8e-6, 10e-6])].  Returns the summary rows; each row's run
    artifacts land in <out_dir>/row_NNN.  A failing row is recorded and the
    sweep continues.  Worker count comes from `workers` or the
    SLOWLIGHT_WORKERS environment variable.
    """
    import csv
    from itertools import product

    axes = [(key, list(vals)) for key, vals in axes]
    for key, vals in axes:
        if not vals:
            raise ConfigError(f"sweep axis {key} has no values")
        # fail fast on a bad key/value instead of erroring every row
        apply_override(dataclasses.replace(base_config), key, repr(vals[0]))

    ground = None
    if all(key.split(".")[0] in _GROUND_SAFE_SECTIONS for key, _ in axes):
        params = base_config.to_params()
        grid = build_grid(base_config, params)
        ground = solve_ground(base_config, params, grid)

    tasks = []
    for i, combo in enumerate(product(*(vals for _, vals in axes))):
        label = f"row_{i:03d}"
        row_dir = os.path.join(out_dir, label) if out_dir is not None else None
        overrides = list(zip((key for key, _ in axes), combo))
        tasks.append((base_config, overrides, row_dir, label, ground))

    if workers is None:
        workers = int(os.environ.get("SLOWLIGHT_WORKERS", "1"))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        header = (["row", "label", "status", "message"]
                  + [key for key, _ in axes]
                  + list(_STATE_COLUMNS) + list(_METRIC_COLUMNS))
        with open(os.path.join(out_dir, "sweep_summary.csv"), "w",
                  newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=header)
            writer.writeheader()
            writer.writerows(rows)
    return rows


# ---------------------------------------------------------------------------
# offline analysis

def analyze(snapshot_path, omega_c0, trace_path=None, manifest_path=None):
    """Fidelity metrics recomputed from stored artifacts.

    The manifest is found at ../manifest.json relative to the snapshot's
    directory unless given explicitly.  The ground |1> profile is estimated
    as sqrt(total density) of the snapshot, which is exact up to the
    radiative losses of the run.
    """
    try:
        z, wf = read_snapshot(snapshot_path)
    except (OSError, ValueError, IndexError) as exc:
        raise AnalysisError(
            f"cannot read snapshot {snapshot_path}: {exc}") from exc
    if manifest_path is None:
        manifest_path = os.path.join(
            os.path.dirname(os.path.dirname(os.path.abspath(snapshot_path))),
            "manifest.json")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise AnalysisError(f"cannot read manifest {manifest_path}: {exc}")
    cfg_dict = dict(manifest["config"])
    cfg_dict["snapshot_times"] = tuple(cfg_dict.get("snapshot_times", ()))
    config = ExperimentConfig(**cfg_dict)
    params = config.to_params()

    n = len(z)
    dz = z[1] - z[0]
    grid = Grid1D(z[0], z[0] + n * dz, n)
    if isinstance(wf, ThreeLevelWavefunction):
        wf = SpinorWavefunction(wf.psi1, wf.psi2)
    dens = wf.total_density().real
    grid.set_edges_from_density(dens, config.edge_fraction)
    psi1G = np.sqrt(dens)

    pred = ideal_revived_probe(wf, omega_c0, grid)
    lights = integrate_light_adiabatic(params, grid, wf, 0.0, omega_c0)
    inside = grid.inside()
    report = {
        "snapshot": os.path.abspath(snapshot_path),
        "omega_c0": float(omega_c0),
        "prediction_peak": float(pred.amplitude.max()),
        "e_write": None,
        "e_write_zc": None,
        "e_out": None,
        "z_critical": None,
    }
    try:
        report["e_write"] = write_error(lights.omega_p, pred, z=grid.z,
                                        mask=inside)
    except AnalysisError:
        pass  # no revived field at all (e.g. a pure |1> snapshot)
    try:
        zc = z_critical(params, psi1G, grid)
        report["z_critical"] = float(zc)
        if report["e_write"] is not None:
            report["e_write_zc"] = write_error(lights.omega_p, pred,
                                               z=grid.z,
                                               mask=inside & (grid.z > zc))
    except AnalysisError:
        pass

    if trace_path is not None:
        t_origin = manifest.get("derived", {}).get("t_rev_s")
        if t_origin is None:
            raise AnalysisError(
                "manifest records no revival time; an output-error analysis "
                "needs a run with a switch-on")
        try:
            t, ip_, _, phase = read_pmt_trace(trace_path)
        except (OSError, ValueError, IndexError) as exc:
            raise AnalysisError(
                f"cannot read trace {trace_path}: {exc}") from exc
        op = np.sqrt(ip_) * np.exp(1j * phase)
        mapped = map_output_to_space(params, grid, psi1G, omega_c0, t, op,
                                     float(t_origin))
        report["e_out"] = output_error(lights.omega_p, mapped, grid.z,
                                       mask=inside)
        report["t_origin"] = float(t_origin)
    return report
