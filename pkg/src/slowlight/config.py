"""Experiment configuration: file parsing, unit handling, defaults.

Config files are INI-style text with SI unit suffixes on the values:

    [atom]
    species = na
    count = 1.2e6
    trap_frequency = 2pi*21 Hz
    beam_area = 2.1642e-10 m2

    [probe]
    amplitude = 2pi*3.5 MHz
    duration = 1.5 us

A value is `[2pi*]<number>[pi] [unit]`; the optional `2pi*` prefix converts
a cyclic frequency, the optional trailing `pi` scales phase amplitudes, and
fractions like `1/12` are accepted where oscillator strengths go.  All values
are stored in SI (rad/s for frequencies) on a flat ExperimentConfig.
"""

import configparser
import dataclasses
import io
import math
import re
from dataclasses import dataclass

from .errors import ConfigError
from .params import MASS_NA, MASS_RB, PhysicalParams

MODES = ("pulse", "test_state", "three_level_windows")

SPECIES_DEFAULTS = {
    "na": {"atom_mass": MASS_NA, "gamma_e": 2 * math.pi * 10e6,
           "sigma0": 1.65e-13, "a": 2.75e-9},
    "rb": {"atom_mass": MASS_RB, "gamma_e": 2 * math.pi * 6e6,
           "sigma0": 2.91e-13, "a": 5.36e-9},
}

_UNIT_SCALE = {
    "": 1.0, "rad": 1.0, "kg": 1.0, "J": 1.0,
    "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9,
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9,
    "m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9,
    "m2": 1.0, "cm2": 1e-4, "um2": 1e-12,
}

_QUANTITY_RE = re.compile(
    r"^\s*(2pi\*)?\s*([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*(pi)?"
    r"(?:\s*([A-Za-z0-9]+))?\s*$")


def parse_quantity(text):
    """Parse '2pi*8 MHz', '1.5 us', '-0.2pi', '1/12', '1e6' -> float (SI)."""
    text = str(text).strip()
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            return float(num) / float(den)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad fraction {text!r}") from exc
    m = _QUANTITY_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse quantity {text!r}")
    twopi, number, trailing_pi, unit = m.groups()
    try:
        value = float(number)
    except ValueError as exc:
        raise ConfigError(f"bad number in {text!r}") from exc
    if unit is not None and unit not in _UNIT_SCALE:
        raise ConfigError(f"unknown unit {unit!r} in {text!r}")
    value *= _UNIT_SCALE.get(unit or "", 1.0)
    if twopi:
        value *= 2 * math.pi
    if trailing_pi:
        value *= math.pi
    return value


@dataclass
class ExperimentConfig:
    # [run]
    label: str = "run"
    mode: str = "pulse"
    t_end: float = None
    snapshot_times: tuple = ()
    monitor_z: float = None
    trace_stride: int = 1
    norm_stride: int = 200
    # [grid]
    n_points: int = 1024
    z_half: float = None          # None -> 1.6 x Thomas-Fermi radius
    edge_fraction: float = 1e-6
    # [atom]
    species: str = "na"
    atom_mass: float = None
    nc: float = 1.2e6
    omega_z: float = 2 * math.pi * 21.0
    area: float = None
    gamma_e: float = None
    sigma0: float = None
    f13: float = 0.5
    f23: float = 0.5
    a11: float = None
    a12: float = None
    a22: float = None
    v2_offset: float = 0.0
    # [probe]
    omega_p0: float = 0.0
    tau0: float = 1.5e-6
    t_peak: float = 0.0
    # [coupling]
    omega_c0: float = 2 * math.pi * 8e6
    t_off: float = None
    t_on: float = None
    tau_s: float = 0.1e-6
    # [state]
    a2: float = 0.5
    l2: float = 10e-6
    a_phi2: float = 0.0
    l_phi2: float = 5e-6
    a_phi1: float = 0.0
    l_phi1: float = 5e-6
    # [numerics]
    dt_light: float = None
    dt_storage: float = None
    relax_dtau: float = 0.01
    relax_tol: float = 1e-10
    groundstate: str = "relax"
    window: float = None
    use_numba: bool = True

    def to_params(self):
        for name in ("atom_mass", "area", "gamma_e", "sigma0",
                     "a11", "a12", "a22"):
            if getattr(self, name) is None:
                raise ConfigError(f"config field {name!r} is not set "
                                  "(unknown species and no explicit value?)")
        return PhysicalParams(
            atom_mass=self.atom_mass, Nc=self.nc, omega_z=self.omega_z,
            area_A=self.area, Gamma=self.gamma_e, sigma0=self.sigma0,
            f13=self.f13, f23=self.f23,
            a11=self.a11, a12=self.a12, a22=self.a22,
            V2_offset=self.v2_offset)

    def to_manifest_dict(self):
        out = dataclasses.asdict(self)
        out["snapshot_times"] = list(self.snapshot_times)
        return out


# (section, key) -> (attribute, parser)
_SCHEMA = {
    ("run", "label"): ("label", "str"),
    ("run", "mode"): ("mode", "str"),
    ("run", "t_end"): ("t_end", "quantity"),
    ("run", "snapshots"): ("snapshot_times", "quantity_list"),
    ("run", "monitor_z"): ("monitor_z", "quantity"),
    ("run", "trace_stride"): ("trace_stride", "int"),
    ("run", "norm_stride"): ("norm_stride", "int"),
    ("grid", "points"): ("n_points", "int"),
    ("grid", "half_width"): ("z_half", "quantity"),
    ("grid", "edge_fraction"): ("edge_fraction", "quantity"),
    ("atom", "species"): ("species", "str"),
    ("atom", "mass"): ("atom_mass", "quantity"),
    ("atom", "count"): ("nc", "quantity"),
    ("atom", "trap_frequency"): ("omega_z", "quantity"),
    ("atom", "beam_area"): ("area", "quantity"),
    ("atom", "gamma"): ("gamma_e", "quantity"),
    ("atom", "sigma0"): ("sigma0", "quantity"),
    ("atom", "f13"): ("f13", "quantity"),
    ("atom", "f23"): ("f23", "quantity"),
    ("atom", "a11"): ("a11", "quantity"),
    ("atom", "a12"): ("a12", "quantity"),
    ("atom", "a22"): ("a22", "quantity"),
    ("atom", "v2_offset"): ("v2_offset", "quantity"),
    ("probe", "amplitude"): ("omega_p0", "quantity"),
    ("probe", "duration"): ("tau0", "quantity"),
    ("probe", "peak_time"): ("t_peak", "quantity"),
    ("coupling", "amplitude"): ("omega_c0", "quantity"),
    ("coupling", "off_time"): ("t_off", "quantity"),
    ("coupling", "on_time"): ("t_on", "quantity"),
    ("coupling", "switch_time"): ("tau_s", "quantity"),
    ("state", "a2"): ("a2", "quantity"),
    ("state", "l2"): ("l2", "quantity"),
    ("state", "a_phi2"): ("a_phi2", "quantity"),
    ("state", "l_phi2"): ("l_phi2", "quantity"),
    ("state", "a_phi1"): ("a_phi1", "quantity"),
    ("state", "l_phi1"): ("l_phi1", "quantity"),
    ("numerics", "dt_light"): ("dt_light", "quantity"),
    ("numerics", "dt_storage"): ("dt_storage", "quantity"),
    ("numerics", "relax_dtau"): ("relax_dtau", "quantity"),
    ("numerics", "relax_tol"): ("relax_tol", "quantity"),
    ("numerics", "groundstate"): ("groundstate", "str"),
    ("numerics", "window"): ("window", "quantity"),
    ("numerics", "use_numba"): ("use_numba", "bool"),
}

_FIELD_TO_KEY = {attr: (sec, key) for (sec, key), (attr, _) in _SCHEMA.items()}


def _parse_value(kind, raw):
    raw = str(raw).strip()
    if kind == "str":
        return raw
    if kind == "int":
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"bad integer {raw!r}") from exc
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"bad boolean {raw!r}")
    if kind == "quantity":
        return parse_quantity(raw)
    if kind == "quantity_list":
        parts = [p for p in raw.replace(",", " ").split() if p]
        # re-join number+unit pairs: "8 us 101 ms" -> ("8 us", "101 ms")
        values, pending = [], None
        for part in parts:
            if pending is None:
                pending = part
            elif part in _UNIT_SCALE:
                values.append(parse_quantity(pending + " " + part))
                pending = None
            else:
                values.append(parse_quantity(pending))
                pending = part
        if pending is not None:
            values.append(parse_quantity(pending))
        return tuple(values)
    raise ConfigError(f"unknown schema kind {kind!r}")


def apply_override(config, dotted_key, raw_value):
    """Set one 'section.key = value' pair on the config, parsing units."""
    section, _, key = dotted_key.partition(".")
    if not key:
        raise ConfigError(f"override {dotted_key!r} must look like "
                          "'section.key'")
    try:
        attr, kind = _SCHEMA[(section, key)]
    except KeyError:
        raise ConfigError(f"unknown config key '{section}.{key}'") from None
    setattr(config, attr, _parse_value(kind, raw_value))
    return config


def resolve_species_defaults(config):
    sp = config.species.lower()
    if sp in SPECIES_DEFAULTS:
        d = SPECIES_DEFAULTS[sp]
        if config.atom_mass is None:
            config.atom_mass = d["atom_mass"]
        if config.gamma_e is None:
            config.gamma_e = d["gamma_e"]
        if config.sigma0 is None:
            config.sigma0 = d["sigma0"]
        for name in ("a11", "a12", "a22"):
            if getattr(config, name) is None:
                setattr(config, name, d["a"])
    elif sp != "custom":
        raise ConfigError(f"unknown species {config.species!r} "
                          "(na, rb or custom)")
    if config.mode not in MODES:
        raise ConfigError(f"unknown mode {config.mode!r}; "
                          f"expected one of {MODES}")
    return config


def parse_config(path_or_text, base=None):
    """Load a config file (path or literal text) on top of `base`."""
    cp = configparser.ConfigParser(interpolation=None,
                                   inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    text = path_or_text
    if "\n" not in str(path_or_text):
        try:
            with open(path_or_text, "r") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path_or_text!r}: {exc}") from exc
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    config = dataclasses.replace(base) if base is not None else ExperimentConfig()
    for section in cp.sections():
        for key, raw in cp.items(section):
            if (section, key) not in _SCHEMA:
                raise ConfigError(f"unknown config key '{section}.{key}'")
            attr, kind = _SCHEMA[(section, key)]
            setattr(config, attr, _parse_value(kind, raw))
    return resolve_species_defaults(config)


def dump_config(config):
    """Render a config back to file text (SI numbers, no unit sugar)."""
    buf = io.StringIO()
    last_section = None
    for (section, key), (attr, kind) in _SCHEMA.items():
        value = getattr(config, attr)
        if value is None:
            continue
        if section != last_section:
            if last_section is not None:
                buf.write("\n")
            buf.write(f"[{section}]\n")
            last_section = section
        if kind == "quantity_list":
            rendered = " ".join(repr(v) for v in value)
        elif kind == "quantity":
            rendered = repr(float(value))
        else:
            rendered = str(value)
        buf.write(f"{key} = {rendered}\n")
    return buf.getvalue()
