"""Command-line front end.

    slowlight run <config> [--preset NAME] [--out DIR] [--export FILE]
    slowlight sweep <config> --axis FIELD=START:STOP:N [...] [--out DIR]
    slowlight analyze <snapshot> [--trace FILE] --omega-c0 VALUE

A command takes a config file, a preset name, or both (the file overrides
preset fields).  --export writes the fully-resolved config back out as a
file instead of running, so presets can be copied and edited.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 analysis
error.  Sweep worker count comes from --workers or SLOWLIGHT_WORKERS.
"""

import argparse
import json
import sys

import numpy as np

from . import scenarios
from .config import (dump_config, parse_config, parse_quantity,
                     resolve_species_defaults)
from .engine import analyze, run, sweep
from .errors import AnalysisError, ConfigError, NumericalError


def _load_config(args):
    base = scenarios.preset(args.preset) if args.preset else None
    if args.config is not None:
        cfg = parse_config(args.config, base=base)
    elif base is not None:
        cfg = base
    else:
        raise ConfigError("give a config file, a --preset name, or both")
    return resolve_species_defaults(cfg)


def _cmd_run(args):
    cfg = _load_config(args)
    if args.export:
        with open(args.export, "w") as fh:
            fh.write(dump_config(cfg))
        print(f"wrote {args.export}")
        return 0
    out = args.out if args.out is not None else f"run_{cfg.label}"
    result = run(cfg, out_dir=out)
    d = result.diagnostics
    summary = {
        "out_dir": out,
        "d_total": result.d_total,
        "steps": {"light": d.n_light_steps, "window": d.n_window_steps,
                  "storage": d.n_storage_steps},
        "final_norm": d.final_norm,
        "snapshots": len(result.snapshots),
        "fidelity": {k: v for k, v in (result.fidelity or {}).items()
                     if v is not None},
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _parse_axis(text):
    key, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or len(parts) != 3:
        raise ConfigError(f"bad sweep axis {text!r}; expected "
                          "FIELD=START:STOP:N")
    try:
        start = parse_quantity(parts[0])
        stop = parse_quantity(parts[1])
        n = int(parts[2])
    except (ConfigError, ValueError) as exc:
        raise ConfigError(f"bad sweep axis {text!r}: {exc}") from exc
    if n < 1:
        raise ConfigError(f"sweep axis {text!r} needs at least one point")
    return key.strip(), [float(v) for v in np.linspace(start, stop, n)]


def _cmd_sweep(args):
    cfg = _load_config(args)
    axes = [_parse_axis(a) for a in args.axis]
    out = args.out if args.out is not None else f"sweep_{cfg.label}"
    rows = sweep(cfg, axes, out_dir=out, workers=args.workers)
    n_err = sum(1 for r in rows if r["status"] != "ok")
    print(f"{len(rows)} runs -> {out}/sweep_summary.csv"
          + (f" ({n_err} failed; see the status column)" if n_err else ""))
    return 0


def _cmd_analyze(args):
    omega_c0 = parse_quantity(args.omega_c0)
    report = analyze(args.snapshot, omega_c0, trace_path=args.trace)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="slowlight",
        description="coupled light/condensate runs: slow light, storage, "
                    "revival")
    sub = parser.add_subparsers(dest="command", required=True)

    preset_names = sorted(scenarios.PRESETS)
    p = sub.add_parser("run", help="execute one experiment")
    p.add_argument("config", nargs="?", default=None,
                   help="config file (optional when --preset is given)")
    p.add_argument("--preset", choices=preset_names, metavar="NAME",
                   help="base scenario: " + ", ".join(preset_names))
    p.add_argument("--out", metavar="DIR", help="run directory")
    p.add_argument("--export", metavar="FILE",
                   help="write the resolved config to FILE and exit")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("sweep", help="cartesian parameter sweep")
    p.add_argument("config", nargs="?", default=None)
    p.add_argument("--preset", choices=preset_names, metavar="NAME")
    p.add_argument("--axis", action="append", required=True,
                   metavar="FIELD=START:STOP:N",
                   help="config field and range, e.g. state.l2=4e-6:30e-6:12")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--workers", type=int, default=None,
                   help="process count (default: SLOWLIGHT_WORKERS or 1)")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("analyze", help="fidelity metrics from artifacts")
    p.add_argument("snapshot", help="snapshots/NNNN.csv from a run")
    p.add_argument("--trace", metavar="FILE",
                   help="pmt_trace.csv for the output-error metric")
    p.add_argument("--omega-c0", dest="omega_c0", required=True,
                   metavar="VALUE", help="coupling amplitude, e.g. '2pi*8 MHz'")
    p.set_defaults(fn=_cmd_analyze)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
