"""Command-line interface for the Monte-Carlo harness.

Exit codes: 0 on success, 1 on configuration errors, 2 on runtime failures.
Options may come from a flat key=value config file (--config); command-line
flags win over file values.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .harness import ConfigError, RunConfig, diagnose_connectivity, \
    run_monte_carlo, run_sweep

_CONFIG_FIELDS = {f.name: f.type for f in fields(RunConfig)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def parse_config_file(path: str) -> dict:
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = (s.strip() for s in line.split("=", 1))
                if key not in _CONFIG_FIELDS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    return values


def _coerce(key: str, value):
    if isinstance(value, str):
        default = RunConfig.__dataclass_fields__[key].default
        if isinstance(default, bool):
            return value.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if default is None and key in ("rzf_alpha",):
            return float(value)
    return value


def build_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        for key, val in parse_config_file(args.config).items():
            values[key] = _coerce(key, val)
    flag_map = {
        "case": "case", "scheme": "scheme", "trials": "trials",
        "panel": "panel_a", "n_tx": "n_tx", "n_rx": "n_rx",
        "snr_db": "snr_db", "seed": "seed", "out": "out", "jobs": "jobs",
        "d_min": "d_min", "paths": "num_paths", "kappa": "kappa",
        "rho_init": "rho_init", "rho_growth": "rho_growth",
        "max_outer": "max_outer_iters", "rzf_alpha": "rzf_alpha",
        "user_spacing": "user_spacing",
    }
    for flag, field_name in flag_map.items():
        val = getattr(args, flag, None)
        if val is not None:
            values[field_name] = val
    if getattr(args, "trace", False):
        values["trace"] = True
    try:
        config = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc))
    return config.validate()


def _add_common(p):
    p.add_argument("--case", choices=("capacity", "mec", "rzf"))
    p.add_argument("--trials", type=int)
    p.add_argument("--panel", type=float, help="panel side length in wavelengths")
    p.add_argument("--n-tx", dest="n_tx", type=int)
    p.add_argument("--n-rx", dest="n_rx", type=int)
    p.add_argument("--snr-db", dest="snr_db", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=str)
    p.add_argument("--jobs", type=int)
    p.add_argument("--config", type=str, help="flat key=value config file")
    p.add_argument("--d-min", dest="d_min", type=float)
    p.add_argument("--paths", type=int, help="number of propagation paths")
    p.add_argument("--kappa", type=float)
    p.add_argument("--rho-init", dest="rho_init", type=float)
    p.add_argument("--rho-growth", dest="rho_growth", type=float)
    p.add_argument("--max-outer", dest="max_outer", type=int)
    p.add_argument("--rzf-alpha", dest="rzf_alpha", type=float)
    p.add_argument("--user-spacing", dest="user_spacing", type=float)


def build_parser() -> _Parser:
    parser = _Parser(prog="antopt",
                     description="Movable-antenna position optimization harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one case/scheme Monte-Carlo batch")
    _add_common(p_run)
    p_run.add_argument("--scheme", choices=("proposed", "fpa", "as", "pso"))
    p_run.add_argument("--trace", action="store_true",
                       help="write per-trial convergence traces (JSON lines)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="summary row per swept value")
    _add_common(p_sweep)
    p_sweep.add_argument("--scheme", choices=("proposed", "fpa", "as", "pso"))
    p_sweep.add_argument("--schemes", type=str,
                         help="comma list of schemes (overrides --scheme)")
    p_sweep.add_argument("--param", choices=("panel", "antennas"), required=True)
    p_sweep.add_argument("--values", type=str, required=True,
                         help="comma list of values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_diag = sub.add_parser("diagnose-connectivity",
                            help="frequency of split feasible regions under "
                                 "sequential updating")
    p_diag.add_argument("--trials", type=int, default=200)
    p_diag.add_argument("--panel", type=float, default=2.0)
    p_diag.add_argument("--antennas", type=int, default=6)
    p_diag.add_argument("--resolution", type=float, default=0.01)
    p_diag.add_argument("--d-min", dest="d_min", type=float, default=0.5)
    p_diag.add_argument("--sweeps", type=int, default=3)
    p_diag.add_argument("--seed", type=int, default=0)
    p_diag.add_argument("--out", type=str)
    p_diag.set_defaults(func=cmd_diagnose)
    return parser


def cmd_run(args) -> int:
    config = build_config(args)
    records, summary = run_monte_carlo(config)
    print(f"{config.case}/{config.scheme}: n={summary['n']} "
          f"mean={summary['metric_mean']:.6g} "
          f"stderr={summary['metric_stderr']:.3g} "
          f"feasible={summary['feasible_rate']:.3f}")
    if config.out:
        print(f"wrote {config.out}")
    return 0


def cmd_sweep(args) -> int:
    config = build_config(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"values: cannot parse {args.values!r}")
    if not values:
        raise ConfigError("values: empty list")
    schemes = None
    if args.schemes:
        schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
        for s in schemes:
            if s not in ("proposed", "fpa", "as", "pso"):
                raise ConfigError(f"schemes: unknown scheme {s!r}")
    rows = run_sweep(config, args.param, values, schemes)
    for row in rows:
        print(f"{row['scheme']} {row['param']}={row['value']:g}: "
              f"mean={row['metric_mean']:.6g} "
              f"stderr={row['metric_stderr']:.3g}")
    if config.out:
        print(f"wrote {config.out}")
    return 0


def cmd_diagnose(args) -> int:
    if args.trials < 1:
        raise ConfigError("trials: must be >= 1")
    if args.resolution > args.d_min / 10.0:
        raise ConfigError("resolution: must be <= d_min / 10")
    rows, fraction = diagnose_connectivity(
        trials=args.trials, panel_a=args.panel, m=args.antennas,
        d_min=args.d_min, resolution=args.resolution, sweeps=args.sweeps,
        seed=args.seed, out=args.out)
    print(f"split fraction: {fraction:.3f} ({len(rows)} trials)")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
