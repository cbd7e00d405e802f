"""Command line front end: run sweeps to CSV, print the power table."""

from __future__ import annotations

import argparse
import sys

from .harness import default_config, emit_csv, run_sweep
from .metrics import ARCHITECTURES, PowerConstants, hardware_power


def _parse_grid(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from exc


def _read_config_file(path: str) -> dict:
    """Flat key = value file mirroring the CLI flags."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridsim",
        description="mmWave hybrid precoding link-level simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo sweep to CSV")
    sim.add_argument("scenario", choices=("fig4", "fig5", "fig6", "custom"))
    sim.add_argument("--trials", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--snr", type=_parse_grid, default=None, metavar="DB,DB,...")
    sim.add_argument("--users", type=_parse_grid, default=None, metavar="N,N,...")
    sim.add_argument("--pilots", type=int, default=None)
    sim.add_argument("--csi", choices=("perfect", "estimated", "both"), default=None)
    sim.add_argument("--out", default=None, metavar="PATH.csv")
    sim.add_argument("--config", default=None, metavar="FILE")

    power = sub.add_parser("power-table", help="print hardware power per architecture")
    power.add_argument("--n", type=int, default=256)
    power.add_argument("--n-rf", type=int, default=16)
    return parser


_CONFIG_PARSERS = {
    "trials": int,
    "seed": int,
    "snr": _parse_grid,
    "users": _parse_grid,
    "pilots": int,
    "csi": str,
    "out": str,
}


def _simulate(args) -> int:
    options: dict = {}
    if args.config:
        for key, raw in _read_config_file(args.config).items():
            if key not in _CONFIG_PARSERS:
                raise ValueError(f"unknown config key {key!r}")
            options[key] = _CONFIG_PARSERS[key](raw)
    for key in _CONFIG_PARSERS:
        value = getattr(args, key)
        if value is not None:
            options[key] = value  # CLI flags override the file

    out_path = options.pop("out", None) or f"{args.scenario}.csv"
    overrides: dict = {}
    if "trials" in options:
        overrides["trials"] = options["trials"]
    if "seed" in options:
        overrides["seed"] = options["seed"]
    if "snr" in options:
        overrides["snr_grid_db"] = options["snr"]
    if "pilots" in options:
        overrides["pilot_budget"] = options["pilots"]
    if "csi" in options:
        overrides["csi"] = options["csi"]
    if "users" in options:
        users = options["users"]
        if args.scenario == "fig5" or len(users) > 1:
            overrides["user_grid"] = tuple(int(u) for u in users)
        else:
            overrides["n_users"] = int(users[0])
            overrides["n_rf"] = int(users[0])

    config = default_config(args.scenario, **overrides)
    result = run_sweep(config)
    emit_csv(result, out_path)
    print(f"wrote {len(result.rows)} rows to {out_path}")
    return 0


def _power_table(args) -> int:
    constants = PowerConstants()
    print(f"hardware power (mW), N={args.n}, N_RF={args.n_rf}")
    for arch in ARCHITECTURES:
        value = hardware_power(arch, args.n, args.n_rf, constants)
        print(f"  {arch:<14} {value:>10.0f}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _simulate(args)
    return _power_table(args)


if __name__ == "__main__":
    sys.exit(main())
