"""Command-line interface.

Subcommands: eigens, run, sweep, compare, calibrate, selftest.  Every
command that writes takes an explicit --output path (nothing is written
implicitly), accepts --config FILE for a JSON configuration and
repeated --set dotted.path=value overrides, with precedence
flags > file > defaults.  --plot renders a PNG next to the CSV.

Exit codes: 0 success, 1 selftest failure, 2 invalid configuration,
3 numerical failure (integration stability), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, harness, plots, reports
from .config import ConfigError, load_file, merge, resolve
from .lindblad import StabilityError

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _set_override(tree: dict, assignment: str):
    path, sep, value = assignment.partition("=")
    if not sep:
        raise ConfigError(f"--set {assignment!r}: expected dotted.path=value")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value  # bare strings allowed without quotes
    node = tree
    keys = path.split(".")
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {path}: {key} is not a section")
    node[keys[-1]] = parsed


def _resolved(args) -> "harness.RunConfig":
    overrides: dict = {}
    if args.config:
        overrides = merge(overrides, load_file(args.config))
    for assignment in args.set or []:
        _set_override(overrides, assignment)
    return resolve(overrides)


def _add_common(p: argparse.ArgumentParser, output_required=True):
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--set", action="append", metavar="PATH=VALUE",
                   help="override a config field, e.g. --set method.temperature_K=155")
    p.add_argument("--output", required=output_required, help="output CSV path")
    p.add_argument("--plot", action="store_true",
                   help="also render a PNG next to the CSV")


def cmd_eigens(args) -> int:
    cfg = _resolved(args)
    prob = harness.build_problem(cfg)
    basis = prob.basis(cfg.n_basis())
    reports.write_eigens(args.output, basis, prob.ham.v, cfg.canonical_json())
    if args.plot:
        plots.plot_eigens(basis, cfg.potential, _png(args.output))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _resolved(args)
    traj = harness.run(cfg)
    reports.write_trajectory(args.output, traj, cfg.canonical_json())
    if args.plot:
        plots.plot_trajectory(traj, _png(args.output), title=cfg.method_kind)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _resolved(args)
    if cfg.method_kind != "compare":
        raise ConfigError("method.kind: the compare command needs kind='compare'")
    tg, te = harness.compare(cfg)
    reports.write_compare(args.output, tg.times, tg.p_shallow, te.p_shallow,
                          cfg.canonical_json())
    if args.plot:
        plots.plot_compare(tg.times, tg.p_shallow, te.p_shallow, _png(args.output))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _resolved(args)
    try:
        values = tuple(float(v) for v in args.values.split(","))
        snapshots = tuple(float(s) for s in args.snapshots.split(","))
    except ValueError as err:
        raise ConfigError(f"sweep values/snapshots: {err}") from err
    spec = harness.SweepSpec(axis=args.axis, values=values, snapshots=snapshots)
    rows = harness.sweep(spec, cfg)
    reports.write_sweep(args.output, spec.axis, rows, cfg.canonical_json())
    if args.plot:
        plots.plot_sweep(rows, spec.axis, _png(args.output))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    base = _resolved(args)
    try:
        result = harness.calibrate(base)
    except harness.CalibrationError as err:
        print(f"calibration failed: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = json.dumps(result, indent=2, sort_keys=True)
    print(text)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = harness.selftest()
    failures = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_SELFTEST


def _png(csv_path: str) -> str:
    stem = csv_path[:-4] if csv_path.endswith(".csv") else csv_path
    return stem + ".png"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protonwell",
        description="Double-well proton tunnelling under measurement and thermal coupling",
    )
    parser.add_argument("--version", action="version", version=f"protonwell {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigens", help="dump the eigenbasis as CSV (zeta, V, phi_i)")
    _add_common(p)
    p.set_defaults(fn=cmd_eigens)

    p = sub.add_parser("run", help="run one trajectory and write its CSV")
    _add_common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("compare", help="run grid and eigenbasis methods on one config")
    _add_common(p)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sweep", help="sweep temperature or measurement frequency")
    _add_common(p)
    p.add_argument("--axis", required=True, choices=("temperature", "frequency"))
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--snapshots", required=True,
                   help="comma-separated snapshot times in ps, e.g. 10,100")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("calibrate", help="fit length scale and bath parameters")
    _add_common(p, output_required=False)
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("selftest", help="run the reduced invariant suite")
    p.set_defaults(fn=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except StabilityError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
