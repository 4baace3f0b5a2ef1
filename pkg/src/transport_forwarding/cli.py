"""Command-line interface.

Subcommands: ``run``, ``compare``, ``lasalle``, ``selftest``, ``presets``.
Exit codes: 0 success, 1 configuration error, 2 numerical failure
(NaN/CFL/history gap), 3 selftest property violation.  Setting TFWD_OUT_DIR
redirects relative output paths.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .errors import ConfigError, NumericalError

__all__ = ["main"]


def _load(args) -> harness.ExperimentConfig:
    if args.preset and args.config:
        raise ConfigError("give either a config file or --preset, not both")
    if args.preset:
        config = harness.preset_config(args.preset)
    elif args.config:
        config = harness.parse_config(args.config)
    else:
        raise ConfigError("a config file or --preset is required")
    if getattr(args, "output", None):
        config = config.replace(output=args.output)
    return config


def _cmd_run(args) -> int:
    config = _load(args)
    traj, summary = harness.run(config)
    print(f"solver = {config.solver}, steps = {traj.t.size - 1}, t_end = {traj.t[-1]:g}")
    for line in summary.lines():
        print(line)
    if config.output:
        from .trajectory import resolve_output_path

        print(f"wrote {resolve_output_path(config.output)}")
    return 0


def _cmd_compare(args) -> int:
    ca = harness.parse_config(args.config_a)
    cb = harness.parse_config(args.config_b)
    report = harness.compare(ca, cb)
    for line in report.lines():
        print(line)
    return 0


def _cmd_lasalle(args) -> int:
    config = _load(args)
    report = harness.lasalle_check(config)
    for line in report.lines():
        print(line)
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest() else 3


def _cmd_presets(args) -> int:
    for name in harness.PRESETS:
        print(f"{name:22s} {harness.preset_note(name)}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tfwd",
        description="Simulate and verify the forwarding-stabilized transport/ODE cascade.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", nargs="?", help="INI config file")
    p_run.add_argument("--preset", help="use a built-in preset instead of a file")
    p_run.add_argument("--output", help="override the output CSV path")
    p_run.set_defaults(fn=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run two configs and tabulate deviations")
    p_cmp.add_argument("config_a")
    p_cmp.add_argument("config_b")
    p_cmp.set_defaults(fn=_cmd_compare)

    p_las = sub.add_parser("lasalle", help="tail diagnostics and limit-system checks")
    p_las.add_argument("config", nargs="?")
    p_las.add_argument("--preset")
    p_las.set_defaults(fn=_cmd_lasalle)

    p_self = sub.add_parser("selftest", help="run the built-in property suite")
    p_self.set_defaults(fn=_cmd_selftest)

    p_pre = sub.add_parser("presets", help="list built-in presets")
    p_pre.set_defaults(fn=_cmd_presets)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
