"""Command-line entry point: ``wsanqos run`` and ``wsanqos compare``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, parse_config, validate
from .metrics import OutputError, write_outputs
from .sim import RunResult, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2

DEFAULT_SEED = 1


def _fmt(x: float | None) -> str:
    return "-" if x is None else f"{x:.4f}"


def _load(args: argparse.Namespace, manager: str | None) -> ScenarioConfig:
    config = parse_config(args.scenario)
    changes = {}
    if manager is not None:
        changes["manager"] = manager
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "duration", None) is not None:
        changes["duration_s"] = args.duration
    config = config.replace(**changes)
    errors = validate(config)
    if errors:
        raise ConfigError(errors)
    return config


def _header(config: ScenarioConfig, scenario: str) -> str:
    return (
        f"scenario: {Path(scenario).name}  manager: {config.manager}  seed: {config.seed}  "
        f"duration: {config.duration_s:g} s  config: {config.digest()}"
    )


def format_run_table(result: RunResult) -> str:
    lines = [f"{'flow':<6}{'avg_dmr':>9}{'released':>10}{'on_time':>9}{'missed':>8}{'final_period_ms':>17}"]
    for fs in result.summary.managed:
        lines.append(
            f"{fs.flow:<6}{_fmt(fs.avg_dmr):>9}{fs.released:>10}{fs.on_time:>9}{fs.missed:>8}"
            f"{fs.final_period / 1e3:>17.3f}"
        )
    return "\n".join(lines)


def format_compare_table(open_loop: RunResult, closed_loop: RunResult) -> str:
    lines = [f"{'flow':<6}{'open_loop':>11}{'closed_loop':>13}{'reduction':>11}"]
    closed = closed_loop.summary.flows
    for fs in open_loop.summary.managed:
        a, b = fs.avg_dmr, closed[fs.flow].avg_dmr
        if a is None or b is None:
            factor = "-"
        elif b == 0:
            factor = "inf"
        else:
            factor = f"{a / b:.2f}x"
        lines.append(f"{fs.flow:<6}{_fmt(a):>11}{_fmt(b):>13}{factor:>11}")
    return "\n".join(lines)


def cmd_run(args: argparse.Namespace) -> int:
    config = _load(args, args.manager)
    result = run_scenario(config, trace=args.trace)
    write_outputs(result.summary, args.out, result.trace)
    print(_header(config, args.scenario))
    print(format_run_table(result))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    base = _load(args, None)
    results = {}
    for manager in ("none", "fuzzy"):
        results[manager] = run_scenario(base.replace(manager=manager))
        write_outputs(results[manager].summary, Path(args.out) / manager)
    print(
        f"scenario: {Path(args.scenario).name}  seed: {base.seed}  "
        f"duration: {base.duration_s:g} s  open loop = none, closed loop = fuzzy"
    )
    print(format_compare_table(results["none"], results["fuzzy"]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsanqos", description="WSAN feedback-scheduling simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one scenario run")
    run.add_argument("--scenario", required=True, help="scenario JSON file")
    run.add_argument("--manager", choices=("none", "fuzzy"), help="override the scenario's QoS manager")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--duration", type=float, help="override the run length in seconds")
    run.add_argument("--out", default="out", help="output directory (default: out)")
    run.add_argument("--trace", action="store_true", help="also write events.log")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="run open loop and closed loop on one seed")
    cmp_.add_argument("--scenario", required=True, help="scenario JSON file")
    cmp_.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed (default: 1)")
    cmp_.add_argument("--out", default="out", help="output directory (default: out)")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
