"""Command-line front end: run scenarios, compare against baselines."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import kernels
from .controller import ReroutePolicy
from .engine import TraceSummary, improvement_pct, run, run_baseline, summarize
from .errors import ConfigurationError, NmpSimError, ScenarioError
from .monitoring import ProbeConfig
from .scenario import Scenario, bundled_scenario_names, load_bundled_scenario, load_scenario_file
from .trace import write_trace_csv

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

BASELINE_CHOICES = ("none", "no-adapt", "pinned")


def _load(scenario_arg: str) -> tuple[str, Scenario]:
    """Resolve a --scenario argument: a file path or a bundled name."""
    path = Path(scenario_arg)
    if path.is_file():
        return path.stem, load_scenario_file(path)
    if scenario_arg in bundled_scenario_names():
        return scenario_arg, load_bundled_scenario(scenario_arg)
    raise FileNotFoundError(f"scenario file not found: {scenario_arg}")


def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    probe = scenario.probe
    if args.probe_interval_ms is not None or args.alpha is not None:
        probe = ProbeConfig(
            interval_ms=args.probe_interval_ms
            if args.probe_interval_ms is not None
            else probe.interval_ms,
            smoothing_alpha=args.alpha if args.alpha is not None else probe.smoothing_alpha,
        )
    policy = scenario.policy
    if (
        args.hysteresis_ms is not None
        or args.backup_premium is not None
        or args.backup_regular is not None
    ):
        policy = ReroutePolicy(
            hysteresis_ms=args.hysteresis_ms
            if args.hysteresis_ms is not None
            else policy.hysteresis_ms,
            backup_count_premium=args.backup_premium
            if args.backup_premium is not None
            else policy.backup_count_premium,
            backup_count_regular=args.backup_regular
            if args.backup_regular is not None
            else policy.backup_count_regular,
        )
    seed = args.seed if args.seed is not None else scenario.seed
    return replace(scenario, probe=probe, policy=policy, seed=seed)


def _execute(scenario: Scenario, baseline: str):
    if baseline == "none":
        return run(scenario)
    return run_baseline(scenario, pin_paths=(baseline == "pinned"))


def _print_summary(name: str, summary: TraceSummary, scenario: Scenario) -> None:
    print(f"scenario: {name}")
    print(f"  kernel backend:         {kernels.backend_name()}")
    print(f"  probe interval:         {scenario.probe.interval_ms:.1f} ms")
    print(f"  delay budget:           {scenario.budget.ept_ms:.1f} ms")
    print(f"  mean e2e (time-wtd):    {summary.mean_e2e_ms:.4f} ms")
    print(f"  max e2e:                {summary.max_e2e_ms:.4f} ms")
    print(f"  time over budget:       {summary.over_budget_fraction * 100.0:.2f} %")
    counts = ", ".join(f"{k}={v}" for k, v in sorted(summary.event_counts.items()))
    print(f"  events:                 {counts}")


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", required=True, help="scenario file or bundled name")
    parser.add_argument("--seed", type=int, default=None, help="override the run seed")
    parser.add_argument(
        "--probe-interval-ms", type=float, default=None, help="override the probe period"
    )
    parser.add_argument("--alpha", type=float, default=None, help="override the EWMA weight")
    parser.add_argument(
        "--hysteresis-ms", type=float, default=None, help="override the reroute hysteresis"
    )
    parser.add_argument(
        "--backup-premium", type=int, default=None, help="override premium backup count"
    )
    parser.add_argument(
        "--backup-regular", type=int, default=None, help="override regular backup count"
    )


def cmd_run(args: argparse.Namespace) -> int:
    try:
        name, scenario = _load(args.scenario)
        scenario = _apply_overrides(scenario, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ScenarioError as exc:
        _print_violations(args.scenario, exc)
        return EXIT_INVALID
    except (ConfigurationError, ValueError) as exc:
        print(f"error: invalid override: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        rows = _execute(scenario, args.baseline)
        if args.trace:
            write_trace_csv(rows, args.trace)
        summary = summarize(rows, scenario.budget)
    except (NmpSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _print_summary(name, summary, scenario)
    if args.trace:
        print(f"  trace written to:       {args.trace}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        name, scenario = _load(args.scenario)
        scenario = _apply_overrides(scenario, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ScenarioError as exc:
        _print_violations(args.scenario, exc)
        return EXIT_INVALID
    except (ConfigurationError, ValueError) as exc:
        print(f"error: invalid override: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        adaptive_rows = run(scenario)
        baseline_rows = run_baseline(scenario, pin_paths=(args.baseline == "pinned"))
        adaptive = summarize(adaptive_rows, scenario.budget)
        baseline = summarize(baseline_rows, scenario.budget)
        pct = improvement_pct(adaptive, baseline)
    except NmpSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.format == "csv":
        print("scenario,mean_adaptive_ms,mean_baseline_ms,improvement_pct")
        print(f"{name},{adaptive.mean_e2e_ms:.4f},{baseline.mean_e2e_ms:.4f},{pct:.4f}")
        return EXIT_OK
    print("== adaptive ==")
    _print_summary(name, adaptive, scenario)
    print(f"== baseline ({args.baseline}) ==")
    _print_summary(name, baseline, scenario)
    print(f"improvement in mean e2e: {pct:.2f} %")
    return EXIT_OK


def _print_violations(source: str, exc: ScenarioError) -> None:
    print(f"error: invalid scenario {source}:", file=sys.stderr)
    for violation in exc.violations:
        print(f"  - {violation}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmpsim",
        description=(
            "Simulate delay-budgeted audio flows over multi-path networks with "
            "probe-driven rerouting and audio-mode adaptation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run one scenario and print its summary")
    _add_common_arguments(run_parser)
    run_parser.add_argument("--trace", default=None, help="write the trace CSV here")
    run_parser.add_argument(
        "--baseline",
        choices=BASELINE_CHOICES,
        default="none",
        help="disable adaptation: no-adapt pins the mode, pinned also pins the path",
    )
    run_parser.set_defaults(func=cmd_run)

    cmp_parser = sub.add_parser(
        "compare", help="run adaptive vs baseline and print the improvement"
    )
    _add_common_arguments(cmp_parser)
    cmp_parser.add_argument(
        "--baseline",
        choices=("no-adapt", "pinned"),
        default="no-adapt",
        help="baseline to compare against",
    )
    cmp_parser.add_argument("--format", choices=("human", "csv"), default="human")
    cmp_parser.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
