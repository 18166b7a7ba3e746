"""Command-line front end.

Four commands: ``check`` (validate and dry-run a scenario), ``throughput``
(baseline frames per second), ``migrate`` (one task to hardware, before/after
report), ``explore`` (every software task in turn, ranked by gain).

Exit codes: 0 success, 1 scenario validation failure, 2 analysis error
(deadlock, inconsistency, state budget), 3 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .analysis import DEFAULT_STATE_BUDGET, self_timed_throughput, to_frames_per_second
from .errors import (
    AlreadyHardwareError,
    ScenarioParseError,
    ScenarioValidationError,
    SdfmigError,
    UnknownActorError,
)
from .migration import (
    MigrationCandidate,
    MigrationSpec,
    explore_single_migrations,
    migrate_task,
    migration_gain,
)
from .rational import parse_rational
from .scenario import (
    ExplorationReport,
    Scenario,
    bundled_scenario_path,
    emit_report,
    list_bundled_scenarios,
    load_scenario,
)
from .transforms import build_bound_graph

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ANALYSIS = 2
EXIT_USAGE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdfmig",
                     description="Dataflow throughput analysis and "
                                 "software-to-hardware migration what-ifs.")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_common(sub):
        sub.add_argument("scenario",
                         help="scenario file path or bundled scenario name "
                              f"({', '.join(list_bundled_scenarios())})")
        sub.add_argument("--freq", type=_rational_arg, default=None,
                         help="clock frequency in Hz (default: scenario value, "
                              "usually 100e6)")
        sub.add_argument("--state-budget", type=int, default=DEFAULT_STATE_BUDGET,
                         help="max distinct execution states to explore")

    check = commands.add_parser("check", help="validate a scenario and dry-run "
                                              "its analysis")
    add_common(check)

    throughput = commands.add_parser("throughput", help="baseline throughput")
    add_common(throughput)

    migrate = commands.add_parser("migrate", help="migrate one task to hardware")
    add_common(migrate)
    migrate.add_argument("--task", required=True, help="actor to migrate")
    migrate.add_argument("--speedup", type=_rational_arg, default=Fraction(2),
                         help="hardware speedup factor (default 2)")
    migrate.add_argument("--prefetch", type=int, default=10000,
                         help="prefetch issue time in cycles (default 10000)")
    migrate.add_argument("--format", choices=("text", "csv"), default="text")

    explore = commands.add_parser("explore", help="rank all single-task migrations")
    add_common(explore)
    explore.add_argument("--speedup", type=_rational_arg, default=Fraction(2))
    explore.add_argument("--prefetch", type=int, default=10000)
    explore.add_argument("--format", choices=("text", "csv"), default="text")

    return parser


def _resolve_scenario(argument: str) -> Path:
    path = Path(argument)
    if path.exists():
        return path
    try:
        return bundled_scenario_path(argument)
    except FileNotFoundError:
        raise _UsageError(f"no such scenario file or bundled scenario: {argument}")


def _bound(scenario: Scenario):
    if scenario.platform is not None and scenario.mapping is not None:
        return build_bound_graph(scenario.graph, scenario.platform, scenario.mapping)
    from .graph import disable_auto_concurrency
    return disable_auto_concurrency(scenario.graph)


def _spec_from_args(scenario: Scenario, args) -> MigrationSpec:
    return replace(scenario.defaults, speedup=args.speedup,
                   prefetch_time=args.prefetch)


def run(args, out) -> int:
    scenario = load_scenario(_resolve_scenario(args.scenario))
    clock = args.freq if args.freq is not None else scenario.clock_hz

    if args.command == "check":
        result = self_timed_throughput(_bound(scenario),
                                       state_budget=args.state_budget)
        out.write(f"scenario: {scenario.name}\n")
        out.write("validation: ok\n")
        out.write(f"periodic phase: {result.period_cycles} cycles, "
                  f"{result.reference_firings_per_period} firing(s) of "
                  f"{result.reference_actor}\n")
        return EXIT_OK

    if args.command == "throughput":
        result = self_timed_throughput(_bound(scenario),
                                       state_budget=args.state_budget)
        out.write(f"scenario: {scenario.name}\n")
        out.write(f"throughput: {to_frames_per_second(result, clock)} f/s\n")
        return EXIT_OK

    if args.command == "migrate":
        if scenario.platform is None or scenario.mapping is None:
            raise ScenarioValidationError(
                "migration needs a scenario with a platform and a mapping")
        spec = replace(_spec_from_args(scenario, args), actor=args.task)
        baseline = self_timed_throughput(_bound(scenario),
                                         state_budget=args.state_budget)
        migrated = migrate_task(scenario.graph, scenario.platform,
                                scenario.mapping, spec)
        result = self_timed_throughput(migrated.graph,
                                       state_budget=args.state_budget)
        candidate = MigrationCandidate(
            actor=args.task, result=result,
            fps_after=to_frames_per_second(result, clock),
            gain_fps=migration_gain(baseline, result, clock))
        report = ExplorationReport(scenario=scenario.name, clock_hz=clock,
                                   baseline=baseline, candidates=(candidate,))
        out.write(emit_report(report, format=args.format).decode())
        return EXIT_OK

    if args.command == "explore":
        if scenario.platform is None or scenario.mapping is None:
            raise ScenarioValidationError(
                "exploration needs a scenario with a platform and a mapping")
        baseline, candidates = explore_single_migrations(
            scenario.graph, scenario.platform, scenario.mapping,
            _spec_from_args(scenario, args), clock_hz=clock,
            state_budget=args.state_budget)
        report = ExplorationReport(scenario=scenario.name, clock_hz=clock,
                                   baseline=baseline,
                                   candidates=tuple(candidates))
        out.write(emit_report(report, format=args.format).decode())
        return EXIT_OK

    raise _UsageError(f"unknown command {args.command!r}")  # pragma: no cover


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return run(args, sys.stdout)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioParseError, ScenarioValidationError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except UnknownActorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SdfmigError, AlreadyHardwareError) as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
