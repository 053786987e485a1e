"""Command-line front end.

Exit codes: 0 success, 1 failed verification, 2 bad input (unreadable file,
malformed JSON, invalid scenario), 3 term budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from sfcrel.analytic import DEFAULT_TERM_BUDGET, TermBudgetExceeded, reliability_general
from sfcrel.experiments import (
    CASES,
    ReliabilityReport,
    SweepSpec,
    rows_to_csv,
    run_sweep,
    verify,
)
from sfcrel.model import ScenarioError, load_scenario
from sfcrel.oracle import (
    DEFAULT_NODE_CAP,
    exhaustive_reliability,
    instantiate_tree,
    monte_carlo_estimate,
)

DEFAULT_SEED = 20190527
DEFAULT_TRIALS = 10**6
BUDGET_ENV = "SFCREL_BUDGET"

EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfcrel", description="Reliability of service function chains in data centers."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--budget", type=_positive_int, help="leaf-term budget")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS)
    mc.add_argument("--seed", type=int, default=DEFAULT_SEED)
    mc.add_argument("--workers", type=_positive_int, default=1)

    cap = argparse.ArgumentParser(add_help=False)
    cap.add_argument("--node-cap", type=_positive_int, default=DEFAULT_NODE_CAP)

    for name, parents, text in (
        ("analyze", [common], "closed-form reliability"),
        ("simulate", [common, mc], "Monte-Carlo estimate"),
        ("exact", [common, cap], "exhaustive enumeration"),
        ("verify", [common, mc, cap], "compare the analytic value with both oracles"),
    ):
        p = sub.add_parser(name, parents=parents, help=text)
        p.add_argument("scenario", help="scenario JSON file")

    sweep = sub.add_parser("sweep", parents=[common], help="regenerate a results table")
    sweep.add_argument("--table", type=int, choices=(2, 3, 4), required=True)
    sweep.add_argument("--case", type=int, choices=sorted(CASES))
    return parser


def _budget(args) -> int:
    if args.budget is not None:
        return args.budget
    env = os.environ.get(BUDGET_ENV)
    if env:
        try:
            return _positive_int(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise ScenarioError(f"{BUDGET_ENV}: expected a positive integer, got {env!r}")
    return DEFAULT_TERM_BUDGET


def _report_text(report: ReliabilityReport) -> str:
    lines = []
    if report.analytic is not None:
        lines.append(f"reliability     {report.analytic.value:.10f}")
        lines.append(f"terms           {report.analytic.term_count}")
        lines.append(f"time            {report.analytic.eval_time * 1e3:.3f} ms")
    if report.exhaustive is not None:
        lines.append(f"exhaustive      {report.exhaustive:.10f}")
    if report.monte_carlo is not None:
        mc = report.monte_carlo
        lines.append(
            f"monte carlo     {mc.mean:.10f} +/- {mc.half_width:.2e} "
            f"({mc.trials} trials, seed {report.seed})"
        )
    for name, ok in report.checks.items():
        lines.append(f"check {name:<10} {'pass' if ok else 'FAIL'}")
    if report.checks:
        lines.append("PASS" if report.passed else "FAIL")
    return "\n".join(lines) + "\n"


def _report_csv(report: ReliabilityReport) -> str:
    row: dict[str, Any] = {}
    if report.analytic is not None:
        row["analytic"] = report.analytic.value
        row["terms"] = report.analytic.term_count
    if report.exhaustive is not None:
        row["exhaustive"] = report.exhaustive
    if report.monte_carlo is not None:
        row["mc_mean"] = report.monte_carlo.mean
        row["mc_ci95_half_width"] = report.monte_carlo.half_width
        row["mc_trials"] = report.monte_carlo.trials
        row["seed"] = report.seed
    if report.checks:
        row["passed"] = report.passed
    return rows_to_csv([row])


def _render_report(report: ReliabilityReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        return _report_csv(report)
    return _report_text(report)


def _render_rows(rows: list[dict[str, Any]], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    # text falls back to CSV: the table is the human-readable form too
    return rows_to_csv(rows)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _run(args) -> int:
    budget = _budget(args)
    if args.command == "sweep":
        cases = [args.case] if args.case else ([1, 2] if args.table == 2 else [1])
        rows = []
        for case in cases:
            rows += run_sweep(SweepSpec(table=args.table, case=case, term_budget=budget))
        _emit(_render_rows(rows, args.format), args.out)
        return 0

    scenario = load_scenario(args.scenario)
    status = 0
    if args.command == "analyze":
        report = ReliabilityReport(scenario, reliability_general(scenario, budget))
    elif args.command == "exact":
        tree = instantiate_tree(scenario)
        report = ReliabilityReport(
            scenario, exhaustive=exhaustive_reliability(tree, scenario.demand, args.node_cap)
        )
    elif args.command == "simulate":
        tree = instantiate_tree(scenario)
        mc = monte_carlo_estimate(tree, scenario.demand, args.trials, args.seed, args.workers)
        report = ReliabilityReport(scenario, monte_carlo=mc, seed=args.seed)
    else:
        report = verify(
            scenario, args.trials, args.seed, args.node_cap, args.workers, term_budget=budget
        )
        status = 0 if report.passed else EXIT_VERIFY_FAILED
    _emit(_render_report(report, args.format), args.out)
    return status


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TermBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
