"""Numerical studies and analytic-versus-oracle comparisons."""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from sfcrel.analytic import (
    DEFAULT_TERM_BUDGET,
    ReliabilityValue,
    TermBudgetExceeded,
    reliability_general,
)
from sfcrel.model import (
    CommonRoot,
    Hierarchy,
    PlacementPreset,
    ReliabilityClassSpec,
    Scenario,
    ServiceDemand,
    expand_preset,
    scenario_to_dict,
    validate_scenario,
)
from sfcrel.oracle import (
    DEFAULT_NODE_CAP,
    MonteCarloEstimate,
    exhaustive_reliability,
    instantiate_tree,
    monte_carlo_estimate,
)

# per-level reliabilities, DC first
CASES: dict[int, tuple[float, ...]] = {
    1: (0.99999, 0.9999, 0.999, 0.99),
    2: (0.99999, 0.99999, 0.99999, 0.99999),
}

ALL_PRESETS = tuple(PlacementPreset(nr, d) for nr in (4, 3, 2, 1) for d in (1, 2, 3, 4))
TABLE4_BACKUP = tuple(PlacementPreset(nr, d) for nr in (4, 3) for d in (1, 2, 3, 4))
EXACT_TOL = 1e-10


@dataclass(frozen=True)
class SweepSpec:
    table: int
    case: int = 1
    psi_list: tuple[int, ...] = (4, 8)
    r_list: tuple[int, ...] = (0, 1, 100)
    k_list: tuple[int, ...] = (1, 4, 8)
    term_budget: int = DEFAULT_TERM_BUDGET

    def __post_init__(self):
        if self.table not in (2, 3, 4):
            raise ValueError(f"unknown table {self.table}")
        if self.case not in CASES:
            raise ValueError(f"unknown reliability case {self.case}")


def single_class_scenario(
    preset: PlacementPreset, k: int, r: int, psi: int, case: int = 1
) -> Scenario:
    cls = expand_preset(preset, k + r, CASES[case])
    return Scenario(ServiceDemand(k, r, psi), (cls,))


def two_class_scenario(
    active: PlacementPreset,
    backup: PlacementPreset,
    k: int = 4,
    r: int = 3,
    psi: int = 4,
    case: int = 1,
) -> Scenario:
    """Active and backup sub-SFCs as separate classes sharing no hardware."""
    probs = CASES[case]
    return Scenario(
        ServiceDemand(k, r, psi),
        (expand_preset(active, k, probs), expand_preset(backup, r, probs)),
    )


def run_table2(
    case: int,
    psi_list: Sequence[int] = (4, 8),
    r_list: Sequence[int] = (0, 1, 100),
    term_budget: int = DEFAULT_TERM_BUDGET,
) -> list[dict[str, Any]]:
    """One row per placement, SFC length and backup count with k = 1."""
    rows = []
    for preset in ALL_PRESETS:
        for psi in psi_list:
            for r in r_list:
                row = {
                    "case": case,
                    "nr": preset.nr,
                    "delta": preset.delta,
                    "placement": preset.label,
                    "psi": psi,
                    "r": r,
                    "value": None,
                    "status": "ok",
                }
                try:
                    row["value"] = reliability_general(
                        single_class_scenario(preset, 1, r, psi, case), term_budget
                    ).value
                except TermBudgetExceeded:
                    row["status"] = "skipped: budget"
                rows.append(row)
    return rows


def table3_r_values(k: int) -> range:
    # backup ratios r/k from 0 to 1.375
    return range(0, math.floor(1.375 * k) + 1)


def run_table3(
    case: int = 1,
    k_list: Sequence[int] = (1, 4, 8),
    psi_list: Sequence[int] = (4, 8),
    term_budget: int = DEFAULT_TERM_BUDGET,
) -> list[dict[str, Any]]:
    preset = PlacementPreset(4, 1)
    rows = []
    for psi in psi_list:
        for k in k_list:
            for r in table3_r_values(k):
                value = reliability_general(
                    single_class_scenario(preset, k, r, psi, case), term_budget
                ).value
                rows.append({"r_over_k": r / k, "k": k, "r": r, "psi": psi, "value": value})
    return rows


def run_table4(
    case: int = 1, term_budget: int = DEFAULT_TERM_BUDGET
) -> list[dict[str, Any]]:
    """Rows are active placements, columns backup placements (k=4, r=3, psi=4)."""
    rows = []
    for active in ALL_PRESETS:
        row: dict[str, Any] = {"active_nr": active.nr, "active_delta": active.delta}
        for backup in TABLE4_BACKUP:
            s = two_class_scenario(active, backup, case=case)
            row[table4_column(backup)] = reliability_general(s, term_budget).value
        rows.append(row)
    return rows


def table4_column(backup: PlacementPreset) -> str:
    return f"backup_{backup.nr}_{backup.delta}"


def format_value(value: float | None) -> str:
    return "" if value is None else f"{value:.12g}"


def rows_to_csv(rows: Iterable[dict[str, Any]]) -> str:
    rows = list(rows)
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0])
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [
                format_value(row[h]) if isinstance(row[h], float) or row[h] is None else row[h]
                for h in header
            ]
        )
    return buf.getvalue()


def run_sweep(spec: SweepSpec) -> list[dict[str, Any]]:
    if spec.table == 2:
        return run_table2(spec.case, spec.psi_list, spec.r_list, spec.term_budget)
    if spec.table == 3:
        return run_table3(spec.case, spec.k_list, spec.psi_list, spec.term_budget)
    return run_table4(spec.case, spec.term_budget)


# -- verification ----------------------------------------------------------


@dataclass
class ReliabilityReport:
    scenario: Scenario
    analytic: ReliabilityValue | None = None
    exhaustive: float | None = None
    monte_carlo: MonteCarloEstimate | None = None
    seed: int | None = None
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"scenario": scenario_to_dict(self.scenario)}
        if self.analytic is not None:
            out["analytic"] = {
                "value": self.analytic.value,
                "term_count": self.analytic.term_count,
            }
        if self.exhaustive is not None:
            out["exhaustive"] = self.exhaustive
        if self.monte_carlo is not None:
            mc = self.monte_carlo
            out["monte_carlo"] = {
                "mean": mc.mean,
                "ci95_half_width": mc.half_width,
                "successes": mc.successes,
                "trials": mc.trials,
                "seed": self.seed,
            }
        if self.checks:
            out["checks"] = dict(self.checks)
            out["passed"] = self.passed
        return out


def verify(
    scenario: Scenario,
    trials: int = 10**6,
    seed: int = 0,
    node_cap: int = DEFAULT_NODE_CAP,
    workers: int = 1,
    term_budget: int = DEFAULT_TERM_BUDGET,
    engine: Callable[..., ReliabilityValue] = reliability_general,
) -> ReliabilityReport:
    """Run the analytic engine and both oracles on one scenario.

    Passes when the analytic value equals the exhaustive sum within 1e-10
    (skipped above ``node_cap`` nodes) and lies inside the Monte-Carlo 95%
    interval.
    """
    analytic = engine(scenario, term_budget)
    tree = instantiate_tree(scenario)
    report = ReliabilityReport(scenario, analytic, seed=seed)
    if len(tree) <= node_cap:
        report.exhaustive = exhaustive_reliability(tree, scenario.demand, node_cap)
        report.checks["exhaustive"] = abs(analytic.value - report.exhaustive) <= EXACT_TOL
    report.monte_carlo = monte_carlo_estimate(tree, scenario.demand, trials, seed, workers)
    report.checks["monte_carlo"] = report.monte_carlo.covers(analytic.value)
    return report


def shared_root_scenario(probs: Sequence[float] = CASES[1], psi: int = 3) -> Scenario:
    """Three active sub-SFCs and one backup, each its own class.

    Classes 1-2 share a rack and classes 1-3 a data center; class 4 spreads
    every VNF over its own data center.
    """
    classes = tuple(ReliabilityClassSpec(1, (1, 1, 1, 1), d, tuple(probs)) for d in (1, 2, 3, 4))
    roots = (CommonRoot(1, {1, 2, 3}), CommonRoot(2, {1, 2}))
    return Scenario(ServiceDemand(3, 1, psi), classes, Hierarchy(), roots)


def _split(n: int, levels: Sequence[int], rng: random.Random) -> dict[int, int]:
    counts = {c: 1 for c in levels}
    m, f = n, 2
    while m > 1:
        while m % f:
            f += 1
        counts[rng.choice(levels)] *= f
        m //= f
    return counts


def random_scenario(
    rng: random.Random,
    max_nodes: int = 20,
    max_classes: int = 3,
    max_psi: int = 3,
    max_sub: int = 4,
    depth: int = 4,
    root_prob: float = 0.6,
    p_range: tuple[float, float] = (0.55, 0.99),
) -> Scenario:
    """Draw a valid scenario whose component tree has at most ``max_nodes`` nodes."""
    hierarchy = Hierarchy.of_depth(depth)
    while True:
        n_classes = rng.randint(1, max_classes)
        psi = rng.randint(1, max_psi)
        deltas = [rng.randint(1, depth) for _ in range(n_classes)]
        roots: list[CommonRoot] = []
        eligible = [x for x in range(1, n_classes + 1) if depth - deltas[x - 1] >= 1]
        if len(eligible) >= 2 and rng.random() < root_prob:
            group = rng.sample(eligible, rng.randint(2, len(eligible)))
            limit = min(depth - deltas[x - 1] for x in group)
            bottom = rng.randint(1, limit)
            roots += [CommonRoot(c, group) for c in range(1, bottom + 1)]
            if len(group) > 2 and rng.random() < 0.5:
                sub = rng.sample(group, rng.randint(2, len(group) - 1))
                limit = min(depth - deltas[x - 1] for x in sub)
                if limit > bottom:
                    roots += [
                        CommonRoot(c, sub) for c in range(bottom + 1, rng.randint(bottom + 1, limit) + 1)
                    ]
        root_p = {root.level: rng.uniform(*p_range) for root in roots}
        classes = []
        for xi in range(1, n_classes + 1):
            top = max((root.level for root in roots if xi in root.classes), default=0)
            n_sub = rng.randint(1, max_sub)
            counts = _split(n_sub, range(top + 1, depth + 1), rng)
            probs = [rng.uniform(*p_range) for _ in range(depth)]
            for root in roots:
                if xi in root.classes:
                    probs[root.level - 1] = root_p[root.level]
            classes.append(
                ReliabilityClassSpec(
                    n_sub,
                    tuple(counts.get(c, 1) for c in range(1, depth + 1)),
                    deltas[xi - 1],
                    tuple(probs),
                )
            )
        n = sum(c.n_sub for c in classes)
        k = rng.randint(1, n)
        scenario = Scenario(ServiceDemand(k, n - k, psi), tuple(classes), hierarchy, tuple(roots))
        if validate_scenario(scenario):
            continue
        if len(instantiate_tree(scenario)) <= max_nodes:
            return scenario
