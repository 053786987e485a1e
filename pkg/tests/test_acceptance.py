"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import dataclasses
import math
import random
import time

import numpy as np

from golden import TABLE2, TABLE3, TABLE4
from sfcrel.analytic import reliability_general, reliability_placement_independent
from sfcrel.cli import main
from sfcrel.experiments import (
    ALL_PRESETS,
    CASES,
    random_scenario,
    run_table2,
    run_table3,
    run_table4,
    shared_root_scenario,
    single_class_scenario,
    table4_column,
    two_class_scenario,
)
from sfcrel.model import (
    CommonRoot,
    PlacementPreset,
    ReliabilityClassSpec,
    Scenario,
    ServiceDemand,
    expand_preset,
)
from sfcrel.oracle import exhaustive_reliability, instantiate_tree, monte_carlo_estimate


def test_criterion_1_table2(criterion):
    start = time.perf_counter()
    rows = [row for case in (1, 2) for row in run_table2(case, (4, 8), (0, 1))]
    elapsed = time.perf_counter() - start
    worst = max(
        abs(row["value"] - TABLE2[(row["case"], row["nr"], row["delta"], row["psi"], row["r"])])
        for row in rows
    )
    criterion(
        "1 table II (r in {0,1})",
        len(rows) == 128 and worst <= 1e-9 and elapsed < 5.0,
        f"{len(rows)} cells, max |err| {worst:.2e} (tol 1e-9), {elapsed:.2f} s (limit 5 s)",
    )


def test_criterion_1_optional_many_backups(criterion):
    rows = [row for case in (1, 2) for row in run_table2(case, (4, 8), (100,))]
    worst = 0.0
    for row in rows:
        ref = TABLE2[(row["case"], row["nr"], row["delta"], row["psi"], row["r"])]
        # cells printed as "-> 1" are checked against 1
        worst = max(worst, abs(row["value"] - (1.0 if ref is None else ref)))
    budget_ok = all(row["status"] == "ok" for row in rows)
    criterion(
        "1 table II optional (r = 100)",
        budget_ok and worst <= 1e-8,
        f"{len(rows)} cells within budget={budget_ok}, max |err| {worst:.2e} (tol 1e-8)",
    )


def test_criterion_2_table3(criterion):
    start = time.perf_counter()
    rows = run_table3()
    elapsed = time.perf_counter() - start
    worst = max(abs(row["value"] - TABLE3[(row["k"], row["r"], row["psi"])]) for row in rows)
    covered = {(row["k"], row["r"], row["psi"]) for row in rows} >= set(TABLE3)
    criterion(
        "2 table III",
        covered and worst <= 1e-12 and elapsed < 30.0,
        f"{len(TABLE3)} cells, max |err| {worst:.2e} (tol 1e-12), {elapsed:.2f} s (limit 30 s)",
    )


def test_criterion_3_table4(criterion):
    rows = run_table4()
    worst = 0.0
    for row in rows:
        active = (row["active_nr"], row["active_delta"])
        for (a, b), ref in TABLE4.items():
            if a == active:
                worst = max(worst, abs(row[table4_column(PlacementPreset(*b))] - ref))
    split = reliability_general(two_class_scenario(PlacementPreset(4, 1), PlacementPreset(4, 1)))
    joint = reliability_general(single_class_scenario(PlacementPreset(4, 1), 4, 3, 4))
    cross = abs(split.value - joint.value)
    criterion(
        "3 table IV",
        worst <= 1e-12 and cross <= 1e-15,
        f"{len(TABLE4)} cells, max |err| {worst:.2e} (tol 1e-12); "
        f"(4,1)/(4,1) vs table III cell differ by {cross:.1e}",
    )


def test_criterion_4_oracle_equivalence(criterion):
    rng = random.Random(2024)
    start = time.perf_counter()
    worst, with_roots, count = 0.0, 0, 250
    for _ in range(count):
        s = random_scenario(rng, max_nodes=20, max_classes=3, max_psi=3)
        with_roots += bool(s.common_roots)
        exact = exhaustive_reliability(instantiate_tree(s), s.demand)
        worst = max(worst, abs(reliability_general(s).value - exact))
    elapsed = time.perf_counter() - start
    criterion(
        "4 oracle equivalence",
        worst <= 1e-10 and elapsed < 120.0,
        f"{count} scenarios ({with_roots} with common roots), max |err| {worst:.2e} "
        f"(tol 1e-10), {elapsed:.1f} s (limit 120 s)",
    )


def _nested_roots():
    p = (0.9, 0.8, 0.85, 0.7)
    classes = (
        ReliabilityClassSpec(2, (1, 1, 2, 1), 1, p),
        ReliabilityClassSpec(1, (1, 1, 1, 1), 2, p),
        ReliabilityClassSpec(1, (1, 1, 1, 1), 1, (0.9, 0.95, 0.9, 0.8)),
    )
    roots = (CommonRoot(1, {1, 2, 3}), CommonRoot(2, {1, 2}))
    return Scenario(ServiceDemand(2, 2, 2), classes, common_roots=roots)


def _mc_scenarios():
    p = PlacementPreset
    return {
        "shared-root layout": shared_root_scenario(psi=3),
        "shared-root layout, weak parts": shared_root_scenario((0.9, 0.8, 0.85, 0.7), psi=3),
        "table II (4,1) r=1 psi=4": single_class_scenario(p(4, 1), 1, 1, 4),
        "table II (1,1) r=0 psi=4": single_class_scenario(p(1, 1), 1, 0, 4),
        "table II (2,3) r=1 psi=8": single_class_scenario(p(2, 3), 1, 1, 8),
        "table III k=8 r=1 psi=4": single_class_scenario(p(4, 1), 8, 1, 4),
        "table III k=4 r=0 psi=8": single_class_scenario(p(4, 1), 4, 0, 8),
        "table IV (1,4)/(3,4)": two_class_scenario(p(1, 4), p(3, 4)),
        "random with roots": random_scenario(random.Random(7), max_nodes=40, root_prob=1.0),
        "nested roots": _nested_roots(),
    }


def test_criterion_5_monte_carlo(criterion):
    misses = []
    for i, (name, s) in enumerate(_mc_scenarios().items()):
        value = reliability_general(s).value
        est = monte_carlo_estimate(instantiate_tree(s), s.demand, 10**6, seed=1000 + i, workers=4)
        if not est.covers(value):
            misses.append(f"{name} ({value:.8f} vs {est.mean:.8f}+/-{est.half_width:.1e})")
    criterion(
        "5 monte carlo agreement",
        len(misses) <= 1,
        f"10 scenarios at 1e6 trials, {len(misses)} CI misses (max 1)"
        + (f": {'; '.join(misses)}" if misses else ""),
    )


def _properties() -> dict[str, bool]:
    rng = random.Random(99)
    checks: dict[str, bool] = {}

    scenarios = [random_scenario(rng, max_nodes=40) for _ in range(60)]
    checks["range"] = all(
        -1e-12 <= reliability_general(s).value <= 1 + 1e-12 for s in scenarios
    )

    ok = True
    for s in scenarios[:30]:
        classes = tuple(
            dataclasses.replace(c, reliabilities=(1.0, 1.0, 1.0, c.reliabilities[-1]))
            for c in s.classes
        )
        s = dataclasses.replace(s, classes=classes)
        vm = [(c.n_sub, c.reliabilities[-1]) for c in classes]
        ok &= math.isclose(
            reliability_general(s).value,
            reliability_placement_independent(s.demand, vm).value,
            abs_tol=1e-12,
        )
    checks["vm-only reduction"] = ok

    ok = True
    for s in scenarios[:30]:
        s = dataclasses.replace(s, demand=ServiceDemand(s.demand.n, 0, s.demand.psi))
        everything = math.prod(n.p for n in instantiate_tree(s).nodes)
        ok &= math.isclose(reliability_general(s).value, everything, rel_tol=1e-12)
    checks["r=0 closed form"] = ok

    ok = True
    for case in CASES:
        for nr in (1, 2, 3, 4):
            for psi in (1, 2, 4, 8):
                vals = [
                    reliability_general(
                        single_class_scenario(PlacementPreset(nr, d), 1, 0, psi, case)
                    ).value
                    for d in (1, 2, 3, 4)
                ]
                ok &= all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    checks["delta monotone at r=0"] = ok

    ok = True
    for preset in ALL_PRESETS:
        for k in (1, 2, 3):
            for psi in (1, 4):
                for n in range(k, 6):
                    lo = Scenario(
                        ServiceDemand(k, n - k, psi), (expand_preset(preset, n, CASES[1]),)
                    )
                    hi = Scenario(
                        ServiceDemand(k, n + 1 - k, psi),
                        (expand_preset(preset, n + 1, CASES[1]),),
                    )
                    ok &= reliability_general(hi).value >= reliability_general(lo).value - 1e-15
    checks["backup monotone"] = ok

    prop_ok = coupling_ok = True
    draws = np.random.default_rng(5)
    for s in scenarios[:20]:
        tree = instantiate_tree(s)
        alive = draws.random((256, len(tree))) < 0.7
        eff = tree.effective(alive)
        parent = tree.arrays[0]
        for i, par in enumerate(parent):
            if par >= 0:
                prop_ok &= not (eff[:, i] & ~eff[:, par]).any()
        repaired = alive.copy()
        repaired[np.arange(256), draws.integers(0, len(tree), 256)] = True
        before = tree.successes(alive, s.demand.k)
        coupling_ok &= not (before & ~tree.successes(repaired, s.demand.k)).any()
    checks["failure propagation"] = prop_ok
    checks["monotone coupling"] = coupling_ok

    s = shared_root_scenario((0.9, 0.8, 0.85, 0.7))
    tree = instantiate_tree(s)
    runs = {monte_carlo_estimate(tree, s.demand, 250_000, 17, w) for w in (1, 2, 5)}
    checks["rng determinism across workers"] = len(runs) == 1
    return checks


def test_criterion_6_properties(criterion):
    checks = _properties()
    failed = [name for name, ok in checks.items() if not ok]
    criterion(
        "6 property suites",
        not failed,
        f"{len(checks) - len(failed)}/{len(checks)} hold"
        + (f", failing: {', '.join(failed)}" if failed else f" ({', '.join(checks)})"),
    )


def test_criterion_7_reproducible_sweep(criterion, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    codes = (
        main(["sweep", "--table", "2", "--out", str(a)]),
        main(["sweep", "--table", "2", "--out", str(b)]),
    )
    same = a.read_bytes() == b.read_bytes()
    criterion(
        "7 reproducible sweep",
        codes == (0, 0) and same,
        f"exit codes {codes}, {len(a.read_bytes())} bytes, byte-identical={same}",
    )
