import dataclasses

import pytest

from golden import TABLE2, TABLE3, TABLE4
from sfcrel.analytic import ReliabilityValue, reliability_general
from sfcrel.experiments import (
    ALL_PRESETS,
    TABLE4_BACKUP,
    SweepSpec,
    rows_to_csv,
    run_sweep,
    run_table2,
    run_table3,
    run_table4,
    shared_root_scenario,
    single_class_scenario,
    table3_r_values,
    table4_column,
    verify,
)
from sfcrel.model import PlacementPreset


def test_table2_rows_and_labels():
    rows = run_table2(1, psi_list=(4,), r_list=(0, 1))
    assert len(rows) == 16 * 2
    first = rows[0]
    assert (first["nr"], first["delta"], first["placement"]) == (4, 1, "s")
    for row in rows:
        ref = TABLE2[(1, row["nr"], row["delta"], row["psi"], row["r"])]
        assert row["status"] == "ok"
        assert row["value"] == pytest.approx(ref, abs=1e-9)


def test_table2_without_backups_ignores_heterogeneity():
    rows = run_table2(2, psi_list=(8,), r_list=(0,))
    by_delta = {}
    for row in rows:
        by_delta.setdefault(row["delta"], set()).add(row["value"])
    assert all(len(values) == 1 for values in by_delta.values())


def test_table2_budget_overrun_is_marked_not_fatal():
    rows = run_table2(1, psi_list=(4,), r_list=(100,), term_budget=10)
    assert any(row["status"] == "skipped: budget" and row["value"] is None for row in rows)


def test_table3_grid():
    assert list(table3_r_values(8)) == list(range(12))
    rows = run_table3(k_list=(8,), psi_list=(4,))
    cell = next(row for row in rows if row["r"] == 1)
    assert cell["value"] == pytest.approx(0.983696719311009, abs=1e-12)
    assert cell["r_over_k"] == 0.125
    for row in rows:
        assert row["value"] == pytest.approx(TABLE3[(8, row["r"], 4)], abs=1e-12)


def test_table4_layout():
    rows = run_table4()
    assert len(rows) == len(ALL_PRESETS)
    assert [c for c in rows[0] if c.startswith("backup_")] == [
        table4_column(b) for b in TABLE4_BACKUP
    ]
    row = next(r for r in rows if (r["active_nr"], r["active_delta"]) == (3, 2))
    ref = TABLE4[((3, 2), (4, 1))]
    assert row["backup_4_1"] == pytest.approx(ref, abs=1e-12)


def test_sweep_csv_is_stable():
    spec = SweepSpec(table=3, k_list=(1,), psi_list=(4,))
    text = rows_to_csv(run_sweep(spec))
    assert text == rows_to_csv(run_sweep(spec))
    assert text.splitlines()[0] == "r_over_k,k,r,psi,value"
    assert "\r" not in text


def test_sweep_spec_rejects_unknown_table():
    with pytest.raises(ValueError):
        SweepSpec(table=5)


def test_verify_reference_cell():
    s = single_class_scenario(PlacementPreset(4, 1), 1, 1, 2)
    report = verify(s, trials=200_000, seed=3)
    assert report.passed
    assert set(report.checks) == {"exhaustive", "monte_carlo"}
    assert report.exhaustive == pytest.approx(report.analytic.value, abs=1e-12)


def test_verify_skips_exhaustive_above_cap():
    report = verify(shared_root_scenario(psi=3), trials=100_000, seed=3)
    assert report.exhaustive is None
    assert set(report.checks) == {"monte_carlo"}


def test_verify_certain_components():
    s = single_class_scenario(PlacementPreset(4, 1), 1, 1, 2)
    sure = dataclasses.replace(
        s, classes=(dataclasses.replace(s.classes[0], reliabilities=(1.0,) * 4),)
    )
    report = verify(sure, trials=1000)
    assert report.passed and report.analytic.value == 1.0


def test_verify_catches_a_broken_engine():
    def off_by_a_little(scenario, budget):
        good = reliability_general(scenario, budget)
        return ReliabilityValue(good.value - 1e-3, good.term_count, good.eval_time)

    report = verify(shared_root_scenario(psi=2), trials=200_000, seed=3, engine=off_by_a_little)
    assert not report.passed
    assert report.checks == {"exhaustive": False, "monte_carlo": False}


def test_report_json_has_no_timing():
    report = verify(single_class_scenario(PlacementPreset(4, 1), 1, 1, 2), trials=1000)
    data = report.to_dict()
    assert "eval_time" not in str(data)
    assert set(data) == {"scenario", "analytic", "exhaustive", "monte_carlo", "checks", "passed"}
