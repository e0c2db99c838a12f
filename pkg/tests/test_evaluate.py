import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homearbiter.config import RunConfig
from homearbiter.evaluate import (
    EvaluationConfig,
    adopted_items,
    average_satisfaction,
    harmonic_satisfaction,
    run_experiment,
    satisfaction_gain,
)
from homearbiter.preferences import PreferenceTable

from conftest import interval, make_event, make_request

WORKED_ENTRIES = {
    ("r1", "Ch1"): 19.44, ("r1", "Ch2"): 14.48, ("r1", "Ch3"): 15.20, ("r1", "Ch5"): 11.04,
    ("r2", "Ch1"): 20.00, ("r2", "Ch2"): 17.20, ("r2", "Ch3"): 14.52, ("r2", "Ch5"): 20.00,
    ("r3", "Ch1"): 16.08, ("r3", "Ch2"): 14.12, ("r3", "Ch3"): 14.40, ("r3", "Ch5"): 20.00,
}


def worked_table() -> PreferenceTable:
    return PreferenceTable(entries=dict(WORKED_ENTRIES), window=None, service_id="TV")


# ---------------------------------------------------------------------------
# satisfaction gain

def test_sg_single_member():
    table = PreferenceTable(entries={("r1", "Ch1"): 19.44}, window=None, service_id="TV")
    assert satisfaction_gain(table, ["r1"], ["Ch1"], {"Ch1"}) == pytest.approx(19.44)


def test_sg_nothing_adopted_is_zero():
    table = worked_table()
    assert satisfaction_gain(table, ["r1", "r2"], ["Ch1"], set()) == 0.0


def test_sg_mean_over_members():
    table = PreferenceTable(
        entries={("a", "x"): 10.0, ("b", "x"): 20.0}, window=None, service_id="TV"
    )
    assert satisfaction_gain(table, ["a", "b"], ["x"], {"x"}) == pytest.approx(15.0)


def test_sg_worked_top2_all_adopted():
    table = worked_table()
    got = satisfaction_gain(table, ["r1", "r2", "r3"], ["Ch2", "Ch3"], {"Ch1", "Ch2", "Ch3", "Ch5"})
    oracle = ((14.48 + 15.20) + (17.20 + 14.52) + (14.12 + 14.40)) / 3
    assert got == pytest.approx(oracle, abs=1e-12)
    assert got == pytest.approx(29.97, abs=0.005)


def test_sg_monotone_in_adopted_items():
    table = worked_table()
    base = satisfaction_gain(table, ["r1", "r2"], ["Ch1", "Ch2"], {"Ch1"})
    more = satisfaction_gain(table, ["r1", "r2"], ["Ch1", "Ch2"], {"Ch1", "Ch2"})
    assert more >= base


def test_sg_requires_recommendations():
    with pytest.raises(ValueError):
        satisfaction_gain(worked_table(), ["r1"], [], set())


# ---------------------------------------------------------------------------
# adopted items

def _usage_events(days_with_item, active_days, item="Ch1", other="Ch9"):
    events = []
    base = dt.date(2026, 2, 1)
    for day in range(active_days):
        channel = item if day < days_with_item else other
        events.append(
            make_event("r1", "20:00:00", "20:30:00", channel=channel, date=base + dt.timedelta(days=day))
        )
    return events


def test_adopted_items_strictly_above_threshold():
    window = interval("20:00:00", "20:30:00")
    adopted = adopted_items(_usage_events(7, 10), "r1", window, threshold=0.6)
    assert "Ch1" in adopted
    not_adopted = adopted_items(_usage_events(6, 10), "r1", window, threshold=0.6)
    assert "Ch1" not in not_adopted


def test_adopted_items_empty_history():
    assert adopted_items([], "r1", interval("20:00:00", "20:30:00")) == set()


def test_adopted_items_only_window_overlap_counts():
    window = interval("20:00:00", "20:30:00")
    busy_morning = [
        make_event("r1", "08:00:00", "09:00:00", channel="Ch1", date=dt.date(2026, 2, 1) + dt.timedelta(days=d))
        for d in range(10)
    ]
    assert adopted_items(busy_morning, "r1", window) == set()


# ---------------------------------------------------------------------------
# harmonic

def test_harmonic_equal_sums():
    table = PreferenceTable(entries={("a", "x"): 10.0, ("b", "x"): 10.0}, window=None, service_id="TV")
    assert harmonic_satisfaction(table, ["a", "b"], ["x"]) == pytest.approx(10.0)


def test_harmonic_derived_value():
    table = PreferenceTable(entries={("a", "x"): 4.0, ("b", "x"): 12.0}, window=None, service_id="TV")
    assert harmonic_satisfaction(table, ["a", "b"], ["x"]) == pytest.approx(6.0)


def test_harmonic_zero_sum_member():
    table = PreferenceTable(entries={("a", "x"): 4.0}, window=None, service_id="TV")
    assert harmonic_satisfaction(table, ["a", "b"], ["x"]) == 0.0


@settings(max_examples=100, deadline=None)
@given(sums=st.lists(st.floats(min_value=1e-3, max_value=1e6), min_size=1, max_size=6))
def test_harmonic_at_most_arithmetic(sums):
    entries = {(f"m{i}", "x"): value for i, value in enumerate(sums)}
    table = PreferenceTable(entries=entries, window=None, service_id="TV")
    members = sorted(r for r, _ in entries)
    harmonic = harmonic_satisfaction(table, members, ["x"])
    arithmetic = sum(sums) / len(sums)
    assert harmonic <= arithmetic + 1e-9
    if max(sums) - min(sums) > 1e-9 * max(sums):
        assert harmonic < arithmetic


# ---------------------------------------------------------------------------
# average satisfaction

def test_average_satisfaction_everyone_top_item():
    table = PreferenceTable(
        entries={("a", "x"): 5.0, ("a", "y"): 1.0, ("b", "x"): 9.0}, window=None, service_id="TV"
    )
    assert average_satisfaction(table, ["a", "b"], "x") == 1.0


def test_average_satisfaction_half():
    table = PreferenceTable(entries={("a", "x"): 10.0, ("a", "y"): 20.0}, window=None, service_id="TV")
    assert average_satisfaction(table, ["a"], "x") == pytest.approx(0.5)


def test_average_satisfaction_worked_value():
    got = average_satisfaction(worked_table(), ["r1", "r2", "r3"], "Ch2")
    assert got == pytest.approx(0.770, abs=5e-4)


def test_average_satisfaction_excludes_zero_rows():
    table = PreferenceTable(entries={("a", "x"): 10.0}, window=None, service_id="TV")
    assert average_satisfaction(table, ["a", "ghost"], "x") == 1.0
    assert average_satisfaction(table, ["ghost"], "x") == 0.0


def test_average_satisfaction_in_unit_interval():
    rng = np.random.RandomState(5)
    for _ in range(30):
        entries = {
            (f"m{i}", f"i{j}"): float(abs(rng.randn()) * 10)
            for i in range(3)
            for j in range(4)
        }
        table = PreferenceTable(entries=entries, window=None, service_id="TV")
        value = average_satisfaction(table, [f"m{i}" for i in range(3)], "i1")
        assert 0.0 <= value <= 1.0


# ---------------------------------------------------------------------------
# run_experiment

def _experiment_inputs():
    history = []
    base = dt.date(2026, 2, 1)
    rng = np.random.RandomState(11)
    for day in range(25):
        for resident, favorite in (("a", "Ch1"), ("b", "Ch2"), ("c", "Ch3")):
            channel = favorite if rng.random_sample() < 0.5 else f"Ch{1 + rng.randint(0, 3)}"
            history.append(
                make_event(resident, "20:00:00", "21:00:00", channel=channel, date=base + dt.timedelta(days=day))
            )
    requests = [
        make_request("a", "Ch1", request_id="qa"),
        make_request("b", "Ch2", request_id="qb"),
        make_request("c", "Ch3", request_id="qc"),
        make_request("a", "Ch1", start="21:30:00", end="22:00:00", request_id="qa2"),
        make_request("b", "Ch3", start="21:30:00", end="22:00:00", request_id="qb2"),
    ]
    return history, requests


def test_run_experiment_shape_and_determinism():
    history, requests = _experiment_inputs()
    cfg = EvaluationConfig(strategies=("avg", "svd"), group_sizes=(2, 3), recommendation_list_size=2)
    first = run_experiment(history, requests, cfg, RunConfig())
    second = run_experiment(history, requests, cfg, RunConfig())
    assert first == second
    assert len(first.rows) == 4
    by_cell = {(r.strategy, r.group_size): r for r in first.rows}
    assert by_cell[("avg", 3)].conflict_count == 1
    assert by_cell[("avg", 2)].conflict_count == 1
    assert by_cell[("svd", 3)].sg is not None


def test_run_experiment_no_conflicts_yields_null_rows():
    history, _ = _experiment_inputs()
    report = run_experiment(history, [], EvaluationConfig(strategies=("avg",), group_sizes=(2,)), RunConfig())
    assert len(report.rows) == 1
    row = report.rows[0]
    assert row.conflict_count == 0
    assert row.sg is None and row.harmonic is None and row.avg_satisfaction is None
    assert report.details == ()


def test_run_experiment_rejects_unknown_strategy():
    history, requests = _experiment_inputs()
    with pytest.raises(ValueError):
        run_experiment(history, requests, EvaluationConfig(strategies=("nope",)), RunConfig())


def test_report_serialization_round():
    history, requests = _experiment_inputs()
    report = run_experiment(history, requests, EvaluationConfig(strategies=("avg",), group_sizes=(2, 3)), RunConfig())
    csv_text = report.to_csv_text(["config: {}"])
    assert csv_text.startswith("# config: {}\nstrategy,group_size,conflicts,")
    assert csv_text.count("\navg,") == 2
    series = report.plot_series()
    assert set(series) == {"sg", "harmonic", "avg_satisfaction"}
    assert series["sg"].splitlines()[0] == "group_size\tavg"
    payload = report.to_json_obj()
    assert {row["strategy"] for row in payload["rows"]} == {"avg"}
