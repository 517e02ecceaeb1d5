"""Shared harness comparing the twelve reference queries against their
independent oracles on a generated ICU dataset."""

from __future__ import annotations

import category_oracles as co
from conftest import approx_cells
from tempoql.corpus import load_corpus
from tempoql.dataset.ingest import Dataset
from tempoql.dataset.spec import parse_spec
from tempoql.engine import evaluate
from tempoql.synthetic import generate_icu_frames, icu_spec_dict


def _cellify(v):
    if v.is_missing():
        return None
    return (v.kind, float(v.payload) if v.kind == "number" else v.payload)


def _oracle_cell(x):
    if x is None:
        return None
    if isinstance(x, bool):
        return ("boolean", x)
    if isinstance(x, float):
        return ("number", x)
    if isinstance(x, int):
        return ("number", float(x))
    return ("text", x)


def _compare_rows(name, engine_rows, oracle_rows):
    """engine_rows / oracle_rows: [(key..., cell)] aligned lists."""
    assert len(engine_rows) == len(oracle_rows), (
        f"{name}: row count {len(engine_rows)} != oracle {len(oracle_rows)}")
    mismatches = []
    for e, o in zip(engine_rows, oracle_rows):
        if e[:-1] != o[:-1] or not approx_cells(e[-1], _oracle_cell(o[-1])):
            mismatches.append((e, o))
            if len(mismatches) >= 5:
                break
    assert not mismatches, f"{name}: first mismatches {mismatches}"


def run_category_suite(n_traj: int, seed: int = 7) -> list[str]:
    """Run all twelve categories; returns the category names checked."""
    frames = generate_icu_frames(n_traj=n_traj, seed=seed)
    dataset = Dataset.from_frames(parse_spec(icu_spec_dict(), "."), frames)
    raw = co.load_raw(frames)
    queries = {e.id: e.query for e in load_corpus()[0] if e.group == "benchmark"}
    checked = []

    def attr_rows(series):
        return [(tid, _cellify(v)) for tid, v in series.rows()]

    def ts_rows(series):
        return [(tid, t, _cellify(v)) for tid, t, v in series.rows()]

    def ev_rows(series):
        return [(tid, t, _cellify(v)) for tid, t, _typ, v in series.rows()]

    # 1. attributes
    r = evaluate(queries["bench_attributes"], dataset)
    _compare_rows("attributes", attr_rows(r.result),
                  sorted(co.oracle_attributes(raw).items()))
    checked.append("Attributes")

    # 2. events
    r = evaluate(queries["bench_events"], dataset)
    _compare_rows("events", ev_rows(r.result),
                  co.oracle_events(raw))
    checked.append("Events")

    # 3. string operations
    r = evaluate(queries["bench_string_operations"], dataset)
    _compare_rows("string_operations", ev_rows(r.result), co.oracle_string_ops(raw))
    checked.append("String Operations")

    # 4. discretizing
    r = evaluate(queries["bench_discretizing"], dataset)
    _compare_rows("discretizing", ev_rows(r.result), co.oracle_discretize(raw))
    checked.append("Discretizing")

    # 5. patient-level aggregation
    r = evaluate(queries["bench_patient_level_aggregation"], dataset)
    expected = sorted(co.oracle_patient_min_bp(raw).items())
    _compare_rows("patient_level", attr_rows(r.result), expected)
    checked.append("Patient-Level Aggregation")

    # 6. daily aggregation
    r = evaluate(queries["bench_daily_aggregation"], dataset)
    _compare_rows("daily", ts_rows(r.result), co.oracle_daily_lactate(raw))
    checked.append("Daily Aggregation")

    # 7. overlapping intervals
    r = evaluate(queries["bench_overlapping_intervals"], dataset)
    _compare_rows("overlapping", ts_rows(r.result), co.oracle_overlapping_bp(raw))
    checked.append("Overlapping Intervals")

    # 8. existence at event times
    r = evaluate(queries["bench_existence_at_event_times"], dataset)
    _compare_rows("existence", ts_rows(r.result), co.oracle_existence_iv(raw))
    checked.append("Existence at Event Times")

    # 9. counts at event times
    r = evaluate(queries["bench_counts_at_event_times"], dataset)
    _compare_rows("counts", ts_rows(r.result), co.oracle_counts_cd(raw))
    checked.append("Counts at Event Times")

    # 10. rolling difference
    r = evaluate(queries["bench_rolling_difference"], dataset)
    _compare_rows("rolling_difference", ev_rows(r.result), co.oracle_rolling_diff(raw))
    checked.append("Rolling Difference")

    # 11. imputing
    r = evaluate(queries["bench_imputing"], dataset)
    _compare_rows("imputing", ts_rows(r.result), co.oracle_impute_temp(raw))
    checked.append("Imputing")

    # 12. carrying forward
    r = evaluate(queries["bench_carrying_forward"], dataset)
    _compare_rows("carrying", ts_rows(r.result), co.oracle_carry_o2(raw))
    checked.append("Carrying Forward")

    return checked
