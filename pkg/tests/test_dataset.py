import json
import re

import numpy as np
import pandas as pd
import pytest

from tempoql.dataset import ingest, load_spec, resolve_elements, search_concepts
from tempoql.dataset.ingest import Dataset, infer_vector
from tempoql.dataset.spec import parse_spec
from tempoql.errors import EvalError, IngestError, SpecError, TempoQLError
from tempoql.lang.nodes import ElementCriterion, Pattern
from tempoql.synthetic import (
    generate_icu_frames,
    icu_spec_dict,
    write_icu_dataset,
)
from tempoql.values import parse_timestamp


# --- specification loading -----------------------------------------------------

def test_bundled_spec_counts(tmp_path):
    spec_path = write_icu_dataset(tmp_path, n_traj=5, seed=1)
    spec = load_spec(spec_path)
    assert len(spec.tables) == 6
    assert len(spec.vocabularies) == 2
    assert len(spec.joins) == 2


def test_event_table_requires_time_field():
    raw = icu_spec_dict()
    bad = [t for t in raw["tables"] if t["source"] == "icu.chartevents"][0]
    del bad["time_field"]
    with pytest.raises(SpecError) as exc:
        parse_spec(raw, ".")
    assert "time_field" in exc.value.pointer


def test_vocabulary_scope_exclusivity():
    raw = icu_spec_dict()
    raw["vocabularies"][0]["scope_field"] = "kind"
    raw["vocabularies"][0]["scopes"] = ["Lab"]
    with pytest.raises(SpecError):
        parse_spec(raw, ".")


def test_join_cycle_detected():
    raw = icu_spec_dict()
    raw["joins"] = {
        "hosp.patients": {"dest_table": "ghost.a", "join_key": "x"},
        "ghost.a": {"dest_table": "hosp.patients", "join_key": "x"},
    }
    with pytest.raises(SpecError) as exc:
        parse_spec(raw, ".")
    assert "cycle" in str(exc.value)


def test_unknown_keys_warn_not_fail():
    raw = icu_spec_dict()
    raw["future_extension"] = {"x": 1}
    raw["tables"][0]["novel_key"] = True
    spec = parse_spec(raw, ".")
    assert any("future_extension" in w for w in spec.warnings)
    assert any("novel_key" in w for w in spec.warnings)


def test_unknown_value_transform_fails_at_load():
    raw = icu_spec_dict()
    raw["tables"][1]["attributes"]["Gender"]["value_transform"] = "exec_python"
    with pytest.raises(SpecError):
        parse_spec(raw, ".")


# --- ingestion -------------------------------------------------------------------

def test_csv_roundtrip_matches_in_memory(tmp_path, icu_small):
    spec_path = write_icu_dataset(tmp_path, n_traj=50, seed=7)
    from_csv = ingest(load_spec(spec_path))
    assert list(from_csv.index.ids) == list(icu_small.index.ids)
    for source in from_csv.tables:
        assert len(from_csv.tables[source]) == len(icu_small.tables[source])
    _, a = resolve_elements(from_csv, [ElementCriterion("name", "equals", "Heart Rate")])
    _, b = resolve_elements(icu_small, [ElementCriterion("name", "equals", "Heart Rate")])
    assert a.rows() == b.rows()


def test_join_materializes_trajectory_ids(icu_small):
    labs = icu_small.tables["hosp.labevents"]
    assert "stay_id" in labs.frame.columns
    assert len(labs) > 0


def test_join_misses_are_dropped_and_counted():
    raw = icu_spec_dict()
    frames = generate_icu_frames(n_traj=5, seed=3)
    labs = frames["hosp.labevents"]
    labs.loc[labs.index[:4], "hadm_id"] = "H999999"  # no such admission
    ds = Dataset.from_frames(parse_spec(raw, "."), frames)
    entry = [e for e in ds.report if e.table == "hosp.labevents"][0]
    assert entry.reasons.get("join_miss", 0) == 4


def test_negative_intervals_dropped_and_counted():
    raw = icu_spec_dict()
    frames = generate_icu_frames(n_traj=5, seed=3)
    proc = frames["icu.procedureevents"]
    if len(proc) == 0:
        pytest.skip("fixture produced no procedures at this size")
    proc.loc[proc.index[0], "endtime"] = "2000-01-01T00:00:00"
    ds = Dataset.from_frames(parse_spec(raw, "."), frames)
    entry = [e for e in ds.report if e.table == "icu.procedureevents"][0]
    assert entry.reasons.get("negative_interval", 0) == 1
    assert entry.rows_dropped >= 1


def test_bad_timestamps_dropped_and_counted():
    raw = icu_spec_dict()
    frames = generate_icu_frames(n_traj=5, seed=3)
    chart = frames["icu.chartevents"]
    chart.loc[chart.index[0], "charttime"] = "not-a-time"
    ds = Dataset.from_frames(parse_spec(raw, "."), frames)
    entry = [e for e in ds.report if e.table == "icu.chartevents"][0]
    assert entry.reasons.get("bad_time", 0) == 1


def test_header_only_file_is_fine(tmp_path):
    spec_path = write_icu_dataset(tmp_path, n_traj=3, seed=1)
    (tmp_path / "hosp" / "diagnoses.csv").write_text(
        "stay_id,diag_time,diag_label,icd_code\n")
    ds = ingest(load_spec(spec_path))
    assert len(ds.tables["hosp.diagnoses"]) == 0


def test_missing_file_is_an_ingest_error(tmp_path):
    spec_path = write_icu_dataset(tmp_path, n_traj=3, seed=1)
    (tmp_path / "icu" / "chartevents.csv").unlink()
    with pytest.raises(IngestError):
        ingest(load_spec(spec_path))


def test_subset_type_inference():
    vec = infer_vector(np.array(["1.5", "2", ""], dtype=object))
    assert vec.kind == "number" and bool(vec.missing[2])
    vec = infer_vector(np.array(["78552", "I10"], dtype=object))
    assert vec.kind == "text"
    vec = infer_vector(np.array(["true", "FALSE", ""], dtype=object))
    assert vec.kind == "boolean"
    vec = infer_vector(np.array(["2020-01-01", "2020-01-02T05:00:00"], dtype=object))
    assert vec.kind == "timestamp"


# --- catalog ---------------------------------------------------------------------

def test_catalog_chartevents_concept_count(icu_small):
    entries = [e for e in icu_small.catalog() if e.scope == "chartevents"]
    assert len(entries) == 40


def test_catalog_counts_match_raw_groupby(icu_small):
    frames = generate_icu_frames(n_traj=50, seed=7)
    raw_counts = frames["icu.chartevents"].groupby("itemid").size().to_dict()
    items = dict(zip(frames["icu.d_items"]["itemid"], frames["icu.d_items"]["label"]))
    for e in icu_small.catalog():
        if e.scope != "chartevents":
            continue
        expected = sum(c for iid, c in raw_counts.items() if items.get(iid) == e.name)
        assert e.occurrence_count == expected, e.name


def test_catalog_attribute_counts(icu_small):
    gender = [e for e in icu_small.catalog() if e.name == "Gender"][0]
    assert gender.element_kind == "attribute"
    assert gender.occurrence_count == 50


def test_catalog_scope_count_sums(icu_small):
    total = sum(e.occurrence_count for e in icu_small.catalog()
                if e.scope == "chartevents")
    assert total == len(icu_small.tables["icu.chartevents"])


def test_unreferenced_concept_has_zero_count():
    raw = icu_spec_dict()
    frames = generate_icu_frames(n_traj=5, seed=3)
    extra = pd.DataFrame([{"itemid": "1999", "label": "Never Charted",
                           "linksto": "chartevents"}])
    frames["icu.d_items"] = pd.concat([frames["icu.d_items"], extra],
                                      ignore_index=True)
    ds = Dataset.from_frames(parse_spec(raw, "."), frames)
    entry = [e for e in ds.catalog() if e.name == "Never Charted"][0]
    assert entry.occurrence_count == 0


def test_catalog_is_deterministic(icu_small):
    a = [vars(e) for e in icu_small.catalog()]
    from tempoql.synthetic import load_icu_dataset
    b = [vars(e) for e in load_icu_dataset(n_traj=50, seed=7).catalog()]
    assert a == b


def test_search_concepts(icu_small):
    r = search_concepts(icu_small.catalog(), "/resp\\w* rate/i")
    names = {e.name for e in r.entries}
    assert {"Respiratory Rate", "Resp Rate", "Resp Rate (Total)",
            "Respiratory Rate (spontaneous)"} <= names
    assert search_concepts(icu_small.catalog(), "zzz-no-such").entries == []
    with pytest.raises(TempoQLError):
        search_concepts(icu_small.catalog(), "/((broken/")
    ordered = search_concepts(icu_small.catalog(), "")
    counts = [e.occurrence_count for e in ordered.entries]
    assert counts == sorted(counts, reverse=True)
    assert len(ordered.entries) <= 100


# --- element resolution -----------------------------------------------------------

def crit(field, relation, operand):
    return ElementCriterion(field, relation, operand)


def test_resolution_equals_raw_scan(icu_small):
    """Retrieval equivalence against a row-by-row scan of the raw frames."""
    frames = generate_icu_frames(n_traj=50, seed=7)
    items = frames["icu.d_items"]
    rr_ids = set(items[items["label"].isin(["Respiratory Rate", "Resp Rate"])]["itemid"])
    chart = frames["icu.chartevents"]
    expected = []
    for pos in range(len(chart)):
        row = chart.iloc[pos]
        if row["itemid"] in rr_ids and row["charttime"]:
            expected.append((row["stay_id"], parse_timestamp(row["charttime"]),
                             float(row["value"]) if row["value"] else None))
    expected.sort(key=lambda r: (r[0], r[1]))

    _, series = resolve_elements(icu_small, [
        crit("name", "in", ["Respiratory Rate", "Resp Rate"]),
        crit("scope", "equals", "chartevents"),
    ])
    got = [(tid, t, (None if v.is_missing() else v.payload))
           for tid, t, _typ, v in series.rows()]
    assert sorted(got, key=lambda r: (r[0], r[1])) == expected
    assert len(got) == len(expected)


def test_value_column_override(icu_small):
    _, series = resolve_elements(icu_small, [
        crit("name", "equals", "Platelet Count"),
        crit("scope", "equals", "Lab"),
        crit("value", "equals", "valuenum"),
    ])
    assert series.values.kind in ("number",)


def test_attribute_resolution(icu_small):
    plan, series = resolve_elements(icu_small, [crit("name", "equals", "Gender")])
    assert len(series) == len(icu_small.index)
    assert "Gender" in plan.render()


def test_name_matching_is_case_insensitive(icu_small):
    _, a = resolve_elements(icu_small, [crit("name", "equals", "lactate"),
                                        crit("scope", "equals", "Lab")])
    _, b = resolve_elements(icu_small, [crit("name", "equals", "Lactate"),
                                        crit("scope", "equals", "Lab")])
    assert a.rows() == b.rows()


def test_unknown_scope_is_an_error(icu_small):
    with pytest.raises(EvalError) as exc:
        resolve_elements(icu_small, [crit("scope", "equals", "Observations")])
    assert "available scopes" in str(exc.value)


def test_unknown_value_column_is_an_error(icu_small):
    with pytest.raises(EvalError):
        resolve_elements(icu_small, [crit("name", "equals", "Heart Rate"),
                                     crit("scope", "equals", "chartevents"),
                                     crit("value", "equals", "no_such_column")])


def test_mixed_kind_match_needs_type(icu_small):
    # "Norepinephrine" exists as a chartevents concept; invent an interval
    # concept with the same name to force ambiguity
    frames = generate_icu_frames(n_traj=10, seed=3)
    extra = pd.DataFrame([{"itemid": "2999", "label": "Norepinephrine",
                           "linksto": "procedureevents"}])
    frames["icu.d_items"] = pd.concat([frames["icu.d_items"], extra], ignore_index=True)
    ds = Dataset.from_frames(parse_spec(icu_spec_dict(), "."), frames)
    with pytest.raises(EvalError) as exc:
        resolve_elements(ds, [crit("name", "equals", "Norepinephrine")])
    assert "mixed kinds" in str(exc.value)
    _, series = resolve_elements(ds, [crit("name", "equals", "Norepinephrine"),
                                      crit("type", "equals", "event")])
    assert series.__class__.__name__ == "EventSeries"


def test_scope_isolation(icu_small):
    """Adding an unrelated table never changes scope-constrained results."""
    frames = generate_icu_frames(n_traj=20, seed=5)
    base = Dataset.from_frames(parse_spec(icu_spec_dict(), "."), frames)
    raw = icu_spec_dict()
    raw["tables"].append({
        "source": "extra.notes", "type": "event", "id_field": "stay_id",
        "time_field": "t", "event_type_field": "kind", "scope": "Notes",
        "default_value_field": "txt",
    })
    frames2 = generate_icu_frames(n_traj=20, seed=5)
    frames2["extra.notes"] = pd.DataFrame({
        "stay_id": ["S000001"], "t": ["2019-05-01T00:00:00"],
        "kind": ["Heart Rate"], "txt": ["free text"],
    })
    bigger = Dataset.from_frames(parse_spec(raw, "."), frames2)
    q = [crit("name", "equals", "Heart Rate"), crit("scope", "equals", "chartevents")]
    _, a = resolve_elements(base, q)
    _, b = resolve_elements(bigger, q)
    assert a.rows() == b.rows()


def test_plan_rendering_is_deterministic(icu_small):
    q = [crit("name", "in", ["Respiratory Rate", "Resp Rate"]),
         crit("scope", "equals", "chartevents")]
    p1, _ = resolve_elements(icu_small, q)
    p2, _ = resolve_elements(icu_small, q)
    assert p1.render() == p2.render()
    assert "icu.chartevents" in p1.render()


def test_empty_match_with_pinned_scope_gives_empty_series(icu_small):
    _, series = resolve_elements(icu_small, [
        crit("name", "contains", Pattern("regex", "heart disease", "i")),
        crit("scope", "equals", "Diagnosis"),
    ])
    assert len(series) == 0
    assert series.__class__.__name__ == "EventSeries"


def test_no_match_without_scope_is_an_error(icu_small):
    with pytest.raises(EvalError) as exc:
        resolve_elements(icu_small, [crit("name", "equals", "Gander")])
    assert "no data elements match" in str(exc.value)
