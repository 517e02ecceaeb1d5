"""Synthetic datasets: a miniature ICU database, a drug/outcome database,
and a tiny LOINC observation set.

These stand in for real clinical databases in tests, demos, and benchmarks.
Generation is deterministic for a given seed. ``write_*`` variants persist
the CSV layout next to a specification file; ``*_frames`` return in-memory
DataFrames for ``Dataset.from_frames``.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from .dataset import Dataset
from .dataset.spec import parse_spec

EPOCH_2019 = 1546300800000  # 2019-01-01T00:00:00Z
HOUR = 3_600_000
DAY = 24 * HOUR

# (label, kind, mean, sd, events per day)
_CHART_CONCEPTS = [
    ("Heart Rate", "num", 86, 14, 12),
    ("Respiratory Rate", "num", 18, 4, 10),
    ("Resp Rate", "num", 18, 4, 2),
    ("Resp Rate (Total)", "num", 19, 4, 2),
    ("Non Invasive Blood Pressure mean", "num", 82, 12, 8),
    ("Non Invasive Blood Pressure systolic", "num", 121, 16, 8),
    ("Non Invasive Blood Pressure diastolic", "num", 68, 11, 8),
    ("Temperature Fahrenheit", "num", 98.7, 1.1, 6),
    ("Temperature Celsius", "num", 37.0, 0.6, 4),
    ("O2 saturation pulseoxymetry", "num", 96.5, 2.2, 10),
    ("Lactic Acid", "num", 1.9, 0.9, 3),
    ("Norepinephrine", "num", 4.2, 1.4, 4),
    ("Glucose (finger stick)", "num", 132, 38, 5),
    ("Central Venous Pressure", "num", 9, 3, 4),
    ("Arterial Blood Pressure mean", "num", 84, 13, 6),
    ("Inspired O2 Fraction", "num", 46, 12, 4),
    ("PEEP set", "num", 6.2, 2.0, 3),
    ("Tidal Volume (observed)", "num", 440, 70, 3),
    ("Minute Volume", "num", 7.8, 1.8, 3),
    ("Mean Airway Pressure", "num", 11.5, 3.0, 3),
    ("Respiratory Rate (spontaneous)", "num", 14, 5, 3),
    ("Apnea Interval", "num", 22, 6, 1),
    ("Cardiac Output (thermodilution)", "num", 5.1, 1.1, 1),
    ("Daily Weight", "num", 81, 16, 1),
    ("Height (cm)", "num", 170, 10, 0.3),
    ("Braden Score", "num", 17, 3, 1),
    ("Richmond-RAS Scale", "num", -1.1, 1.4, 4),
    ("Sodium (serum)", "num", 139, 4, 2),
    ("Potassium (serum)", "num", 4.1, 0.5, 2),
    ("Creatinine (serum)", "num", 1.3, 0.7, 2),
    ("BUN", "num", 24, 11, 2),
    ("Anion Gap", "num", 13, 3, 2),
    ("Ionized Calcium", "num", 1.12, 0.1, 2),
    ("Heart Rhythm", "rhythm", 0, 0, 6),
    ("O2 Delivery Device(s)", "device", 0, 0, 2),
    ("GCS - Eye Opening", "gcs_eye", 0, 0, 4),
    ("GCS - Verbal Response", "gcs_verbal", 0, 0, 4),
    ("Activity / Mobility", "activity", 0, 0, 1),
    ("Skin Condition", "skin", 0, 0, 1),
    ("Admission", "admission", 0, 0, 0),
]

_TEXT_POOLS = {
    "rhythm": ["SR (Sinus Rhythm)", "AF (Atrial Fibrillation)",
               "ST (Sinus Tachycardia)", "VT (Ventricular Tachycardia)",
               "1st Deg AV Block"],
    "device": ["Nasal cannula", "None", "High flow nasal cannula",
               "Non-rebreather", "Trach mask", "Aerosol-cool"],
    "gcs_eye": ["Spontaneously", "To Speech", "To Pain", "None"],
    "gcs_verbal": ["Oriented", "Confused", "Inappropriate Words", "No Response"],
    "activity": ["Bedrest", "Chair", "Ambulate"],
    "skin": ["Intact", "Impaired"],
}

_PROC_CONCEPTS = ["Invasive Ventilation", "Cardioversion/Defibrillation",
                  "Dialysis - CRRT", "Arterial Line", "Foley Catheter"]

_LAB_CONCEPTS = [
    ("Platelet Count", 250, 85, 2),
    ("Lactate", 1.8, 0.8, 3),
    ("Hemoglobin", 10.2, 1.6, 2),
    ("Glucose", 128, 35, 3),
    ("White Blood Cells", 9.5, 3.4, 2),
    ("Creatinine", 1.2, 0.6, 2),
    ("Bilirubin Total", 0.9, 0.5, 1),
    ("Albumin", 3.4, 0.5, 1),
    ("pH", 7.38, 0.05, 2),
]

_ICD_CODES = ["40101", "41401", "5849", "78552", "99591", "99592", "25000",
              "4280", "5990", "486", "I10", "I110", "I129", "I150", "E119",
              "N179", "A419", "J189", "R6520", "R6521"]


def _iso(ms_array) -> list:
    return [pd.Timestamp(int(t), unit="ms", tz="UTC").strftime("%Y-%m-%dT%H:%M:%S")
            for t in ms_array]


def icu_spec_dict() -> dict:
    return json.loads(resources.files("tempoql.resources")
                      .joinpath("icu_spec.json").read_text(encoding="utf-8"))


def generate_icu_frames(n_traj: int = 100, seed: int = 7,
                        sentinel: str | None = None) -> dict:
    """In-memory CSV-faithful frames for the ICU dataset.

    ``sentinel``, when set, is planted as a value in every data table (for
    privacy leak tests)."""
    rng = np.random.default_rng(seed)
    stay_ids = np.array([f"S{i:06d}" for i in range(1, n_traj + 1)], dtype=object)
    hadm_ids = np.array([f"H{i:06d}" for i in range(1, n_traj + 1)], dtype=object)
    subj_ids = np.array([f"P{i:06d}" for i in range(1, n_traj + 1)], dtype=object)

    intimes = EPOCH_2019 + rng.integers(0, 300, n_traj) * DAY \
        + rng.integers(0, 24, n_traj) * HOUR
    stay_days = rng.integers(1, 6, n_traj)
    outtimes = intimes + stay_days * DAY + rng.integers(0, 12, n_traj) * HOUR

    icustays = pd.DataFrame({
        "stay_id": stay_ids, "hadm_id": hadm_ids, "subject_id": subj_ids,
        "intime": _iso(intimes), "outtime": _iso(outtimes),
    })

    anchor_year = (1970 + intimes // (365 * DAY)).astype(int) - rng.integers(0, 3, n_traj)
    patients = pd.DataFrame({
        "subject_id": subj_ids,
        "gender": rng.choice(["Female", "Male"], n_traj),
        "anchor_age": rng.integers(45, 92, n_traj).astype(str),
        "anchor_year": anchor_year.astype(str),
        "dod": ["" for _ in range(n_traj)],
        "weight": np.round(rng.normal(80, 15, n_traj), 1).astype(str),
        "height": np.round(rng.normal(170, 10, n_traj), 1).astype(str),
    })

    chartevents = _chartevents(rng, stay_ids, intimes, outtimes, sentinel)
    labevents = _labevents(rng, hadm_ids, intimes, outtimes, sentinel)
    procedureevents = _procedureevents(rng, stay_ids, intimes, outtimes, sentinel)
    diagnoses = _diagnoses(rng, stay_ids, outtimes, sentinel)

    d_items_rows = [(str(1000 + i), label, "chartevents")
                    for i, (label, *_rest) in enumerate(_CHART_CONCEPTS)]
    d_items_rows += [(str(2000 + i), label, "procedureevents")
                     for i, label in enumerate(_PROC_CONCEPTS)]
    d_items = pd.DataFrame(d_items_rows, columns=["itemid", "label", "linksto"])
    d_labitems = pd.DataFrame(
        [(str(5000 + i), label) for i, (label, *_r) in enumerate(_LAB_CONCEPTS)],
        columns=["itemid", "label"])

    return {
        "icu.icustays": icustays,
        "hosp.patients": patients,
        "icu.chartevents": chartevents,
        "hosp.labevents": labevents,
        "icu.procedureevents": procedureevents,
        "hosp.diagnoses": diagnoses,
        "icu.d_items": d_items,
        "hosp.d_labitems": d_labitems,
    }


def _chartevents(rng, stay_ids, intimes, outtimes, sentinel):
    n = len(stay_ids)
    stay_hours = (outtimes - intimes) / HOUR
    cols = {"stay_id": [], "charttime": [], "itemid": [], "value": [], "valuenum": []}
    for ci, (label, kind, mu, sd, per_day) in enumerate(_CHART_CONCEPTS):
        itemid = str(1000 + ci)
        if kind == "admission":
            counts = np.ones(n, dtype=np.int64)
        else:
            lam = np.maximum(per_day * stay_hours / 24.0, 0.05)
            counts = rng.poisson(lam).astype(np.int64)
        total = int(counts.sum())
        if total == 0:
            continue
        owner = np.repeat(np.arange(n), counts)
        if kind == "admission":
            times = intimes[owner]
        else:
            frac = rng.random(total)
            times = (intimes[owner]
                     + (frac * (outtimes - intimes)[owner]).astype(np.int64))
            times = (times // 60000) * 60000  # minute resolution
        if kind == "num":
            vals = np.round(rng.normal(mu, sd, total), 1)
            value_txt = vals.astype(str)
            valuenum_txt = vals.astype(str)
        elif kind == "admission":
            value_txt = np.array(["admitted"] * total, dtype=object)
            valuenum_txt = np.array([""] * total, dtype=object)
        else:
            pool = _TEXT_POOLS[kind]
            value_txt = rng.choice(pool, total).astype(object)
            valuenum_txt = np.array([""] * total, dtype=object)
        # sprinkle missing values
        blank = rng.random(total) < 0.03
        value_txt = np.where(blank, "", value_txt).astype(object)
        valuenum_txt = np.where(blank, "", valuenum_txt).astype(object)
        cols["stay_id"].append(stay_ids[owner])
        cols["charttime"].append(np.array(_iso(times), dtype=object))
        cols["itemid"].append(np.array([itemid] * total, dtype=object))
        cols["value"].append(value_txt)
        cols["valuenum"].append(valuenum_txt)
    frame = pd.DataFrame({k: np.concatenate(v) for k, v in cols.items()})
    frame = frame.sample(frac=1.0, random_state=12345).reset_index(drop=True)
    if sentinel:
        frame.loc[0, "value"] = sentinel
    return frame


def _labevents(rng, hadm_ids, intimes, outtimes, sentinel):
    n = len(hadm_ids)
    stay_hours = (outtimes - intimes) / HOUR
    rows = {"hadm_id": [], "charttime": [], "itemid": [], "valuenum": [], "value": []}
    for ci, (label, mu, sd, per_day) in enumerate(_LAB_CONCEPTS):
        itemid = str(5000 + ci)
        counts = rng.poisson(np.maximum(per_day * stay_hours / 24.0, 0.05)).astype(np.int64)
        total = int(counts.sum())
        if total == 0:
            continue
        owner = np.repeat(np.arange(n), counts)
        frac = rng.random(total)
        times = (intimes[owner] + (frac * (outtimes - intimes)[owner]).astype(np.int64))
        times = (times // 60000) * 60000
        vals = np.round(rng.normal(mu, sd, total), 2)
        blank = rng.random(total) < 0.04
        valuenum = np.where(blank, "", vals.astype(str)).astype(object)
        value = np.where(blank, "", np.char.add(vals.astype(str), " units")).astype(object)
        rows["hadm_id"].append(hadm_ids[owner])
        rows["charttime"].append(np.array(_iso(times), dtype=object))
        rows["itemid"].append(np.array([itemid] * total, dtype=object))
        rows["valuenum"].append(valuenum)
        rows["value"].append(value)
    frame = pd.DataFrame({k: np.concatenate(v) for k, v in rows.items()})
    frame = frame.sample(frac=1.0, random_state=54321).reset_index(drop=True)
    if sentinel:
        frame.loc[0, "value"] = sentinel
    return frame


def _procedureevents(rng, stay_ids, intimes, outtimes, sentinel):
    n = len(stay_ids)
    rows = []
    for ci, label in enumerate(_PROC_CONCEPTS):
        itemid = str(2000 + ci)
        if label == "Invasive Ventilation":
            chance, max_n, dur_h = 0.25, 2, (8, 72)
        elif label == "Cardioversion/Defibrillation":
            chance, max_n, dur_h = 0.06, 3, (0, 1)
        else:
            chance, max_n, dur_h = 0.15, 1, (4, 96)
        has = rng.random(n) < chance
        for i in np.flatnonzero(has):
            k = rng.integers(1, max_n + 1)
            span = outtimes[i] - intimes[i]
            for _ in range(k):
                start = intimes[i] + int(rng.random() * span * 0.8)
                start = (start // 60000) * 60000
                dur = int(rng.uniform(dur_h[0], dur_h[1]) * HOUR)
                end = min(start + dur, outtimes[i])
                rows.append((stay_ids[i], start, end, itemid,
                             str(round(rng.uniform(1, 500), 1))))
    rows.sort(key=lambda r: (r[0], r[1]))
    frame = pd.DataFrame(rows, columns=["stay_id", "starttime", "endtime",
                                        "itemid", "value"])
    frame["starttime"] = _iso(frame["starttime"].to_numpy(dtype=np.int64)) \
        if len(frame) else frame["starttime"]
    frame["endtime"] = _iso(frame["endtime"].to_numpy(dtype=np.int64)) \
        if len(frame) else frame["endtime"]
    if sentinel and len(frame):
        frame.loc[0, "value"] = sentinel
    return frame


def _diagnoses(rng, stay_ids, outtimes, sentinel):
    n = len(stay_ids)
    counts = rng.integers(1, 8, n)
    owner = np.repeat(np.arange(n), counts)
    total = len(owner)
    codes = rng.choice(_ICD_CODES, total).astype(object)
    times = outtimes[owner] - HOUR
    frame = pd.DataFrame({
        "stay_id": stay_ids[owner],
        "diag_time": _iso(times),
        "diag_label": ["Diagnosis"] * total,
        "icd_code": codes,
    })
    if sentinel and len(frame):
        frame.loc[0, "icd_code"] = sentinel
    return frame


def load_icu_dataset(n_traj: int = 100, seed: int = 7,
                     sentinel: str | None = None) -> Dataset:
    spec = parse_spec(icu_spec_dict(), root=".")
    return Dataset.from_frames(spec, generate_icu_frames(n_traj, seed, sentinel))


def write_icu_dataset(target_dir, n_traj: int = 100, seed: int = 7) -> Path:
    """Write the CSV layout plus spec file; returns the spec path."""
    target = Path(target_dir)
    frames = generate_icu_frames(n_traj, seed)
    for source, frame in frames.items():
        rel = Path(*source.split(".")).with_suffix(".csv")
        path = target / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    spec_path = target / "dataset_spec.json"
    spec_path.write_text(
        json.dumps(icu_spec_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8")
    return spec_path


# --- drug / outcome dataset -----------------------------------------------------


DRUG_CONCEPTS = [
    ("90001", "Semaglutide 0.5 MG Injection"),
    ("90002", "Ozempic 1 MG (semaglutide) Pen Injector"),
    ("90003", "Metformin 500 MG Oral Tablet"),
    ("90004", "Lisinopril 10 MG Oral Tablet"),
    ("90005", "Atorvastatin 20 MG Oral Tablet"),
]

CONDITION_CONCEPTS = [
    ("14669001", "Acute kidney injury"),
    ("36171008", "Acute kidney injury due to sepsis"),
    ("771115008", "Sepsis without septic shock"),
    ("91302008", "Sepsis"),
    ("104177005", "Blood culture"),
    ("38341003", "Hypertension"),
    ("44054006", "Type 2 diabetes mellitus"),
]

MED_CONCEPTS = [
    ("RxNorm/242969", "Norepinephrine 4 MG per 250 ML Injection"),
    ("RxNorm/2475337", "Norepinephrine 250 MCG/ML Injectable Solution"),
    ("RxNorm/1658712", "Vancomycin 1000 MG Injection"),
]


def drug_spec_dict() -> dict:
    return json.loads(resources.files("tempoql.resources")
                      .joinpath("drug_spec.json").read_text(encoding="utf-8"))


def generate_drug_frames(seed: int = 11, n_traj: int = 60,
                         sentinel: str | None = None) -> dict:
    """Drug-exposure dataset seeded so that exactly three trajectories have
    the outcome inside 90 days of their first exposure and none before."""
    rng = np.random.default_rng(seed)
    pids = [f"D{i:04d}" for i in range(1, n_traj + 1)]
    base = EPOCH_2019

    persons = pd.DataFrame({
        "person_id": pids,
        "gender": rng.choice(["Female", "Male"], n_traj),
        "weight": np.round(rng.normal(82, 14, n_traj), 1).astype(str),
    })

    drug_rows, cond_rows, med_rows = [], [], []
    # group assignment: 3 qualify; 4 have prior outcomes; 5 have late
    # outcomes; 30 exposure only; the rest no exposure at all
    qualifying = set(range(0, 3))
    prior = set(range(3, 7))
    late = set(range(7, 12))
    exposed_only = set(range(12, 42))

    for i, pid in enumerate(pids):
        t0 = base + int(rng.integers(0, 200)) * DAY
        # background observations so every trajectory has extents
        cond_rows.append((pid, "38341003", t0 - 30 * DAY))
        cond_rows.append((pid, "44054006", t0 + 400 * DAY))
        if rng.random() < 0.5:
            cond_rows.append((pid, "104177005", t0 + int(rng.integers(1, 90)) * DAY))
        if rng.random() < 0.25:
            cond_rows.append((pid, "91302008", t0 + int(rng.integers(5, 300)) * DAY))
        exposed = i in qualifying or i in prior or i in late or i in exposed_only
        if exposed:
            drug_id = "90001" if i % 2 == 0 else "90002"
            start = t0
            end = start + int(rng.integers(14, 60)) * DAY
            drug_rows.append((pid, drug_id, start, end,
                              str(round(rng.uniform(0.25, 2.0), 2))))
            if rng.random() < 0.3:  # occasional refill
                drug_rows.append((pid, drug_id, end + 10 * DAY, end + 40 * DAY,
                                  str(round(rng.uniform(0.25, 2.0), 2))))
            drug_rows.append((pid, rng.choice(["90003", "90004", "90005"]),
                              t0 - 60 * DAY, t0 + 120 * DAY, "1"))
        if i in qualifying:
            cond_rows.append((pid, "14669001", t0 + int(rng.integers(5, 85)) * DAY))
        elif i in prior:
            cond_rows.append((pid, "14669001", t0 - int(rng.integers(10, 100)) * DAY))
            if rng.random() < 0.5:
                cond_rows.append((pid, "36171008", t0 + int(rng.integers(5, 85)) * DAY))
        elif i in late:
            cond_rows.append((pid, "14669001", t0 + int(rng.integers(120, 300)) * DAY))
        if rng.random() < 0.35:
            med_id = MED_CONCEPTS[int(rng.integers(0, len(MED_CONCEPTS)))][0]
            med_rows.append((pid, med_id, t0 + int(rng.integers(0, 60)) * DAY,
                             str(round(rng.uniform(1, 8), 1))))

    drug_exposure = pd.DataFrame(
        drug_rows, columns=["person_id", "drug_concept_id", "start", "end", "dose"])
    drug_exposure["start"] = _iso(drug_exposure["start"].to_numpy(np.int64))
    drug_exposure["end"] = _iso(drug_exposure["end"].to_numpy(np.int64))
    conditions = pd.DataFrame(cond_rows,
                              columns=["person_id", "condition_concept_id", "time"])
    conditions["time"] = _iso(conditions["time"].to_numpy(np.int64))
    med_orders = pd.DataFrame(med_rows,
                              columns=["person_id", "med_concept_id", "time", "units"])
    if len(med_orders):
        med_orders["time"] = _iso(med_orders["time"].to_numpy(np.int64))

    if sentinel:
        persons.loc[0, "weight"] = sentinel
        drug_exposure.loc[0, "dose"] = sentinel

    drug_vocab = pd.DataFrame(DRUG_CONCEPTS, columns=["concept_id", "concept_name"])
    cond_vocab = pd.DataFrame(CONDITION_CONCEPTS, columns=["concept_id", "concept_name"])
    med_vocab = pd.DataFrame(MED_CONCEPTS, columns=["concept_id", "concept_name"])
    return {
        "persons": persons,
        "drug_exposure": drug_exposure,
        "condition_occurrence": conditions,
        "med_orders": med_orders,
        "drug_concepts": drug_vocab,
        "condition_concepts": cond_vocab,
        "med_concepts": med_vocab,
    }


def load_drug_dataset(seed: int = 11, n_traj: int = 60,
                      sentinel: str | None = None) -> Dataset:
    spec = parse_spec(drug_spec_dict(), root=".")
    return Dataset.from_frames(spec, generate_drug_frames(seed, n_traj, sentinel))


# --- tiny LOINC observation set -------------------------------------------------


def loinc_spec_dict() -> dict:
    return {
        "tables": [
            {"source": "observations", "type": "event", "id_field": "pid",
             "time_field": "obstime", "concept_id_field": "code",
             "default_value_field": "value", "scope": "LOINC"},
        ],
        "vocabularies": [
            {"source": "loinc_concepts", "concept_id_field": "code",
             "concept_name_field": "name", "scope": "LOINC"},
        ],
        "joins": {},
    }


def load_loinc_dataset() -> Dataset:
    spec = parse_spec(loinc_spec_dict(), root=".")
    observations = pd.DataFrame({
        "pid": ["L1", "L1", "L1", "L2", "L2"],
        "obstime": ["2020-03-01T06:00:00", "2020-03-01T12:00:00",
                    "2020-03-01T18:00:00", "2020-03-02T08:00:00",
                    "2020-03-02T20:00:00"],
        "code": ["8310-5", "8310-5", "8310-5", "8310-5", "2524-7"],
        "value": ["36.5", "98.6", "800", "37.2", "1.4"],
        "numeric_value": ["36.5", "98.6", "800", "37.2", "1.4"],
    })
    loinc_concepts = pd.DataFrame({
        "code": ["8310-5", "2524-7"],
        "name": ["Body temperature", "Lactate [Moles/volume] in Blood"],
    })
    return Dataset.from_frames(spec, {"observations": observations,
                                      "loinc_concepts": loinc_concepts})


# --- large flat dataset for throughput measurements ------------------------------


def perf_spec_dict() -> dict:
    return {
        "tables": [
            {"source": "stays", "id_field": "stay_id", "scope": "Patient",
             "attributes": {"Admit Time": {"value_field": "intime"},
                            "Discharge Time": {"value_field": "outtime"}}},
            {"source": "vitals", "type": "event", "id_field": "stay_id",
             "time_field": "t", "concept_id_field": "itemid",
             "default_value_field": "v", "scope": "chartevents"},
        ],
        "vocabularies": [
            {"source": "vitals_items", "concept_id_field": "itemid",
             "concept_name_field": "label", "scope": "chartevents"},
        ],
        "joins": {},
    }


def load_perf_dataset(n_traj: int, events_per_traj: int = 100, seed: int = 3) -> Dataset:
    """Native-dtype dataset sized for throughput runs: one vital signal,
    ``events_per_traj`` observations per stay."""
    rng = np.random.default_rng(seed)
    spec = parse_spec(perf_spec_dict(), root=".")
    width = len(str(n_traj))
    ids = np.array([f"S{i:0{width}d}" for i in range(n_traj)], dtype=object)
    intimes = EPOCH_2019 + rng.integers(0, 100, n_traj) * DAY
    stay_hours = events_per_traj  # ~1 event/hour
    outtimes = intimes + stay_hours * HOUR

    total = n_traj * events_per_traj
    owner = np.repeat(np.arange(n_traj), events_per_traj)
    times = intimes[owner] + (rng.random(total) * stay_hours * HOUR).astype(np.int64)
    values = rng.normal(85, 14, total)

    stays = pd.DataFrame({
        "stay_id": ids,
        "intime": pd.to_datetime(intimes, unit="ms", utc=True),
        "outtime": pd.to_datetime(outtimes, unit="ms", utc=True),
    })
    vitals = pd.DataFrame({
        "stay_id": ids[owner],
        "t": times,   # already epoch ms
        "itemid": np.full(total, 1000, dtype=np.int64),
        "v": values,
    })
    items = pd.DataFrame({"itemid": ["1000"], "label": ["Heart Rate"]})
    return Dataset.from_frames(spec, {"stays": stays, "vitals": vitals,
                                      "vitals_items": items})
