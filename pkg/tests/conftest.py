from __future__ import annotations

import pytest

from tempoql.synthetic import (
    load_drug_dataset,
    load_icu_dataset,
    load_loinc_dataset,
)


@pytest.fixture(scope="session")
def icu_small():
    """50-trajectory ICU dataset shared across fast tests."""
    return load_icu_dataset(n_traj=50, seed=7)


@pytest.fixture(scope="session")
def drug_dataset():
    return load_drug_dataset()


@pytest.fixture(scope="session")
def loinc_dataset():
    return load_loinc_dataset()


def cell(v):
    """Engine Value -> oracle cell tuple."""
    if v.is_missing():
        return None
    payload = v.payload
    if v.kind == "number":
        payload = float(payload)
    return (v.kind, payload)


def approx_cells(a, b, rel=1e-9, abs_floor=1e-9):
    """Compare an engine cell against an oracle cell.

    Floats compare within 1e-9 relative; the absolute floor covers
    true-zero results where summation-order noise (~1e-14) would otherwise
    make a relative test vacuously impossible.
    """
    if a is None or b is None:
        return a is None and b is None
    if a[0] != b[0]:
        return False
    if a[0] == "number":
        x, y = a[1], b[1]
        if x == y:
            return True
        return abs(x - y) <= max(rel * max(abs(x), abs(y)), abs_floor)
    return a[1] == b[1]
