"""Concept catalog: what can be queried, and how often it occurs.

The catalog has one entry per vocabulary concept (occurrence counts come
from the tables of that concept's scope), one per declared attribute
(count = trajectories with a non-missing value), and one per distinct
literal type value in tables without a concept id column. Entries are
sorted by (scope, name) so catalog output is byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TempoQLError
from ..lang.regexes import PatternSyntaxError, compile_pattern
from .ingest import Dataset

SEARCH_CAP = 100


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    concept_id: str | None
    scope: str
    element_kind: str       # attribute | event | interval
    occurrence_count: int

    def to_dict(self) -> dict:
        return {
            "name": self.name, "id": self.concept_id, "scope": self.scope,
            "kind": self.element_kind, "count": self.occurrence_count,
        }


class Catalog:
    def __init__(self, entries: list[CatalogEntry]):
        self.entries = entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass
class SearchResult:
    entries: list
    truncated: bool


def build_catalog(dataset: Dataset) -> Catalog:
    entries: list[CatalogEntry] = []
    scope_kind = _scope_kinds(dataset)

    # vocabulary concepts, counted against concept-id tables of their scope
    counts_by_scope = {}
    for vocab in dataset.vocabularies.values():
        for scope in vocab["scope"].unique():
            if scope not in counts_by_scope:
                counts_by_scope[scope] = _concept_counts(dataset, scope)
        for concept_id, name, scope in vocab.itertuples(index=False):
            entries.append(CatalogEntry(
                name=name, concept_id=concept_id, scope=scope,
                element_kind=scope_kind.get(scope, "event"),
                occurrence_count=int(counts_by_scope[scope].get(concept_id, 0)),
            ))

    for table in dataset.tables.values():
        spec = table.spec
        if spec.kind == "attribute-map":
            for attr_name in spec.attributes:
                count = _attribute_count(table, spec.attributes[attr_name]["value_field"])
                entries.append(CatalogEntry(
                    name=attr_name, concept_id=None, scope=spec.scope,
                    element_kind="attribute", occurrence_count=count))
        elif spec.concept_id_field is None:
            kind = "event" if spec.kind == "event" else "interval"
            if spec.type_field and table.has_column(spec.type_field):
                types = table.key_column(spec.type_field)
                uniq, counts = np.unique(types.astype(str), return_counts=True)
                for t, c in zip(uniq, counts):
                    if t:
                        entries.append(CatalogEntry(
                            name=str(t), concept_id=None, scope=spec.scope,
                            element_kind=kind, occurrence_count=int(c)))
            elif len(table):
                entries.append(CatalogEntry(
                    name=spec.scope, concept_id=None, scope=spec.scope,
                    element_kind=kind, occurrence_count=len(table)))

    entries.sort(key=lambda e: (e.scope, e.name, e.concept_id or ""))
    return Catalog(entries)


def _scope_kinds(dataset: Dataset) -> dict:
    kinds = {}
    for table in dataset.tables.values():
        spec = table.spec
        kind = {"attribute-map": "attribute", "event": "event", "interval": "interval"}[spec.kind]
        kinds.setdefault(spec.scope, kind)
    return kinds


def _concept_counts(dataset: Dataset, scope: str) -> dict:
    counts: dict[str, int] = {}
    for table in dataset.tables.values():
        spec = table.spec
        if spec.scope != scope or not spec.concept_id_field:
            continue
        col = table.key_column(spec.concept_id_field)
        uniq, n = np.unique(col.astype(str), return_counts=True)
        for cid, c in zip(uniq, n):
            counts[cid] = counts.get(cid, 0) + int(c)
    return counts


def _attribute_count(table, value_field: str) -> int:
    if not table.has_column(value_field) or not len(table):
        return 0
    raw = table.raw_column(value_field).fillna("").astype(str).str.strip()
    frame = table.frame
    nonmissing = raw != ""
    ids = table.traj[nonmissing.to_numpy()]
    return int(len(np.unique(ids)))


def search_concepts(catalog: Catalog, query: str, scope: str | None = None) -> SearchResult:
    """Case-insensitive substring search on names; ``/pattern/flags`` input
    switches to regex mode. Results are ordered by occurrence count
    descending, then name, and truncated at 100."""
    query = query or ""
    if query.startswith("/"):
        body = query[1:]
        close = body.rfind("/")
        if close < 0:
            raise TempoQLError("regex search must be closed: /pattern/flags")
        pattern, flags = body[:close], body[close + 1:]
        try:
            rx = compile_pattern(pattern, flags)
        except PatternSyntaxError as exc:
            raise TempoQLError(f"invalid search pattern: {exc}") from exc
        match = lambda name: rx.search(name) is not None
    else:
        needle = query.lower()
        match = lambda name: needle in name.lower()

    hits = [
        e for e in catalog.entries
        if (scope is None or e.scope == scope) and match(e.name)
    ]
    hits.sort(key=lambda e: (-e.occurrence_count, e.name, e.concept_id or ""))
    truncated = len(hits) > SEARCH_CAP
    return SearchResult(entries=hits[:SEARCH_CAP], truncated=truncated)
