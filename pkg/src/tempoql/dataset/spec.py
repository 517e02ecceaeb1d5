"""Dataset specification: the JSON adapter between source files and the
core element kinds.

A specification lists data element tables (attribute maps, event tables,
interval tables), vocabulary tables that map concept ids to names within
one or more scopes, and joins that graft a trajectory id onto tables that
lack one. Keys follow the conventional adapter layout: ``source``,
``id_field``, ``scope``, ``type``, ``time_field``, ``start_time_field``,
``end_time_field``, ``concept_id_field``, ``event_type_field`` /
``interval_type_field``, ``default_value_field``, ``attributes``,
``comment``, plus top-level ``tables`` / ``vocabularies`` / ``joins`` /
``root``.

Unknown keys warn (forward compatibility); missing required keys are
errors with JSON-pointer paths.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import SpecError

# value_transform registry: arbitrary code in a data file is a hazard, so
# transforms are restricted to named, audited functions.
VALUE_TRANSFORMS = ("year_to_timestamp", "to_number", "to_lowercase")

_TABLE_KEYS = {
    "source", "type", "id_field", "scope", "time_field", "start_time_field",
    "end_time_field", "concept_id_field", "event_type_field",
    "interval_type_field", "default_value_field", "attributes", "comment",
}
_VOCAB_KEYS = {"source", "concept_id_field", "concept_name_field", "scope",
               "scope_field", "scopes", "comment"}
_TOP_KEYS = {"tables", "vocabularies", "joins", "root"}


@dataclass
class TableSpec:
    source: str
    kind: str                      # "attribute-map" | "event" | "interval"
    id_field: str
    scope: str
    time_field: str | None = None
    start_time_field: str | None = None
    end_time_field: str | None = None
    concept_id_field: str | None = None
    type_field: str | None = None  # literal event/interval type column
    default_value_field: str | None = None
    attributes: dict = field(default_factory=dict)  # name -> {value_field, value_transform?}
    comment: str | None = None


@dataclass
class VocabularySpec:
    source: str
    concept_id_field: str
    concept_name_field: str
    scope: str | None = None
    scope_field: str | None = None
    scopes: list = field(default_factory=list)
    comment: str | None = None

    def scope_list(self) -> list[str]:
        return [self.scope] if self.scope else list(self.scopes)


@dataclass
class JoinSpec:
    dest_table: str
    join_key: str


@dataclass
class DatasetSpecification:
    tables: list
    vocabularies: list
    joins: dict                     # source table name -> JoinSpec
    root: Path
    warnings: list = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    def table(self, source: str) -> TableSpec | None:
        for t in self.tables:
            if t.source == source:
                return t
        return None

    def scopes(self) -> list[str]:
        return sorted({t.scope for t in self.tables})

    def fingerprint(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_spec(path) -> DatasetSpecification:
    """Load and validate a specification file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SpecError(f"specification file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    root = raw.get("root", ".")
    base = (path.parent / root).resolve()
    return parse_spec(raw, base)


def parse_spec(raw: dict, root) -> DatasetSpecification:
    if not isinstance(raw, dict):
        raise SpecError("specification must be a JSON object", "/")
    warnings: list[str] = []
    for key in raw:
        if key not in _TOP_KEYS:
            warnings.append(f"/{key}: unknown key ignored")

    tables_raw = raw.get("tables")
    if not isinstance(tables_raw, list) or not tables_raw:
        raise SpecError("must be a non-empty list", "/tables")
    tables = [_parse_table(t, i, warnings) for i, t in enumerate(tables_raw)]

    vocab_raw = raw.get("vocabularies", [])
    if not isinstance(vocab_raw, list):
        raise SpecError("must be a list", "/vocabularies")
    vocabularies = [_parse_vocab(v, i, warnings) for i, v in enumerate(vocab_raw)]

    joins_raw = raw.get("joins", {})
    if not isinstance(joins_raw, dict):
        raise SpecError("must be an object mapping source table to join", "/joins")
    joins = {}
    for src, j in joins_raw.items():
        if not isinstance(j, dict) or "dest_table" not in j or "join_key" not in j:
            raise SpecError("join needs dest_table and join_key", f"/joins/{src}")
        joins[src] = JoinSpec(dest_table=str(j["dest_table"]), join_key=str(j["join_key"]))

    spec = DatasetSpecification(
        tables=tables, vocabularies=vocabularies, joins=joins,
        root=Path(root), warnings=warnings, raw=raw,
    )
    _check_joins(spec)
    _check_vocab_scopes(spec)
    return spec


def _parse_table(t: dict, i: int, warnings: list) -> TableSpec:
    ptr = f"/tables/{i}"
    if not isinstance(t, dict):
        raise SpecError("table entry must be an object", ptr)
    for key in t:
        if key not in _TABLE_KEYS:
            warnings.append(f"{ptr}/{key}: unknown key ignored")
    for req in ("source", "id_field", "scope"):
        if req not in t:
            raise SpecError("required key missing", f"{ptr}/{req}")

    kind = t.get("type", "attribute-map" if "attributes" in t else None)
    if kind in ("attribute", "attributes", "attribute-map", None):
        kind = "attribute-map"
    if kind not in ("attribute-map", "event", "interval"):
        raise SpecError(f"unknown table type {kind!r}", f"{ptr}/type")

    type_field = t.get("event_type_field") or t.get("interval_type_field")
    if t.get("concept_id_field") and type_field:
        raise SpecError("concept_id_field and a literal type field are mutually exclusive",
                        f"{ptr}/concept_id_field")

    spec = TableSpec(
        source=str(t["source"]),
        kind=kind,
        id_field=str(t["id_field"]),
        scope=str(t["scope"]),
        time_field=t.get("time_field"),
        start_time_field=t.get("start_time_field"),
        end_time_field=t.get("end_time_field"),
        concept_id_field=t.get("concept_id_field"),
        type_field=type_field,
        default_value_field=t.get("default_value_field"),
        attributes=t.get("attributes", {}),
        comment=t.get("comment"),
    )
    if kind == "event" and not spec.time_field:
        raise SpecError("event tables need time_field", f"{ptr}/time_field")
    if kind == "interval":
        if not spec.start_time_field:
            raise SpecError("interval tables need start_time_field", f"{ptr}/start_time_field")
        if not spec.end_time_field:
            raise SpecError("interval tables need end_time_field", f"{ptr}/end_time_field")
    if kind == "attribute-map":
        if not spec.attributes:
            raise SpecError("attribute tables need a non-empty attributes map",
                            f"{ptr}/attributes")
        for name, amap in spec.attributes.items():
            if not isinstance(amap, dict) or "value_field" not in amap:
                raise SpecError("attribute needs value_field", f"{ptr}/attributes/{name}")
            transform = amap.get("value_transform")
            if transform is not None and transform not in VALUE_TRANSFORMS:
                raise SpecError(
                    f"unknown value_transform {transform!r}; allowed: {', '.join(VALUE_TRANSFORMS)}",
                    f"{ptr}/attributes/{name}/value_transform")
    return spec


def _parse_vocab(v: dict, i: int, warnings: list) -> VocabularySpec:
    ptr = f"/vocabularies/{i}"
    if not isinstance(v, dict):
        raise SpecError("vocabulary entry must be an object", ptr)
    for key in v:
        if key not in _VOCAB_KEYS:
            warnings.append(f"{ptr}/{key}: unknown key ignored")
    for req in ("source", "concept_id_field", "concept_name_field"):
        if req not in v:
            raise SpecError("required key missing", f"{ptr}/{req}")
    has_scope = "scope" in v
    has_multi = "scope_field" in v or "scopes" in v
    if has_scope and has_multi:
        raise SpecError("vocabulary takes either scope or scope_field+scopes, not both",
                        f"{ptr}/scope")
    if not has_scope and not ("scope_field" in v and "scopes" in v):
        raise SpecError("vocabulary needs scope, or scope_field with scopes", f"{ptr}/scope")
    return VocabularySpec(
        source=str(v["source"]),
        concept_id_field=str(v["concept_id_field"]),
        concept_name_field=str(v["concept_name_field"]),
        scope=v.get("scope"),
        scope_field=v.get("scope_field"),
        scopes=list(v.get("scopes", [])),
        comment=v.get("comment"),
    )


def _check_joins(spec: DatasetSpecification) -> None:
    table_names = {t.source for t in spec.tables}
    for src, join in spec.joins.items():
        seen = {src}
        dest = join.dest_table
        while True:
            if dest in seen:
                raise SpecError(f"join cycle involving {dest!r}", f"/joins/{src}")
            seen.add(dest)
            if dest in table_names:
                break
            nxt = spec.joins.get(dest)
            if nxt is None:
                raise SpecError(
                    f"dest_table {dest!r} is not a declared table and has no join of its own",
                    f"/joins/{src}")
            dest = nxt.dest_table


def _check_vocab_scopes(spec: DatasetSpecification) -> None:
    table_scopes = {t.scope for t in spec.tables}
    for i, v in enumerate(spec.vocabularies):
        for s in v.scope_list():
            if s not in table_scopes:
                raise SpecError(
                    f"vocabulary scope {s!r} is not used by any table",
                    f"/vocabularies/{i}")
