"""Element resolution: criteria in, series out.

Applies an element query's criteria against the ingested tables: ``scope``
restricts the candidate tables, ``name``/``id`` filter via the vocabulary
join (concept-id tables) or directly against literal type values, ``type``
restricts the result kind, and ``value`` selects an alternate value column.
Matches across multiple tables of one kind are unioned into a single
canonical series. Every resolution also produces a ``RetrievalPlan`` whose
rendering is deterministic for a given specification and query.

Name matching with ``=``/``in`` is case-insensitive exact; pattern
relations give precise control. When nothing matches, the query still
resolves to an empty series if the scope or type pins down the result kind;
it is an error only when the kind cannot be determined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EvalError
from ..lang.nodes import ElementCriterion, Pattern
from ..lang.regexes import compile_pattern
from ..series import AttributeSeries, EventSeries, IntervalSeries
from ..values import MISSING, ValueVector, number, parse_timestamp, text, timestamp
from .ingest import Dataset, column_to_vector, _key_str


@dataclass
class PlanStep:
    table: str
    scope: str
    kind: str
    filter_desc: str
    value_column: str | None
    matched_rows: int
    join_note: str | None = None


@dataclass
class RetrievalPlan:
    steps: list = field(default_factory=list)
    criteria_desc: str = ""

    def render(self) -> str:
        lines = [f"retrieve {self.criteria_desc}"]
        if not self.steps:
            lines.append("  (no matching tables)")
        for s in self.steps:
            vc = f", value column {s.value_column}" if s.value_column else ""
            jn = f" [{s.join_note}]" if s.join_note else ""
            lines.append(
                f"  scan {s.table} (scope {s.scope}, {s.kind}): {s.filter_desc}{vc}"
                f" -> {s.matched_rows} rows{jn}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"criteria": self.criteria_desc, "rendering": self.render(),
                "steps": [vars(s) for s in self.steps]}


def _describe_criteria(criteria: list[ElementCriterion]) -> str:
    parts = []
    for c in criteria:
        if isinstance(c.operand, Pattern):
            op = f"/{c.operand.text}/{c.operand.flags}" if c.operand.kind == "regex" \
                else repr(c.operand.text)
        elif isinstance(c.operand, list):
            op = "(" + ", ".join(c.operand) + ")"
        else:
            op = c.operand
        rel = "=" if c.relation == "equals" else c.relation
        parts.append(f"{c.field} {rel} {op}")
    return "{" + "; ".join(parts) + "}"


class _NameMatcher:
    """Conjunction of the name criteria, applied to concept names,
    attribute names, or literal type values."""

    def __init__(self, criteria: list[ElementCriterion]):
        self.tests = []
        for c in criteria:
            if c.relation == "equals":
                want = c.operand.lower()
                self.tests.append(lambda s, w=want: s.lower() == w)
            elif c.relation == "in":
                wants = {w.lower() for w in c.operand}
                self.tests.append(lambda s, w=wants: s.lower() in w)
            else:
                self.tests.append(_pattern_test(c.relation, c.operand))

    def __call__(self, name: str) -> bool:
        return all(t(name) for t in self.tests)

    def any_tests(self) -> bool:
        return bool(self.tests)


def _pattern_test(relation: str, pattern: Pattern):
    if pattern.kind == "regex":
        rx = compile_pattern(pattern.text, pattern.flags)
        if relation == "contains":
            return lambda s: rx.search(s) is not None
        if relation == "matches":
            return lambda s: rx.fullmatch(s) is not None
        if relation == "startswith":
            return lambda s: rx.match(s) is not None
        return lambda s: any(m.end() == len(s) for m in rx.finditer(s))
    lit = pattern.text
    fold = lit.lower() if pattern.case_insensitive() else lit

    def prep(s: str) -> str:
        return s.lower() if pattern.case_insensitive() else s

    if relation == "contains":
        return lambda s: fold in prep(s)
    if relation == "matches":
        return lambda s: prep(s) == fold
    if relation == "startswith":
        return lambda s: prep(s).startswith(fold)
    return lambda s: prep(s).endswith(fold)


def resolve_elements(dataset: Dataset, criteria: list[ElementCriterion]):
    """Resolve criteria to (RetrievalPlan, series)."""
    scope = _single(criteria, "scope")
    type_want = _single(criteria, "type")
    value_col = _single(criteria, "value")
    name_crits = [c for c in criteria if c.field == "name"]
    id_crits = [c for c in criteria if c.field == "id"]

    tables = list(dataset.tables.values())
    if scope is not None:
        tables = [t for t in tables if t.spec.scope == scope]
        if not tables:
            known = ", ".join(sorted({t.spec.scope for t in dataset.tables.values()}))
            raise EvalError(f"unknown scope {scope!r}; available scopes: {known}")
    if type_want is not None:
        kind_of = {"attribute": "attribute-map", "event": "event", "interval": "interval"}
        tables = [t for t in tables if t.spec.kind == kind_of[type_want]]

    name_match = _NameMatcher(name_crits)
    plan = RetrievalPlan(criteria_desc=_describe_criteria(criteria))

    matches = []  # (table, element_kind, payload)
    for table in tables:
        spec = table.spec
        if spec.kind == "attribute-map":
            if id_crits or value_col is not None:
                continue  # attributes carry no concept ids / value columns
            for attr_name, amap in spec.attributes.items():
                if name_match(attr_name):
                    matches.append((table, "attribute", (attr_name, amap)))
        elif spec.concept_id_field:
            ids = _matching_concept_ids(dataset, table, name_match, id_crits)
            if ids is not None:
                matches.append((table, spec.kind, ("concepts", ids)))
        else:
            if id_crits:
                continue  # literal-type tables are not addressable by id
            payload = _literal_match(table, name_match)
            if payload is not None:
                matches.append((table, spec.kind, payload))

    result = _materialize(dataset, matches, value_col, plan)
    if result is None:
        result = _empty_result(dataset, tables, scope, type_want, plan)
    return plan, result


def _empty_result(dataset, tables, scope, type_want, plan):
    """Nothing matched: produce an empty series if the kind is pinned down."""
    if type_want is not None:
        kinds = {type_want}
    elif scope is not None:
        kinds = { {"attribute-map": "attribute", "event": "event",
                   "interval": "interval"}[t.spec.kind] for t in tables}
    else:
        raise EvalError(f"no data elements match {plan.criteria_desc}")
    if len(kinds) != 1:
        raise EvalError(
            f"no data elements match {plan.criteria_desc}, and the scope spans "
            "mixed kinds; add a type criterion")
    kind = kinds.pop()
    if kind == "attribute":
        return AttributeSeries(dataset.index,
                               ValueVector.all_missing(len(dataset.index)))
    if kind == "interval":
        return IntervalSeries(dataset.index, [], [], [], np.array([], object),
                              ValueVector.empty())
    return EventSeries(dataset.index, [], [], np.array([], object), ValueVector.empty())


def _single(criteria, fieldname):
    vals = [c.operand for c in criteria if c.field == fieldname]
    if not vals:
        return None
    if len(vals) > 1:
        raise EvalError(f"multiple {fieldname} criteria are not supported")
    return vals[0]


def _matching_concept_ids(dataset, table, name_match, id_crits):
    """Concept ids to retrieve: a set, set() meaning the whole table, or
    None when the criteria rule this table out."""
    spec = table.spec
    vocab_rows = []
    for vocab in dataset.vocabularies.values():
        sub = vocab[vocab["scope"] == spec.scope]
        if len(sub):
            vocab_rows.append(sub)
    id_set = None
    if name_match.any_tests():
        named = set()
        for sub in vocab_rows:
            for cid, name in zip(sub["concept_id"], sub["name"]):
                if name_match(name):
                    named.add(cid)
        id_set = named
    if id_crits:
        direct = _ids_from_criteria(id_crits, vocab_rows)
        id_set = direct if id_set is None else (id_set & direct)
    if id_set is None:
        return set()  # unconstrained
    return id_set if id_set else None


def _ids_from_criteria(id_crits, vocab_rows) -> set[str]:
    known: set[str] = set()
    for sub in vocab_rows:
        known.update(sub["concept_id"])
    out = None
    for c in id_crits:
        if c.relation == "equals":
            ids = {_key_str(c.operand)}
        elif c.relation == "in":
            ids = {_key_str(x) for x in c.operand}
        else:
            test = _pattern_test(c.relation, c.operand)
            ids = {cid for cid in known if test(cid)}
        out = ids if out is None else (out & ids)
    return out or set()


def _literal_match(table, name_match):
    """Payload for a literal-type table, or None when names rule it out."""
    spec = table.spec
    if spec.type_field and table.has_column(spec.type_field):
        if not name_match.any_tests():
            return ("literal", None)
        uniq = np.unique(table.key_column(spec.type_field).astype(str))
        wanted = {u for u in uniq if name_match(str(u))}
        return ("literal", wanted) if wanted else None
    # no type column: the scope name stands in for the element type
    if name_match.any_tests() and not name_match(spec.scope):
        return None
    return ("all", None)


def _materialize(dataset, matches, value_col, plan):
    attr_hits = [(t, p) for t, kind, p in matches if kind == "attribute"]
    event_hits = [(t, p) for t, kind, p in matches if kind == "event"]
    interval_hits = [(t, p) for t, kind, p in matches if kind == "interval"]

    kinds_present = [k for k, hits in (("attribute", attr_hits), ("event", event_hits),
                                       ("interval", interval_hits)) if hits]
    if len(kinds_present) > 1:
        raise EvalError(
            "criteria match elements of mixed kinds (" + ", ".join(kinds_present)
            + "); add a type criterion to disambiguate")
    if not kinds_present:
        return None
    if attr_hits:
        return _materialize_attributes(dataset, attr_hits, plan)
    hits = event_hits or interval_hits
    return _materialize_rows(dataset, hits, value_col, plan,
                             interval=bool(interval_hits))


def _materialize_attributes(dataset, attr_hits, plan):
    distinct = {(t.spec.source, payload[0]) for t, payload in attr_hits}
    if len(distinct) > 1:
        names = ", ".join(sorted(f"{s}.{a}" for s, a in distinct))
        raise EvalError(f"criteria match multiple attributes ({names}); "
                        "narrow the name or scope")
    table, (attr_name, amap) = attr_hits[0]
    value_field = amap["value_field"]
    if not table.has_column(value_field):
        raise EvalError(f"unknown value column {value_field!r} in {table.spec.source}")
    vec = column_to_vector(table.raw_column(value_field))
    vec = _apply_transform(vec, amap.get("value_transform"))
    n = len(dataset.index)
    # first row per trajectory wins; later duplicates are ignored
    out_vals = [MISSING] * n
    seen = set()
    for pos in range(len(table)):
        code = int(table.traj[pos])
        if code in seen:
            continue
        seen.add(code)
        out_vals[code] = vec.get(pos)
    series = AttributeSeries(dataset.index, ValueVector.from_values(out_vals), name=attr_name)
    plan.steps.append(PlanStep(
        table=table.spec.source, scope=table.spec.scope, kind="attribute",
        filter_desc=f"attribute {attr_name!r} from column {value_field!r}",
        value_column=value_field, matched_rows=int(len(seen)),
        join_note=_join_note(dataset, table)))
    return series


def _apply_transform(vec: ValueVector, transform: str | None) -> ValueVector:
    if transform is None:
        return vec
    if transform == "to_number":
        out = []
        for v in vec.to_values():
            if v.is_missing():
                out.append(MISSING)
            elif v.kind == "number":
                out.append(v)
            elif v.kind == "text":
                try:
                    out.append(number(float(v.payload)))
                except ValueError:
                    out.append(MISSING)
            else:
                out.append(MISSING)
        return ValueVector.from_values(out)
    if transform == "to_lowercase":
        return ValueVector.from_values([
            text(v.payload.lower()) if v.kind == "text" else v
            for v in vec.to_values()])
    if transform == "year_to_timestamp":
        out = []
        for v in vec.to_values():
            if v.kind == "number" and float(v.payload).is_integer():
                out.append(timestamp(parse_timestamp(f"{int(v.payload):04d}-01-01")))
            else:
                out.append(MISSING)
        return ValueVector.from_values(out)
    raise EvalError(f"unknown value_transform {transform!r}")


def _join_note(dataset, table) -> str | None:
    join = dataset.spec.joins.get(table.spec.source)
    if join is None:
        return None
    return f"joined to {join.dest_table} on {join.join_key}"


def _materialize_rows(dataset, hits, value_col, plan, interval):
    parts = []
    for table, payload in hits:
        spec = table.spec
        vc = value_col or spec.default_value_field
        if vc is not None and not table.has_column(vc):
            raise EvalError(f"unknown value column {vc!r} in {spec.source}")
        mask, filter_desc, names = _row_mask(dataset, table, payload)
        rows = np.flatnonzero(mask)
        plan.steps.append(PlanStep(
            table=spec.source, scope=spec.scope,
            kind="interval" if interval else "event",
            filter_desc=filter_desc, value_column=vc,
            matched_rows=int(len(rows)), join_note=_join_note(dataset, table)))
        if len(rows) == 0:
            continue
        if vc is not None:
            values = column_to_vector(table.raw_column(vc).iloc[rows])
        else:
            values = ValueVector.all_missing(len(rows))
        types = names[rows] if names is not None else np.array(
            [spec.scope] * len(rows), dtype=object)
        if interval:
            parts.append(IntervalSeries(
                dataset.index, table.traj[rows], table.starts[rows], table.ends[rows],
                types, values, order=table.order[rows]))
        else:
            parts.append(EventSeries(
                dataset.index, table.traj[rows], table.times[rows],
                types, values, order=table.order[rows]))

    if not parts:
        if interval:
            return IntervalSeries(dataset.index, [], [], [], np.array([], object),
                                  ValueVector.empty())
        return EventSeries(dataset.index, [], [], np.array([], object), ValueVector.empty())
    if len(parts) == 1:
        return parts[0]
    from ..engine.builtins import union_series
    return union_series(parts)


def _row_mask(dataset, table, payload):
    """(row mask, plan filter description, per-row display names)."""
    spec = table.spec
    n = len(table)
    kind, detail = payload
    if kind == "concepts":
        col = table.key_column(spec.concept_id_field)
        name_of = _concept_names(dataset, spec.scope)
        if detail == set():
            mask = np.ones(n, dtype=bool)
            desc = "all concepts"
        else:
            mask = np.isin(col, list(detail))
            shown = sorted(detail)
            names = sorted({name_of.get(c, c) for c in shown})
            desc = (f"concept_id in [{', '.join(shown[:6])}"
                    + (", …" if len(shown) > 6 else "") + "]"
                    + f" ({', '.join(names[:4])}" + (", …" if len(names) > 4 else "") + ")")
        names_arr = np.array([name_of.get(c, c) for c in col], dtype=object)
        return mask, desc, names_arr
    if kind == "literal":
        col = table.key_column(spec.type_field)
        if detail is None:
            return np.ones(n, dtype=bool), "all rows", col.astype(object)
        mask = np.isin(col, list(detail))
        desc = f"type in [{', '.join(sorted(detail)[:6])}]"
        return mask, desc, col.astype(object)
    return np.ones(n, dtype=bool), "all rows", None


def _concept_names(dataset, scope) -> dict:
    out = {}
    for vocab in dataset.vocabularies.values():
        sub = vocab[vocab["scope"] == scope]
        for cid, name in zip(sub["concept_id"], sub["name"]):
            out.setdefault(cid, name)
    return out
