"""Deterministic canonical rendering of ASTs back to query text.

``parse(unparse(ast))`` yields a structurally identical AST. Parentheses are
inserted from operator precedence; aggregations are parenthesized whenever
they appear as an operand, since their trailing bounds/timestep clauses
would otherwise absorb what follows.
"""

from __future__ import annotations

import re

from .nodes import (
    AggClause,
    Aggregation,
    AsUnit,
    AtEveryTimestep,
    AtListTimestep,
    Between,
    Binary,
    Case,
    Clause,
    DurationLiteral,
    ElementQuery,
    FunctionCall,
    InList,
    Literal,
    Pattern,
    PatternMatch,
    RegularTimestep,
    TimeMarker,
    Unary,
    VariableRef,
    Window,
    WithBinding,
)
from .tokens import _FIELD_RE

_WITH, _CLAUSE, _OR, _AND, _NOT, _CMP, _ADD, _MUL, _UNARY, _AS, _POW, _PRIMARY = range(12)

_BIN_LEVEL = {"or": _OR, "and": _AND, "=": _CMP, "!=": _CMP, "<": _CMP,
              "<=": _CMP, ">": _CMP, ">=": _CMP, "+": _ADD, "-": _ADD,
              "*": _MUL, "/": _MUL, "^": _POW}


def unparse(node) -> str:
    return _render(node, _WITH)


def _level(node) -> int:
    if isinstance(node, WithBinding):
        return _WITH
    if isinstance(node, (Clause, Aggregation)):
        return _CLAUSE
    if isinstance(node, Binary):
        return _BIN_LEVEL[node.op]
    if isinstance(node, Unary):
        return _NOT if node.op == "not" else _UNARY
    if isinstance(node, (Between, PatternMatch, InList)):
        return _CMP
    if isinstance(node, AsUnit):
        return _AS
    return _PRIMARY


def _render(node, min_level: int) -> str:
    text = _render_bare(node)
    if _level(node) < min_level:
        return f"({text})"
    return text


def _render_bare(node) -> str:
    if isinstance(node, Literal):
        if node.kind == "number":
            return _fmt_number(node.value)
        if node.kind == "boolean":
            return "true" if node.value else "false"
        if node.kind == "pattern":
            return _render_pattern(node.value)
        return _quote(node.value)
    if isinstance(node, DurationLiteral):
        return f"{_fmt_number(node.amount)} {_unit_word(node.amount, node.unit)}"
    if isinstance(node, TimeMarker):
        return f"#{node.which}"
    if isinstance(node, VariableRef):
        return node.name
    if isinstance(node, ElementQuery):
        return _render_element(node)
    if isinstance(node, Binary):
        lvl = _BIN_LEVEL[node.op]
        if node.op == "^":
            return f"{_render(node.lhs, _PRIMARY)} ^ {_render(node.rhs, _UNARY)}"
        if lvl == _CMP:  # comparisons do not chain
            return f"{_render(node.lhs, lvl + 1)} {node.op} {_render(node.rhs, lvl + 1)}"
        return f"{_render(node.lhs, lvl)} {node.op} {_render(node.rhs, lvl + 1)}"
    if isinstance(node, Unary):
        if node.op == "not":
            return f"not {_render(node.operand, _NOT)}"
        return f"-{_render(node.operand, _UNARY)}"
    if isinstance(node, Case):
        parts = ["case"]
        for cond, result in node.whens:
            parts.append(f"when {_render(cond, _WITH)} then {_render(result, _WITH)}")
        if node.orelse is not None:
            parts.append(f"else {_render(node.orelse, _WITH)}")
        parts.append("end")
        return " ".join(parts)
    if isinstance(node, Between):
        return (f"{_render(node.operand, _ADD)} between "
                f"{_render(node.low, _ADD)} and {_render(node.high, _ADD)}")
    if isinstance(node, PatternMatch):
        return (f"{_render(node.operand, _ADD)} {node.relation} "
                f"{_render_pattern(node.pattern)}")
    if isinstance(node, InList):
        items = ", ".join(_render_bare(i) for i in node.items)
        return f"{_render(node.operand, _ADD)} in ({items})"
    if isinstance(node, FunctionCall):
        args = ", ".join(_render(a, _WITH) for a in node.args)
        return f"{node.name}({args})"
    if isinstance(node, Aggregation):
        return _render_aggregation(node)
    if isinstance(node, Clause):
        target_min = _CLAUSE + 1 if isinstance(node.target, Aggregation) else _CLAUSE
        return f"{_render(node.target, target_min)} {_render_clause_tail(node.kind, node.arg)}"
    if isinstance(node, WithBinding):
        return (f"{_render(node.body, _WITH)} with {node.name} as "
                f"{_render(node.expr, _CLAUSE)}")
    if isinstance(node, AsUnit):
        return f"{_render(node.expr, _POW)} as {node.unit}"
    raise TypeError(f"cannot unparse {type(node).__name__}")


def _render_aggregation(node: Aggregation) -> str:
    parts = [node.fn]
    if node.mode:
        parts.append(node.mode)
    parts.append(_render(node.target, _ADD))
    if node.window is not None:
        parts.append(_render_window(node.window))
    for clause in node.clauses:
        parts.append(_render_clause_tail(clause.kind, clause.arg))
    if node.timestep is not None:
        parts.append(_render_timestep(node.timestep))
    return " ".join(parts)


def _render_window(w: Window) -> str:
    if w.form == "range":
        return f"from {_render(w.start, _ADD)} to {_render(w.end, _ADD)}"
    if w.form == "before":
        return f"before {_render(w.end, _ADD)}"
    if w.form == "after":
        return f"after {_render(w.start, _ADD)}"
    return f"at {_render(w.start, _ADD)}"


def _render_timestep(ts) -> str:
    if isinstance(ts, RegularTimestep):
        out = f"every {_render_bare(ts.period)}"
        if ts.start is not None:
            out += f" from {_render(ts.start, _ADD)} to {_render(ts.end, _ADD)}"
        return out
    if isinstance(ts, AtEveryTimestep):
        out = f"at every {_render(ts.expr, _ADD)}"
        if ts.start is not None:
            out += f" from {_render(ts.start, _ADD)} to {_render(ts.end, _ADD)}"
        return out
    if isinstance(ts, AtListTimestep):
        items = ", ".join(_quote(r) for r in ts.raw)
        return f"at [{items}]"
    raise TypeError(f"unknown timestep {type(ts).__name__}")


def _render_clause_tail(kind: str, arg) -> str:
    if kind == "where":
        return f"where {_render(arg, _OR)}"
    if kind == "impute":
        if isinstance(arg, str):
            return f"impute {arg}"
        return f"impute {_render(arg, _OR)}"
    if kind == "carry":
        return f"carry {_render_bare(arg)}"
    edges, labels = arg
    edge_txt = ", ".join(_fmt_edge(e) for e in edges)
    label_txt = ", ".join(_quote(l) for l in labels)
    return f"cut bins [{edge_txt}] named [{label_txt}]"


_BARE_OPERAND = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_ ().-]*$")


def _render_element(eq: ElementQuery) -> str:
    parts = []
    for k, c in enumerate(eq.criteria):
        if (k == 0 and c.field == "name" and c.relation == "equals"
                and _safe_shorthand(c.operand)):
            parts.append(c.operand)
            continue
        parts.append(_render_criterion(c))
    return "{" + "; ".join(parts) + "}"


def _safe_shorthand(name) -> bool:
    return (isinstance(name, str) and name != "" and name == name.strip()
            and not any(ch in name for ch in "'\";{}")
            and not _FIELD_RE.match(name))


def _render_criterion(c) -> str:
    if c.relation == "equals":
        op = c.operand
        if _BARE_OPERAND.fullmatch(op) and op == op.strip():
            return f"{c.field} = {op}"
        return f"{c.field} = {_quote(op)}"
    if c.relation == "in":
        items = ", ".join(i if i.isdigit() else _quote(i) for i in c.operand)
        return f"{c.field} in ({items})"
    return f"{c.field} {c.relation} {_render_pattern(c.operand)}"


def _render_pattern(p: Pattern) -> str:
    if p.kind == "regex":
        return f"/{p.text}/{'i' if p.case_insensitive() else ''}"
    return _quote(p.text)


def _quote(s: str) -> str:
    body = s.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{body}'"


def _fmt_number(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_edge(e: float) -> str:
    if e == float("inf"):
        return "inf"
    if e == float("-inf"):
        return "-inf"
    return _fmt_number(e)


def _unit_word(amount: float, unit: str) -> str:
    if amount == 1:
        return unit[:-1]  # "1 day", "1 hour"
    return unit
