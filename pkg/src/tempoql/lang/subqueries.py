"""Enumeration of a query's inspectable subcomponents.

The profiling sidebar shows intermediate results for element queries,
variable references, with-binding bodies, and aggregation expressions. This
module fixes their order: binding expressions come before the binding name,
bindings before the body, aggregations before their own children, and each
distinct variable/binding name appears once.
"""

from __future__ import annotations

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
    ElementQuery,
    FunctionCall,
    InList,
    Node,
    PatternMatch,
    RegularTimestep,
    Unary,
    VariableRef,
    Window,
    WithBinding,
)
from .unparse import unparse


def subquery_label(node: Node, max_len: int = 60) -> str:
    if isinstance(node, VariableRef):
        return node.name
    text = unparse(node)
    if len(text) > max_len:
        return text[: max_len - 1] + "…"
    return text


def extract_subqueries(ast: Node) -> list[tuple[tuple, Node]]:
    """Return (span, node) pairs in evaluation/display order.

    Included nodes: every ElementQuery, the first reference to each distinct
    variable or binding name, every with-binding (expression subqueries
    first, then an entry for the binding itself, then the body), and every
    Aggregation (before its children).
    """
    out: list[tuple[tuple, Node]] = []
    seen_names: set[str] = set()

    def visit(node):
        if not isinstance(node, Node):
            return
        if isinstance(node, WithBinding):
            visit(node.expr)
            if node.name not in seen_names:
                seen_names.add(node.name)
                out.append((node.expr.span, VariableRef(name=node.name, span=node.expr.span)))
            out.append((node.body.span, node.body))
            visit(node.body)
            return
        if isinstance(node, VariableRef):
            if node.name not in seen_names:
                seen_names.add(node.name)
                out.append((node.span, node))
            return
        if isinstance(node, ElementQuery):
            out.append((node.span, node))
            return
        if isinstance(node, Aggregation):
            out.append((node.span, node))
            visit(node.target)
            if node.window is not None:
                visit(node.window.start)
                visit(node.window.end)
            for clause in node.clauses:
                _visit_clause_arg(clause.arg, visit)
            _visit_timestep(node.timestep, visit)
            return
        for child in _children(node):
            visit(child)

    visit(ast)
    return out


def _visit_clause_arg(arg, visit):
    if isinstance(arg, Node):
        visit(arg)


def _visit_timestep(ts, visit):
    if isinstance(ts, RegularTimestep):
        visit(ts.start)
        visit(ts.end)
    elif isinstance(ts, AtEveryTimestep):
        visit(ts.expr)
        visit(ts.start)
        visit(ts.end)


def _children(node):
    if isinstance(node, Binary):
        return (node.lhs, node.rhs)
    if isinstance(node, Unary):
        return (node.operand,)
    if isinstance(node, Case):
        kids = []
        for cond, result in node.whens:
            kids.extend((cond, result))
        if node.orelse is not None:
            kids.append(node.orelse)
        return tuple(kids)
    if isinstance(node, Between):
        return (node.operand, node.low, node.high)
    if isinstance(node, PatternMatch):
        return (node.operand,)
    if isinstance(node, InList):
        return (node.operand,)
    if isinstance(node, FunctionCall):
        return tuple(node.args)
    if isinstance(node, Clause):
        kids = [node.target]
        if isinstance(node.arg, Node):
            kids.append(node.arg)
        return tuple(kids)
    if isinstance(node, AsUnit):
        return (node.expr,)
    if isinstance(node, (Window, AggClause, AtListTimestep)):
        return ()
    return ()
