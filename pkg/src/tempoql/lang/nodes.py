"""AST node definitions.

Every node carries a ``span``: (start, end) character offsets into the query
text, with child spans nested inside their parents. Structural equality
(``ast_equal``) ignores spans and display details such as the unit a
duration was written in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Span = tuple

PATTERN_RELATIONS = ("contains", "matches", "startswith", "endswith")
CRITERION_FIELDS = ("name", "id", "scope", "type", "value")


@dataclass
class Pattern:
    """Operand of a pattern relation: a regex literal or a plain string."""

    kind: str  # "regex" | "text"
    text: str  # pattern source (without delimiters) or the literal string
    flags: str = ""

    def case_insensitive(self) -> bool:
        return "i" in self.flags.lower()


@dataclass
class ElementCriterion:
    field: str          # name | id | scope | type | value
    relation: str       # equals | in | contains | matches | startswith | endswith
    operand: Union[str, list, Pattern]
    span: Span = (0, 0)


@dataclass
class Node:
    span: Span = field(default=(0, 0), kw_only=True)


@dataclass
class Literal(Node):
    kind: str           # number | text | boolean
    value: object = None


@dataclass
class DurationLiteral(Node):
    ms: int = 0
    amount: float = 0.0   # as written, for display
    unit: str = "hours"


@dataclass
class TimeMarker(Node):
    which: str = "now"    # now | mintime | maxtime | value


@dataclass
class VariableRef(Node):
    name: str = ""


@dataclass
class ElementQuery(Node):
    criteria: list = field(default_factory=list)
    shorthand: bool = False


@dataclass
class Binary(Node):
    op: str = "+"
    lhs: Node = None
    rhs: Node = None


@dataclass
class Unary(Node):
    op: str = "neg"       # neg | not
    operand: Node = None


@dataclass
class Case(Node):
    whens: list = field(default_factory=list)  # [(cond, result), ...]
    orelse: Optional[Node] = None


@dataclass
class Between(Node):
    operand: Node = None
    low: Node = None
    high: Node = None


@dataclass
class PatternMatch(Node):
    relation: str = "contains"
    operand: Node = None
    pattern: Pattern = None


@dataclass
class InList(Node):
    operand: Node = None
    items: list = field(default_factory=list)  # Literal nodes


@dataclass
class FunctionCall(Node):
    name: str = ""
    args: list = field(default_factory=list)


@dataclass
class Window(Node):
    form: str = "range"   # range | before | after | at
    start: Optional[Node] = None
    end: Optional[Node] = None


@dataclass
class RegularTimestep(Node):
    period: DurationLiteral = None
    start: Optional[Node] = None
    end: Optional[Node] = None


@dataclass
class AtEveryTimestep(Node):
    expr: Node = None
    start: Optional[Node] = None
    end: Optional[Node] = None


@dataclass
class AtListTimestep(Node):
    times: list = field(default_factory=list)  # epoch ms integers
    raw: list = field(default_factory=list)    # as written, for display


@dataclass
class AggClause(Node):
    """A where/impute/carry/cut written inside an aggregation, applied to
    the aggregated series in source order, before any outer operators."""

    kind: str = "where"
    arg: object = None    # predicate | strategy | DurationLiteral | (edges, labels)


@dataclass
class Aggregation(Node):
    fn: str = "count"
    mode: Optional[str] = None        # rate | amount | duration | value (intervals)
    target: Node = None
    window: Optional[Window] = None
    clauses: list = field(default_factory=list)   # AggClause list
    timestep: Optional[Node] = None   # Regular/AtEvery/AtList or None (whole trajectory)


@dataclass
class Clause(Node):
    kind: str = "where"   # where | impute | carry | cut
    target: Node = None
    arg: object = None    # as in AggClause


@dataclass
class WithBinding(Node):
    name: str = ""
    expr: Node = None
    body: Node = None


@dataclass
class AsUnit(Node):
    expr: Node = None
    unit: str = "hours"


AGG_FUNCTIONS = [
    "sum", "mean", "median", "min", "max", "first", "last",
    "any", "all", "all nonnull", "exists", "exists nonnull",
    "count", "count distinct", "count distinct nonnull", "count nonnull",
    "integral",
]

INTERVAL_MODES = ["rate", "amount", "duration", "value"]

BUILTIN_FUNCTIONS = [
    "time", "type", "start", "end", "starttime", "endtime", "duration",
    "intervals", "union", "assign", "extract", "abs", "max", "min",
]


def _semantic_fields(node):
    if isinstance(node, Literal):
        return (node.kind, node.value)
    if isinstance(node, DurationLiteral):
        return (node.ms,)
    if isinstance(node, TimeMarker):
        return (node.which,)
    if isinstance(node, VariableRef):
        return (node.name,)
    if isinstance(node, ElementQuery):
        return (tuple(_criterion_key(c) for c in node.criteria),)
    if isinstance(node, Binary):
        return (node.op, node.lhs, node.rhs)
    if isinstance(node, Unary):
        return (node.op, node.operand)
    if isinstance(node, Case):
        return (tuple(node.whens), node.orelse)
    if isinstance(node, Between):
        return (node.operand, node.low, node.high)
    if isinstance(node, PatternMatch):
        return (node.relation, node.operand, _pattern_key(node.pattern))
    if isinstance(node, InList):
        return (node.operand, tuple(node.items))
    if isinstance(node, FunctionCall):
        return (node.name, tuple(node.args))
    if isinstance(node, Window):
        return (node.form, node.start, node.end)
    if isinstance(node, RegularTimestep):
        return (node.period, node.start, node.end)
    if isinstance(node, AtEveryTimestep):
        return (node.expr, node.start, node.end)
    if isinstance(node, AtListTimestep):
        return (tuple(node.times),)
    if isinstance(node, AggClause) or isinstance(node, Clause):
        parts = [node.kind]
        if isinstance(node, Clause):
            parts.append(node.target)
        arg = node.arg
        if isinstance(arg, tuple) and node.kind == "cut":
            parts.append((tuple(arg[0]), tuple(arg[1])))
        else:
            parts.append(arg)
        return tuple(parts)
    if isinstance(node, Aggregation):
        return (node.fn, node.mode, node.target, node.window,
                tuple(node.clauses), node.timestep)
    if isinstance(node, WithBinding):
        return (node.name, node.expr, node.body)
    if isinstance(node, AsUnit):
        return (node.expr, node.unit)
    return (node,)


def _criterion_key(c: ElementCriterion):
    op = c.operand
    if isinstance(op, Pattern):
        op = _pattern_key(op)
    elif isinstance(op, list):
        op = tuple(op)
    return (c.field, c.relation, op)


def _pattern_key(p: Pattern):
    return (p.kind, p.text, "i" if p.case_insensitive() else "")


def ast_equal(a, b) -> bool:
    """Structural equality, ignoring spans and presentation details."""
    if type(a) is not type(b):
        return False
    if not isinstance(a, Node):
        if isinstance(a, (tuple, list)):
            return len(a) == len(b) and all(ast_equal(x, y) for x, y in zip(a, b))
        return a == b
    fa, fb = _semantic_fields(a), _semantic_fields(b)
    return len(fa) == len(fb) and all(ast_equal(x, y) for x, y in zip(fa, fb))


def walk(node):
    """Yield every Node in the tree, parents before children."""
    if not isinstance(node, Node):
        return
    yield node
    for part in _semantic_fields(node):
        for item in _iter_nodes(part):
            yield from walk(item)


def _iter_nodes(part):
    if isinstance(part, Node):
        yield part
    elif isinstance(part, (tuple, list)):
        for p in part:
            yield from _iter_nodes(p)
