"""Recursive-descent parser.

Precedence, loosest to tightest::

    with-binding
    clause operators (where / impute / carry / cut), left-associative
    or
    and
    not
    comparison, between, in, pattern relations (non-associative)
    + -
    * /
    unary minus, aggregation prefix
    as <unit> (postfix)
    ^ (right-associative)
    calls, element queries, case, parentheses

An aggregation is a prefix form ``fn [mode] target [bounds] [clauses]
[timestep]`` whose target and bound expressions sit at the additive level,
so ``mean temp - 32 from ...`` aggregates ``temp - 32``; parenthesize the
aggregation to operate on its result.

The parser never aborts the process: any input yields an AST or a
``ParseError`` carrying a span and the token set that was expected there.
While scanning, every keyword that *could* have continued the query at the
furthest point reached is recorded; editors use that set for completion.
"""

from __future__ import annotations

from ..errors import ParseError
from ..values import MS
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
    PatternMatch,
    RegularTimestep,
    TimeMarker,
    Unary,
    VariableRef,
    Window,
    WithBinding,
)
from .tokens import Token, tokenize

_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
_PATTERN_RELATIONS = ("contains", "matches", "startswith", "endswith")
_CLAUSE_KEYWORDS = ("where", "impute", "carry", "cut")

_PRIMARY_EXPECTED = [
    "number", "string", "identifier", "(", "{", "case",
    "#now", "#mintime", "#maxtime", "#value", "true", "false", "-",
]


def parse(text: str):
    """Parse query text into an AST; raises ParseError on any failure."""
    try:
        parser = _Parser(text)
        node = parser.parse_query()
        return node
    except ParseError:
        raise
    except RecursionError:
        raise ParseError("query is nested too deeply", (0, len(text))) from None
    except Exception as exc:  # defensive: arbitrary input must never crash
        raise ParseError(f"could not parse query: {exc}", (0, len(text))) from exc


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[Token] = tokenize(text)
        self.pos = 0
        # token index -> keywords that would have been accepted there
        self.candidates: dict[int, set] = {}

    # -- token plumbing ----------------------------------------------------

    def cur(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_kw(self, *words: str) -> bool:
        tok = self.cur()
        return tok.kind == "keyword" and tok.value in words

    def accept_kw(self, *words: str):
        if self.at_kw(*words):
            return self.advance()
        self.candidates.setdefault(self.pos, set()).update(words)
        return None

    def expect_kw(self, word: str) -> Token:
        tok = self.accept_kw(word)
        if tok is None:
            self.fail(f"expected '{word}'", [word])
        return tok

    def at_op(self, *ops: str) -> bool:
        tok = self.cur()
        return tok.kind == "op" and tok.text in ops

    def accept_op(self, *ops: str):
        if self.at_op(*ops):
            return self.advance()
        self.candidates.setdefault(self.pos, set()).update(ops)
        return None

    def expect_op(self, op: str) -> Token:
        tok = self.accept_op(op)
        if tok is None:
            self.fail(f"expected '{op}'", [op])
        return tok

    def fail(self, message: str, expected: list[str] | None = None, hint=None):
        tok = self.cur()
        shown = tok.text if tok.kind != "eof" else "end of query"
        exp = set(expected or [])
        exp.update(self.candidates.get(self.pos, set()))
        raise ParseError(f"{message}, found {shown!r}", tok.span, sorted(exp), hint)

    def span_from(self, start_pos: int) -> tuple:
        first = self.toks[start_pos].span[0]
        last = self.toks[max(self.pos - 1, start_pos)].span[1]
        return (first, last)

    # -- grammar -----------------------------------------------------------

    def parse_query(self):
        node = self.parse_with()
        if self.cur().kind != "eof":
            self.fail("unexpected input after query")
        return node

    def parse_with(self):
        start = self.pos
        node = self.parse_clause()
        while self.accept_kw("with"):
            name_tok = self.cur()
            if name_tok.kind not in ("ident", "unit"):
                self.fail("expected a binding name after 'with'", ["identifier"])
            self.advance()
            self.expect_kw("as")
            expr = self.parse_clause()
            node = WithBinding(name=name_tok.text, expr=expr, body=node,
                               span=self.span_from(start))
        return node

    def parse_clause(self):
        start = self.pos
        node = self.parse_or()
        while True:
            kind, arg = self._clause_tail()
            if kind is None:
                return node
            node = Clause(kind=kind, target=node, arg=arg, span=self.span_from(start))

    def _clause_tail(self):
        """Parse one clause operator if present; shared with aggregations."""
        if self.accept_kw("where"):
            return "where", self.parse_or()
        if self.accept_kw("impute"):
            return "impute", self._impute_arg()
        if self.accept_kw("carry"):
            return "carry", self._duration_literal("carry")
        if self.accept_kw("cut"):
            return "cut", self._cut_args()
        return None, None

    def _impute_arg(self):
        tok = self.cur()
        if tok.kind == "aggfn" and tok.value in ("mean", "median") \
                and not _starts_expression(self.peek(1)):
            self.advance()
            return tok.value
        return self.parse_or()

    def _duration_literal(self, ctx: str) -> DurationLiteral:
        start = self.pos
        num = self.cur()
        if num.kind != "number":
            self.fail(f"expected a duration after '{ctx}'", ["number"])
        self.advance()
        unit = self.cur()
        if unit.kind != "unit":
            self.fail("expected a time unit", sorted({"hours", "days", "minutes",
                                                      "seconds", "weeks", "years"}))
        self.advance()
        ms = round(num.value * MS[unit.value])
        return DurationLiteral(ms=ms, amount=num.value, unit=unit.value,
                               span=self.span_from(start))

    def _cut_args(self):
        self.expect_kw("bins")
        edges_span_start = self.pos
        self.expect_op("[")
        edges: list[float] = []
        while not self.at_op("]"):
            edges.append(self._edge_value())
            if not self.accept_op(","):
                break
        self.expect_op("]")
        edges_span = self.span_from(edges_span_start)
        self.expect_kw("named")
        self.expect_op("[")
        labels: list[str] = []
        while not self.at_op("]"):
            tok = self.cur()
            if tok.kind != "string":
                self.fail("expected a quoted label", ["string"])
            labels.append(tok.value)
            self.advance()
            if not self.accept_op(","):
                break
        self.expect_op("]")
        if len(edges) < 2:
            raise ParseError("cut needs at least two bin edges", edges_span)
        if len(labels) != len(edges) - 1:
            raise ParseError(
                f"cut with {len(edges)} edges needs {len(edges) - 1} labels, got {len(labels)}",
                self.span_from(edges_span_start))
        for i in range(1, len(edges)):
            if not edges[i] > edges[i - 1]:
                raise ParseError("cut edges must be strictly increasing", edges_span)
        for e in edges[1:-1]:
            if e in (float("inf"), float("-inf")):
                raise ParseError("inf/-inf are only allowed as the outermost edges",
                                 edges_span)
        return (edges, labels)

    def _edge_value(self) -> float:
        neg = bool(self.accept_op("-"))
        tok = self.cur()
        if tok.kind == "number":
            self.advance()
            return -tok.value if neg else tok.value
        if tok.kind == "ident" and tok.norm == "inf":
            self.advance()
            return float("-inf") if neg else float("inf")
        self.fail("expected a number or inf in bin edges", ["number", "inf"])

    def parse_or(self):
        start = self.pos
        node = self.parse_and()
        while self.accept_kw("or"):
            rhs = self.parse_and()
            node = Binary(op="or", lhs=node, rhs=rhs, span=self.span_from(start))
        return node

    def parse_and(self):
        start = self.pos
        node = self.parse_not()
        while self.accept_kw("and"):
            rhs = self.parse_not()
            node = Binary(op="and", lhs=node, rhs=rhs, span=self.span_from(start))
        return node

    def parse_not(self):
        start = self.pos
        if self.accept_kw("not"):
            operand = self.parse_not()
            return Unary(op="not", operand=operand, span=self.span_from(start))
        return self.parse_comparison()

    def parse_comparison(self):
        start = self.pos
        node = self.parse_additive()
        tok = self.cur()
        if tok.kind == "op" and tok.text in _CMP_OPS:
            self.advance()
            rhs = self.parse_additive()
            return Binary(op=tok.text, lhs=node, rhs=rhs, span=self.span_from(start))
        if self.accept_kw("between"):
            low = self.parse_additive()
            self.expect_kw("and")
            high = self.parse_additive()
            return Between(operand=node, low=low, high=high, span=self.span_from(start))
        if self.at_kw(*_PATTERN_RELATIONS):
            rel = self.advance().value
            pattern = self._pattern_operand()
            return PatternMatch(relation=rel, operand=node, pattern=pattern,
                                span=self.span_from(start))
        if self.accept_kw("in"):
            items = self._literal_list()
            return InList(operand=node, items=items, span=self.span_from(start))
        return node

    def _pattern_operand(self):
        tok = self.cur()
        if tok.kind == "regex":
            self.advance()
            return tok.value
        if tok.kind == "string":
            self.advance()
            from .nodes import Pattern
            return Pattern("text", tok.value)
        self.fail("expected a /regex/ or quoted string pattern", ["regex", "string"])

    def _literal_list(self):
        self.expect_op("(")
        items = []
        while True:
            start = self.pos
            neg = bool(self.accept_op("-"))
            tok = self.cur()
            if tok.kind == "number":
                self.advance()
                items.append(Literal(kind="number", value=-tok.value if neg else tok.value,
                                     span=self.span_from(start)))
            elif tok.kind == "string" and not neg:
                self.advance()
                items.append(Literal(kind="text", value=tok.value, span=self.span_from(start)))
            else:
                self.fail("expected a number or string in list", ["number", "string"])
            if not self.accept_op(","):
                break
        self.expect_op(")")
        return items

    def parse_additive(self):
        start = self.pos
        node = self.parse_multiplicative()
        while self.at_op("+", "-"):
            op = self.advance().text
            rhs = self.parse_multiplicative()
            node = Binary(op=op, lhs=node, rhs=rhs, span=self.span_from(start))
        return node

    def parse_multiplicative(self):
        start = self.pos
        node = self.parse_unary()
        while self.at_op("*", "/"):
            op = self.advance().text
            rhs = self.parse_unary()
            node = Binary(op=op, lhs=node, rhs=rhs, span=self.span_from(start))
        return node

    def parse_unary(self):
        start = self.pos
        if self.accept_op("-"):
            operand = self.parse_unary()
            return Unary(op="neg", operand=operand, span=self.span_from(start))
        tok = self.cur()
        if tok.kind == "aggfn":
            # min/max with a multi-argument call are elementwise functions
            if tok.value in ("min", "max") and self.peek(1).text == "(" \
                    and self._paren_has_comma(self.pos + 1):
                return self.parse_postfix()
            return self.parse_aggregation()
        self.candidates.setdefault(self.pos, set()).update(
            ["sum", "mean", "median", "min", "max", "first", "last", "any",
             "all", "exists", "count", "integral"])
        return self.parse_postfix()

    def _paren_has_comma(self, open_pos: int) -> bool:
        depth = 0
        for i in range(open_pos, len(self.toks)):
            t = self.toks[i]
            if t.kind == "op" and t.text == "(":
                depth += 1
            elif t.kind == "op" and t.text == ")":
                depth -= 1
                if depth == 0:
                    return False
            elif t.kind == "op" and t.text == "," and depth == 1:
                return True
            elif t.kind == "eof":
                return False
        return False

    def parse_postfix(self):
        start = self.pos
        node = self.parse_power()
        while self.accept_kw("as"):
            unit = self.cur()
            if unit.kind != "unit":
                self.fail("expected a time unit after 'as'",
                          ["seconds", "minutes", "hours", "days", "weeks", "years"])
            self.advance()
            node = AsUnit(expr=node, unit=unit.value, span=self.span_from(start))
        return node

    def parse_power(self):
        start = self.pos
        node = self.parse_primary()
        if self.at_op("^"):
            self.advance()
            exponent = self.parse_unary()
            node = Binary(op="^", lhs=node, rhs=exponent, span=self.span_from(start))
        return node

    def parse_primary(self):
        start = self.pos
        tok = self.cur()
        if tok.kind == "number":
            self.advance()
            if self.cur().kind == "unit":
                unit = self.advance()
                return DurationLiteral(ms=round(tok.value * MS[unit.value]),
                                       amount=tok.value, unit=unit.value,
                                       span=self.span_from(start))
            return Literal(kind="number", value=tok.value, span=tok.span)
        if tok.kind == "string":
            self.advance()
            return Literal(kind="text", value=tok.value, span=tok.span)
        if tok.kind == "keyword" and tok.value in ("true", "false"):
            self.advance()
            return Literal(kind="boolean", value=(tok.value == "true"), span=tok.span)
        if tok.kind == "marker":
            self.advance()
            return TimeMarker(which=tok.value, span=tok.span)
        if tok.kind == "element":
            self.advance()
            criteria, shorthand = tok.value
            return ElementQuery(criteria=criteria, shorthand=shorthand, span=tok.span)
        if tok.kind == "regex":
            # regex literals are expressions only as extract() arguments
            self.advance()
            return Literal(kind="pattern", value=tok.value, span=tok.span)
        if tok.kind in ("ident", "unit") or (
                tok.kind == "keyword" and tok.value == "end" and self.peek(1).text == "(") or (
                tok.kind == "aggfn" and tok.value in ("min", "max") and self.peek(1).text == "("):
            self.advance()
            if self.at_op("("):
                args = self._call_args()
                return FunctionCall(name=tok.text.lower(), args=args,
                                    span=self.span_from(start))
            return VariableRef(name=tok.text, span=tok.span)
        if self.at_op("("):
            self.advance()
            node = self.parse_with()
            self.expect_op(")")
            inner = node
            inner.span = self.span_from(start)
            return inner
        if self.at_kw("case"):
            return self.parse_case()
        self.fail("expected an expression", _PRIMARY_EXPECTED + ["case"])

    def _call_args(self):
        self.expect_op("(")
        args = []
        if not self.at_op(")"):
            while True:
                args.append(self.parse_with())
                if not self.accept_op(","):
                    break
        self.expect_op(")")
        return args

    def parse_case(self):
        start = self.pos
        self.expect_kw("case")
        whens = []
        while self.accept_kw("when"):
            cond = self.parse_with()
            self.expect_kw("then")
            result = self.parse_with()
            whens.append((cond, result))
        if not whens:
            self.fail("expected 'when' after 'case'", ["when"])
        orelse = None
        if self.accept_kw("else"):
            orelse = self.parse_with()
        self.expect_kw("end")
        return Case(whens=whens, orelse=orelse, span=self.span_from(start))

    # -- aggregations -------------------------------------------------------

    def parse_aggregation(self):
        start = self.pos
        fn = self.advance().value
        if fn == "count":
            if self.accept_kw("distinct"):
                fn = "count distinct"
            if self.accept_kw("nonnull"):
                fn += " nonnull"
        elif fn in ("exists", "all"):
            if self.accept_kw("nonnull"):
                fn += " nonnull"
        mode = self._interval_mode()
        target = self.parse_additive()
        window = self._window()
        clauses = []
        while True:
            cstart = self.pos
            kind, arg = self._clause_tail()
            if kind is None:
                break
            clauses.append(AggClause(kind=kind, arg=arg, span=self.span_from(cstart)))
        timestep = self._timestep()
        return Aggregation(fn=fn, mode=mode, target=target, window=window,
                           clauses=clauses, timestep=timestep,
                           span=self.span_from(start))

    def _interval_mode(self):
        tok = self.cur()
        word = None
        if tok.kind == "keyword" and tok.value in ("rate", "amount"):
            word = tok.value
        elif tok.kind == "ident" and tok.norm == "value":
            word = "value"
        elif tok.kind == "ident" and tok.norm == "duration" and self.peek(1).text != "(":
            word = "duration"
        if word and _starts_expression(self.peek(1)):
            self.advance()
            return word
        return None

    def _window(self):
        start = self.pos
        if self.accept_kw("from"):
            lo = self.parse_additive()
            self.expect_kw("to")
            hi = self.parse_additive()
            return Window(form="range", start=lo, end=hi, span=self.span_from(start))
        if self.accept_kw("before"):
            t = self.parse_additive()
            return Window(form="before", end=t, span=self.span_from(start))
        if self.accept_kw("after"):
            t = self.parse_additive()
            return Window(form="after", start=t, span=self.span_from(start))
        if self.at_kw("at") and not (
                self.peek(1).kind == "keyword" and self.peek(1).value == "every") \
                and self.peek(1).text != "[":
            self.advance()
            t = self.parse_additive()
            return Window(form="at", start=t, end=t, span=self.span_from(start))
        self.candidates.setdefault(self.pos, set()).update(
            ["from", "before", "after", "at"])
        return None

    def _timestep(self):
        start = self.pos
        if self.accept_kw("every"):
            period = self._duration_literal("every")
            lo, hi = self._timestep_bounds()
            return RegularTimestep(period=period, start=lo, end=hi,
                                   span=self.span_from(start))
        if self.at_kw("at"):
            nxt = self.peek(1)
            if nxt.kind == "keyword" and nxt.value == "every":
                self.advance()
                self.advance()
                expr = self.parse_additive()
                lo, hi = self._timestep_bounds()
                return AtEveryTimestep(expr=expr, start=lo, end=hi,
                                       span=self.span_from(start))
            if nxt.text == "[":
                self.advance()
                return self._at_list(start)
        self.candidates.setdefault(self.pos, set()).update(["every", "at"])
        return None

    def _timestep_bounds(self):
        if self.accept_kw("from"):
            lo = self.parse_additive()
            self.expect_kw("to")
            hi = self.parse_additive()
            return lo, hi
        return None, None

    def _at_list(self, start):
        from ..values import parse_timestamp
        self.expect_op("[")
        times, raw = [], []
        while True:
            tok = self.cur()
            if tok.kind != "string":
                self.fail("expected a quoted ISO-8601 timestamp", ["string"])
            try:
                times.append(parse_timestamp(tok.value))
            except ValueError:
                raise ParseError(f"invalid timestamp {tok.value!r}", tok.span) from None
            raw.append(tok.value)
            self.advance()
            if not self.accept_op(","):
                break
        self.expect_op("]")
        return AtListTimestep(times=times, raw=raw, span=self.span_from(start))


def _starts_expression(tok: Token) -> bool:
    if tok.kind in ("number", "string", "element", "marker", "ident", "unit", "aggfn"):
        return True
    if tok.kind == "op" and tok.text in ("(", "-"):
        return True
    if tok.kind == "keyword" and tok.value in ("case", "not", "true", "false"):
        return True
    return False
