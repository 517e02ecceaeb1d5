import random
import string

import pytest

from tempoql.errors import ParseError
from tempoql.lang import complete, extract_subqueries, parse, tokenize, unparse
from tempoql.lang.nodes import (
    Aggregation,
    AsUnit,
    Between,
    Binary,
    Case,
    Clause,
    DurationLiteral,
    ElementQuery,
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
    ast_equal,
    walk,
)


def roundtrip(q: str):
    ast = parse(q)
    text = unparse(ast)
    ast2 = parse(text)
    assert ast_equal(ast, ast2), f"{q!r} -> {text!r} changed structure"
    return ast


# --- tokenizer ---------------------------------------------------------------

def test_tokenize_aggregation_shape():
    kinds = [(t.kind, t.value) for t in tokenize("mean x every 4 h")]
    assert kinds == [("aggfn", "mean"), ("ident", "x"), ("keyword", "every"),
                     ("number", 4.0), ("unit", "hours"), ("eof", None)]


def test_tokenize_element_shorthand():
    toks = tokenize("{Gender}")
    assert toks[0].kind == "element"
    criteria, shorthand = toks[0].value
    assert shorthand is True
    assert criteria[0].field == "name"
    assert criteria[0].relation == "equals"
    assert criteria[0].operand == "Gender"


def test_tokenize_regex_literal():
    toks = tokenize(r"x contains /resp\w* rate/i")
    rx = [t for t in toks if t.kind == "regex"]
    assert len(rx) == 1
    assert rx[0].value.text == r"resp\w* rate"
    assert rx[0].value.flags == "i"


def test_slash_is_division_after_values():
    toks = tokenize("(temp - 32) * 5 / 9")
    assert not any(t.kind == "regex" for t in toks)


def test_unterminated_inputs_raise_with_span():
    for bad in ["'oops", "/never closed", "{Gender"]:
        with pytest.raises(ParseError) as exc:
            tokenize(bad)
        start, end = exc.value.span
        assert 0 <= start <= end <= len(bad)


def test_months_are_rejected_with_hint():
    with pytest.raises(ParseError) as exc:
        tokenize("x carry 2 months")
    assert "days" in (exc.value.hint or "")


def test_element_with_slash_in_name():
    toks = tokenize("{Cardioversion/Defibrillation; scope = procedureevents}")
    criteria, _ = toks[0].value
    assert criteria[0].operand == "Cardioversion/Defibrillation"
    assert criteria[1].field == "scope"


def test_element_in_list_with_numbers():
    toks = tokenize("{scope = observations; id in (220210, 3337)}")
    criteria, _ = toks[0].value
    assert criteria[1].field == "id"
    assert criteria[1].operand == ["220210", "3337"]


def test_criterion_relation_rules():
    with pytest.raises(ParseError):
        tokenize("{scope in (a, b)}")
    with pytest.raises(ParseError):
        tokenize("{value contains /x/}")
    with pytest.raises(ParseError):
        tokenize("{type = blob}")


# --- parser ------------------------------------------------------------------

def test_parse_aki_query_shape():
    ast = parse("exists aki_outcome after semaglutide_rx")
    assert isinstance(ast, Aggregation)
    assert ast.fn == "exists"
    assert isinstance(ast.target, VariableRef)
    assert ast.window.form == "after"
    assert isinstance(ast.window.start, VariableRef)
    assert ast.timestep is None


def test_parse_windowed_mean_with_timestep():
    ast = parse("mean {Heart Rate} from #now - 8 hours to #now every 1 day")
    assert isinstance(ast, Aggregation)
    assert ast.window.form == "range"
    assert isinstance(ast.timestep, RegularTimestep)
    assert ast.timestep.period.ms == 86_400_000
    lo = ast.window.start
    assert isinstance(lo, Binary) and lo.op == "-"
    assert isinstance(lo.lhs, TimeMarker) and lo.lhs.which == "now"
    assert isinstance(lo.rhs, DurationLiteral) and lo.rhs.ms == 8 * 3_600_000


def test_parse_error_on_malformed_window():
    with pytest.raises(ParseError) as exc:
        parse("min x from to")
    start, end = exc.value.span
    assert "min x from to".index("to") == start
    assert "expression" in str(exc.value)


def test_precedence_arithmetic():
    ast = parse("a + b * c")
    assert isinstance(ast, Binary) and ast.op == "+"
    assert isinstance(ast.rhs, Binary) and ast.rhs.op == "*"


def test_precedence_clauses_left_assoc():
    ast = parse("x where p impute q")
    assert isinstance(ast, Clause) and ast.kind == "impute"
    assert isinstance(ast.target, Clause) and ast.target.kind == "where"


def test_as_unit_binds_tighter_than_additive():
    ast = parse("({Admit Time} - {Anchor Year}) as years + {Anchor Age}")
    assert isinstance(ast, Binary) and ast.op == "+"
    assert isinstance(ast.lhs, AsUnit)


def test_in_aggregation_clauses_stay_inside():
    ast = parse("mean x from #now - 4 h to #now impute mean every 4 h")
    assert isinstance(ast, Aggregation)
    assert [c.kind for c in ast.clauses] == ["impute"]
    assert ast.clauses[0].arg == "mean"
    assert isinstance(ast.timestep, RegularTimestep)


def test_case_requires_end():
    with pytest.raises(ParseError):
        parse("case when a then b")
    ast = parse("case when a then b end")
    assert isinstance(ast, Case)
    assert ast.orelse is None


def test_cut_label_count_must_match():
    with pytest.raises(ParseError):
        parse("x cut bins [0, 10, 20] named ['lo']")
    with pytest.raises(ParseError):
        parse("x cut bins [10, 0] named ['lo']")
    with pytest.raises(ParseError):
        parse("x cut bins [0, inf, 20] named ['a', 'b']")


def test_min_call_vs_min_aggregation():
    call = parse("min(a, b)")
    assert call.__class__.__name__ == "FunctionCall"
    agg = parse("min (a) from x to y")
    assert isinstance(agg, Aggregation)


def test_with_binding_chain_binds_left():
    ast = parse("x with a as 1 with b as 2")
    assert isinstance(ast, WithBinding) and ast.name == "b"
    assert isinstance(ast.body, WithBinding) and ast.body.name == "a"


def test_between_keeps_following_and():
    ast = parse("x between 1 and 5 and ok")
    assert isinstance(ast, Binary) and ast.op == "and"
    assert isinstance(ast.lhs, Between)


def test_spans_nest_for_every_node():
    q = ("(exists aki_outcome from first_rx to first_rx + 90 days) "
         "where (not exists aki_outcome before first_rx) "
         "with first_rx as (first starttime(semaglutide_rx) from #mintime to #maxtime)")
    ast = parse(q)

    def check(node, outer):
        s, e = node.span
        assert outer[0] <= s <= e <= outer[1], f"{type(node).__name__} span {node.span} outside {outer}"
        for child in walk(node):
            if child is node:
                continue
            cs, ce = child.span
            assert s <= cs <= ce <= e
    check(ast, (0, len(q)))


def test_parse_never_crashes_on_garbage():
    rng = random.Random(1234)
    alphabet = string.printable
    for _ in range(400):
        s = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 60)))
        try:
            parse(s)
        except ParseError:
            pass  # the only acceptable failure


def test_deep_nesting_does_not_crash():
    with pytest.raises(ParseError):
        parse("(" * 5000 + "x" + ")" * 5000)


# --- unparse -----------------------------------------------------------------

def test_unparse_canonical_spacing():
    assert unparse(parse("temp>45")) == "temp > 45"


def test_unparse_parenthesizes_embedded_aggregations():
    text = unparse(parse("temp - (mean temp from #now - 8 h to #now at every temp)"))
    assert text.startswith("temp - (mean")
    roundtrip(text)


def test_roundtrip_drops_no_structure_random_asts():
    rng = random.Random(99)
    for _ in range(200):
        ast = _random_expr(rng, depth=0)
        text = unparse(ast)
        ast2 = parse(text)
        assert ast_equal(ast, ast2), text


def _random_expr(rng, depth):
    leaf_choices = [
        lambda: Literal(kind="number", value=float(rng.randrange(0, 100))),
        lambda: Literal(kind="text", value=rng.choice(["a b", "x'y", "plain"])),
        lambda: VariableRef(name=rng.choice(["alpha", "beta", "t0"])),
        lambda: TimeMarker(which=rng.choice(["now", "mintime", "maxtime", "value"])),
        lambda: (lambda n: DurationLiteral(ms=n * 3_600_000, amount=n, unit="hours"))(
            rng.choice([1, 2, 4, 24])),
        lambda: ElementQuery(criteria=[_random_criterion(rng)], shorthand=False),
    ]
    if depth >= 4:
        return rng.choice(leaf_choices)()
    roll = rng.random()
    if roll < 0.35:
        return rng.choice(leaf_choices)()
    if roll < 0.55:
        op = rng.choice(["+", "-", "*", "/", "or", "and", "=", "<", "^"])
        return Binary(op=op, lhs=_random_expr(rng, depth + 1),
                      rhs=_random_expr(rng, depth + 1))
    if roll < 0.62:
        return Unary(op=rng.choice(["not", "neg"]), operand=_random_expr(rng, depth + 1))
    if roll < 0.70:
        return Case(whens=[(_random_expr(rng, depth + 1), _random_expr(rng, depth + 1))],
                    orelse=_random_expr(rng, depth + 1) if rng.random() < 0.5 else None)
    if roll < 0.78:
        return Aggregation(
            fn=rng.choice(["mean", "count", "exists", "first", "count distinct"]),
            mode=None,
            target=_random_expr(rng, depth + 1),
            window=Window(form="range",
                          start=_random_expr(rng, depth + 1),
                          end=_random_expr(rng, depth + 1)),
            clauses=[],
            timestep=RegularTimestep(
                period=DurationLiteral(ms=4 * 3_600_000, amount=4, unit="hours"))
            if rng.random() < 0.5 else None)
    if roll < 0.86:
        return Clause(kind="where", target=_random_expr(rng, depth + 1),
                      arg=_random_expr(rng, depth + 1))
    if roll < 0.92:
        return WithBinding(name=rng.choice(["u", "v"]),
                           expr=_random_expr(rng, depth + 1),
                           body=_random_expr(rng, depth + 1))
    if roll < 0.96:
        return Between(operand=_random_expr(rng, depth + 1),
                       low=_random_expr(rng, depth + 1),
                       high=_random_expr(rng, depth + 1))
    return PatternMatch(relation=rng.choice(["contains", "startswith"]),
                        operand=_random_expr(rng, depth + 1),
                        pattern=Pattern("regex", rng.choice([r"\d+", "abc", "a|b"]),
                                        rng.choice(["", "i"])))


def _random_criterion(rng):
    from tempoql.lang.nodes import ElementCriterion
    kind = rng.random()
    if kind < 0.5:
        return ElementCriterion("name", "equals",
                                rng.choice(["Heart Rate", "O2 Device(s)", "a'b"]))
    if kind < 0.75:
        return ElementCriterion("name", "in", ["A B", "c"])
    return ElementCriterion("scope", "equals", "Lab")


# --- completion ---------------------------------------------------------------

def test_complete_keyword():
    assert complete("mean x fr", 9) == ["from"]


def test_complete_empty_input_offers_aggregations_and_elements():
    out = complete("", 0)
    assert "case" in out and "{" in out
    assert {"mean", "sum", "exists"} <= set(out)


def test_complete_concepts_inside_braces(icu_small):
    out = complete("{Respir", 7, icu_small.catalog())
    assert "Respiratory Rate" in out
    assert all(o.lower().startswith("respir") for o in out)


def test_complete_is_safe_on_garbage():
    assert isinstance(complete("%%%@@!!", 5), list)


# --- subqueries ----------------------------------------------------------------

def test_subqueries_of_temperature_query():
    q = ("(case when temp > 45 then (temp - 32) * 5 / 9 else temp end "
         "where #value between 20 and 50) with temp as {Body temperature; scope = LOINC}")
    subs = extract_subqueries(parse(q))
    labels = [type(node).__name__ for _, node in subs]
    assert len(subs) == 3
    assert labels[0] == "ElementQuery"
    assert labels[1] == "VariableRef"  # the binding itself
    # the with-binding body (the filtered case expression) comes last
    assert subs[2][1].span[0] <= subs[0][0][0] or subs[2][1].span != subs[0][0]


def test_single_element_query_is_its_own_subquery():
    subs = extract_subqueries(parse("{Gender}"))
    assert len(subs) == 1


def test_subquery_count_matches_node_census():
    rng = random.Random(7)
    for _ in range(100):
        ast = _random_expr(rng, depth=1)
        subs = extract_subqueries(ast)
        # independent census by direct tree walk
        expected = _census(ast, set())
        assert len(subs) == expected


def _census(node, seen_names) -> int:
    from tempoql.lang.nodes import Node

    count = 0
    if isinstance(node, WithBinding):
        count += _census(node.expr, seen_names)
        if node.name not in seen_names:
            seen_names.add(node.name)
            count += 1
        count += 1  # the body entry
        count += _census(node.body, seen_names)
        return count
    if isinstance(node, VariableRef):
        if node.name not in seen_names:
            seen_names.add(node.name)
            return 1
        return 0
    if isinstance(node, ElementQuery):
        return 1
    if isinstance(node, Aggregation):
        count += 1
        count += _census(node.target, seen_names)
        if node.window is not None:
            for part in (node.window.start, node.window.end):
                if part is not None:
                    count += _census(part, seen_names)
        for cl in node.clauses:
            if isinstance(cl.arg, Node):
                count += _census(cl.arg, seen_names)
        ts = node.timestep
        if isinstance(ts, RegularTimestep):
            for part in (ts.start, ts.end):
                if part is not None:
                    count += _census(part, seen_names)
        return count
    if isinstance(node, Binary):
        return _census(node.lhs, seen_names) + _census(node.rhs, seen_names)
    if isinstance(node, Unary):
        return _census(node.operand, seen_names)
    if isinstance(node, Case):
        for c, r in node.whens:
            count += _census(c, seen_names) + _census(r, seen_names)
        if node.orelse is not None:
            count += _census(node.orelse, seen_names)
        return count
    if isinstance(node, Between):
        return sum(_census(x, seen_names) for x in (node.operand, node.low, node.high))
    if isinstance(node, (PatternMatch, InList)):
        return _census(node.operand, seen_names)
    if isinstance(node, Clause):
        count += _census(node.target, seen_names)
        from tempoql.lang.nodes import Node as _N
        if isinstance(node.arg, _N):
            count += _census(node.arg, seen_names)
        return count
    if isinstance(node, AsUnit):
        return _census(node.expr, seen_names)
    return 0
