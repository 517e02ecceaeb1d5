"""Tree-walking query evaluation against a dataset.

Evaluation is deterministic and per-trajectory independent (the only
cross-trajectory state is the impute mean/median population statistic).
Every inspectable subcomponent's intermediate series is captured for the
profiling sidebar, in ``extract_subqueries`` order.

Name resolution: with-bindings shadow stored queries; bare names that match
neither are errors. Stored queries are parsed and evaluated on first use,
memoized for the run, with reference cycles detected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EvalError, ParseError, QueryTypeError, TempoQLError
from ..lang import parse
from ..lang.nodes import (
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
    Node,
    PatternMatch,
    RegularTimestep,
    TimeMarker,
    Unary,
    VariableRef,
    WithBinding,
)
from ..lang.subqueries import extract_subqueries, subquery_label
from ..series import (
    AttributeSeries,
    EventSeries,
    IntervalSeries,
    TimeSeries,
    broadcast_op,
    series_kind,
)
from ..values import (
    BOOLEAN,
    DURATION,
    MISSING,
    NUMBER,
    TEXT,
    TIMESTAMP,
    T_NEG_INF,
    T_POS_INF,
    Value,
    ValueVector,
    boolean,
    convert_duration,
    duration,
    number,
    text,
    vector_neg,
    vector_not,
)
from . import builtins as bi
from .aggregate import Windows, aggregate, aggregate_intervals
from .clauses import (
    aligned_values,
    apply_carry,
    apply_cut,
    apply_impute,
    apply_where,
)
from .timesteps import (
    TimestepFrame,
    at_every_frame,
    at_list_frame,
    regular_frame,
    whole_trajectory_frame,
)

_BUILTINS = {
    "time": bi.fn_time, "type": bi.fn_type, "start": bi.fn_start, "end": bi.fn_end,
    "starttime": bi.fn_starttime, "endtime": bi.fn_endtime, "duration": bi.fn_duration,
    "intervals": bi.fn_intervals, "assign": bi.fn_assign, "abs": bi.fn_abs,
}


@dataclass
class SubqueryCapture:
    span: tuple
    label: str
    series: object
    plan: object = None


@dataclass
class QueryResult:
    result: object
    subqueries: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    query_text: str = ""


def evaluate(query, dataset, store=None) -> QueryResult:
    """Evaluate query text or a parsed AST against a dataset.

    ``store`` maps names to query text; references resolve lazily with
    cycle detection.
    """
    return Evaluator(dataset, store).run(query)


class Evaluator:
    def __init__(self, dataset, store=None):
        self.dataset = dataset
        self.store = dict(store) if store else {}
        self.diagnostics: list[str] = []
        self.captures: dict[int, object] = {}
        self.plans: dict[int, object] = {}
        self.name_values: dict[str, object] = {}
        self._store_memo: dict[str, object] = {}
        self._store_stack: list[str] = []

    # -- public -------------------------------------------------------------

    def run(self, query) -> QueryResult:
        if isinstance(query, str):
            ast = parse(query)
            text_repr = query
        else:
            ast, text_repr = query, ""
        result = self.eval(ast, {})
        if isinstance(result, Value):
            result = AttributeSeries(
                self.dataset.index, ValueVector.filled(result, len(self.dataset.index)))
        subs = []
        for span, node in extract_subqueries(ast):
            series = None
            if isinstance(node, VariableRef):
                series = self.name_values.get(node.name)
            else:
                series = self.captures.get(id(node))
            if series is None:
                continue
            if isinstance(series, Value):
                series = AttributeSeries(
                    self.dataset.index, ValueVector.filled(series, len(self.dataset.index)))
            subs.append(SubqueryCapture(
                span=span, label=subquery_label(node), series=series,
                plan=self.plans.get(id(node))))
        return QueryResult(result=result, subqueries=subs,
                           diagnostics=list(self.diagnostics), query_text=text_repr)

    # -- dispatch -----------------------------------------------------------

    def eval(self, node: Node, env: dict):
        try:
            out = self._eval(node, env)
        except (EvalError, ParseError):
            raise
        except TempoQLError as exc:
            raise EvalError(str(exc), span=node.span) from exc
        return out

    def _eval(self, node: Node, env: dict):
        if isinstance(node, Literal):
            if node.kind == "number":
                return number(node.value)
            if node.kind == "boolean":
                return boolean(node.value)
            if node.kind == "pattern":
                raise EvalError("a /regex/ literal is only valid as a pattern argument",
                                node.span)
            return text(node.value)
        if isinstance(node, DurationLiteral):
            return duration(node.ms)
        if isinstance(node, TimeMarker):
            return self._eval_marker(node, env)
        if isinstance(node, VariableRef):
            return self._eval_name(node, env)
        if isinstance(node, ElementQuery):
            return self._eval_element(node)
        if isinstance(node, Binary):
            lhs = self.eval(node.lhs, env)
            rhs = self.eval(node.rhs, env)
            return broadcast_op(node.op, lhs, rhs)
        if isinstance(node, Unary):
            operand = self.eval(node.operand, env)
            return self._eval_unary(node.op, operand)
        if isinstance(node, Case):
            return self._eval_case(node, env)
        if isinstance(node, Between):
            x = self.eval(node.operand, env)
            lo = self.eval(node.low, env)
            hi = self.eval(node.high, env)
            ge = broadcast_op(">=", x, lo)
            le = broadcast_op("<=", x, hi)
            return broadcast_op("and", ge, le)
        if isinstance(node, PatternMatch):
            return self._eval_pattern(node, env)
        if isinstance(node, InList):
            return self._eval_inlist(node, env)
        if isinstance(node, FunctionCall):
            return self._eval_call(node, env)
        if isinstance(node, Aggregation):
            out = self._eval_aggregation(node, env)
            self.captures[id(node)] = out
            return out
        if isinstance(node, Clause):
            target = self.eval(node.target, env)
            return self._apply_clause(node.kind, node.arg, target, env, node.span)
        if isinstance(node, WithBinding):
            bound = self.eval(node.expr, env)
            self.name_values.setdefault(node.name, bound)
            inner = dict(env)
            inner[node.name] = bound
            out = self.eval(node.body, inner)
            self.captures[id(node.body)] = out
            return out
        if isinstance(node, AsUnit):
            return self._eval_as_unit(node, env)
        raise EvalError(f"cannot evaluate {type(node).__name__}", node.span)

    # -- leaves ---------------------------------------------------------------

    def _eval_marker(self, node: TimeMarker, env: dict):
        if node.which == "value":
            if "#value" not in env:
                raise EvalError("#value is only available inside a where predicate",
                                node.span)
            return env["#value"]
        if node.which == "now":
            if "#now" not in env:
                raise EvalError("#now is only available inside aggregation bounds",
                                node.span)
            return env["#now"]
        arr = self.dataset.mintime if node.which == "mintime" else self.dataset.maxtime
        vec = ValueVector.from_timestamps(
            np.where(self.dataset.observed, arr, 0), ~self.dataset.observed)
        return AttributeSeries(self.dataset.index, vec, name=f"#{node.which}")

    def _eval_name(self, node: VariableRef, env: dict):
        if node.name in env:
            val = env[node.name]
            self.name_values.setdefault(node.name, val)
            return val
        if node.name in self.store:
            val = self._eval_store(node.name, node.span)
            self.name_values.setdefault(node.name, val)
            return val
        raise EvalError(f"unknown name {node.name!r} (not a binding or stored query)",
                        node.span)

    def _eval_store(self, name: str, span):
        if name in self._store_memo:
            return self._store_memo[name]
        if name in self._store_stack:
            chain = " -> ".join(self._store_stack + [name])
            raise EvalError(f"stored queries reference each other in a cycle: {chain}",
                            span)
        self._store_stack.append(name)
        try:
            try:
                ast = parse(self.store[name])
            except ParseError as exc:
                raise EvalError(f"stored query {name!r} does not parse: {exc}", span)
            val = self.eval(ast, {})
        finally:
            self._store_stack.pop()
        self._store_memo[name] = val
        return val

    def _eval_element(self, node: ElementQuery):
        from ..dataset.resolve import resolve_elements
        plan, series = resolve_elements(self.dataset, node.criteria)
        self.captures[id(node)] = series
        self.plans[id(node)] = plan
        return series

    def _eval_unary(self, op: str, operand):
        if isinstance(operand, Value):
            from ..values import apply_neg, apply_not
            return apply_not(operand) if op == "not" else apply_neg(operand)
        fn = vector_not if op == "not" else vector_neg
        return operand.with_values(fn(operand.values))

    def _eval_case(self, node: Case, env: dict):
        conds = [self.eval(c, env) for c, _ in node.whens]
        results = [self.eval(r, env) for _, r in node.whens]
        orelse = self.eval(node.orelse, env) if node.orelse is not None else MISSING
        template, vectors = align_operands(conds + results + [orelse])
        if template is None:
            for c, r in zip(conds, results):
                if c.is_missing():
                    continue
                if c.kind != BOOLEAN:
                    raise QueryTypeError(f"case condition must be boolean, got {c.kind}")
                if c.payload:
                    return r
            return orelse
        k = len(node.whens)
        cond_vecs = vectors[:k]
        result_vecs = vectors[k:2 * k]
        else_vec = vectors[2 * k]
        n = len(template)
        out = else_vec.to_values()
        decided = np.zeros(n, dtype=bool)
        for cv, rv in zip(cond_vecs, result_vecs):
            truthy = cv.is_truthy()
            take = truthy & ~decided
            for i in np.flatnonzero(take):
                out[i] = rv.get(i)
            decided |= truthy
        # rows where every condition was false/missing and no else: missing
        return template.with_values(ValueVector.from_values(out))

    def _eval_pattern(self, node: PatternMatch, env: dict):
        operand = self.eval(node.operand, env)
        test = _compile_relation(node.relation, node.pattern)

        def one(v: Value) -> Value:
            if v.is_missing():
                return MISSING
            if v.kind != TEXT:
                raise QueryTypeError(
                    f"{node.relation} needs text values, got {v.kind}")
            return boolean(test(v.payload))

        if isinstance(operand, Value):
            return one(operand)
        return operand.with_values(
            ValueVector.from_values([one(v) for v in operand.values.to_values()]))

    def _eval_inlist(self, node: InList, env: dict):
        operand = self.eval(node.operand, env)
        wanted_text = {i.value for i in node.items if i.kind == "text"}
        wanted_num = {float(i.value) for i in node.items if i.kind == "number"}

        def one(v: Value) -> Value:
            if v.is_missing():
                return MISSING
            if v.kind == TEXT:
                return boolean(v.payload in wanted_text)
            if v.kind == NUMBER:
                return boolean(v.payload in wanted_num)
            raise QueryTypeError(f"'in' needs text or number values, got {v.kind}")

        if isinstance(operand, Value):
            return one(operand)
        return operand.with_values(
            ValueVector.from_values([one(v) for v in operand.values.to_values()]))

    def _eval_call(self, node: FunctionCall, env: dict):
        name = node.name
        if name == "extract":
            if len(node.args) not in (2, 3):
                raise EvalError("extract() takes (expr, pattern[, group])", node.span)
            target = self.eval(node.args[0], env)
            pat_node = node.args[1]
            if not (isinstance(pat_node, Literal) and pat_node.kind == "pattern"):
                raise EvalError("extract() needs a /regex/ literal as its second argument",
                                pat_node.span if isinstance(pat_node, Node) else node.span)
            index = 1
            if len(node.args) == 3:
                g = node.args[2]
                if not (isinstance(g, Literal) and g.kind == "number"):
                    raise EvalError("extract() group must be a number literal", node.span)
                index = int(g.value)
            return bi.fn_extract([target], self.diagnostics,
                                 pattern=pat_node.value, index=index)
        if name == "union":
            if len(node.args) < 2:
                raise EvalError("union() needs at least two arguments", node.span)
            parts = [self.eval(a, env) for a in node.args]
            return bi.union_series(parts)
        if name in ("min", "max"):
            args = [self.eval(a, env) for a in node.args]
            return bi.fn_minmax(name, args, self.diagnostics)
        fn = _BUILTINS.get(name)
        if fn is None:
            raise EvalError(f"unknown function {name!r}", node.span)
        args = [self.eval(a, env) for a in node.args]
        return fn(args, self.diagnostics)

    def _eval_as_unit(self, node: AsUnit, env: dict):
        operand = self.eval(node.expr, env)
        if isinstance(operand, Value):
            return convert_duration(operand, node.unit)
        vals = [convert_duration(v, node.unit) for v in operand.values.to_values()]
        return operand.with_values(ValueVector.from_values(vals))

    # -- clauses --------------------------------------------------------------

    def _apply_clause(self, kind: str, arg, target, env: dict, span):
        if kind == "where":
            pred_env = dict(env)
            pred_env["#value"] = target
            predicate = self.eval(arg, pred_env)
            return apply_where(target, predicate, self.diagnostics)
        if kind == "impute":
            strategy = arg if isinstance(arg, str) else self.eval(arg, env)
            return apply_impute(target, strategy, self.diagnostics)
        if kind == "carry":
            return apply_carry(target, arg.ms, self.diagnostics)
        if kind == "cut":
            edges, labels = arg
            return apply_cut(target, edges, labels, self.diagnostics)
        raise EvalError(f"unknown clause {kind!r}", span)

    # -- aggregation ------------------------------------------------------------

    def _eval_aggregation(self, node: Aggregation, env: dict):
        target = self.eval(node.target, env)
        if isinstance(target, (Value, AttributeSeries)):
            raise EvalError(
                f"aggregation target must be events, intervals, or a time series, "
                f"got {series_kind(target)}", node.target.span)
        mode = node.mode
        if isinstance(target, IntervalSeries):
            mode = mode or "value"
        elif mode is not None:
            raise EvalError(
                f"interval mode {mode!r} is only valid for interval targets",
                node.span)

        frame = self._timestep_frame(node.timestep, env)
        self.diagnostics.extend(frame.diagnostics)
        windows = self._windows(node.window, frame, env)

        if isinstance(target, IntervalSeries):
            values = aggregate_intervals(node.fn, target, mode, windows, frame.traj)
        else:
            values = aggregate(node.fn, target, windows, frame.traj)

        if frame.whole_trajectory:
            n = len(self.dataset.index)
            out_vals = [MISSING] * n
            for pos, code in enumerate(frame.traj):
                out_vals[int(code)] = values.get(pos)
            result = AttributeSeries(self.dataset.index, ValueVector.from_values(out_vals))
        else:
            result = TimeSeries(self.dataset.index, frame.traj, frame.times, values,
                                provenance=frame.provenance, presorted=True)
        for clause in node.clauses:
            result = self._apply_clause(clause.kind, clause.arg, result, env, clause.span)
        return result

    # -- timesteps & windows ------------------------------------------------------

    def _timestep_frame(self, ts, env: dict) -> TimestepFrame:
        n = len(self.dataset.index)
        if ts is None:
            return whole_trajectory_frame(self.dataset.maxtime, self.dataset.observed,
                                          provenance="whole-trajectory")
        prov = unparse_timestep_safe(ts)
        if isinstance(ts, RegularTimestep):
            starts, ends, valid = self._timestep_bounds(ts.start, ts.end, env)
            return regular_frame(starts, ends, valid, ts.period.ms, prov)
        if isinstance(ts, AtEveryTimestep):
            anchor = self.eval(ts.expr, env)
            if not isinstance(anchor, (EventSeries, TimeSeries)):
                raise EvalError(
                    f"'at every' needs an events series, got {series_kind(anchor)}",
                    ts.expr.span)
            clip = None
            if ts.start is not None:
                clip = self._timestep_bounds(ts.start, ts.end, env)
            return at_every_frame(anchor.traj, anchor.times, clip, prov)
        if isinstance(ts, AtListTimestep):
            return at_list_frame(n, ts.times, prov)
        raise EvalError(f"unknown timestep form {type(ts).__name__}")

    def _timestep_bounds(self, start_node, end_node, env: dict):
        starts, svalid = self._per_trajectory_time(start_node, env, default="mintime")
        ends, evalid = self._per_trajectory_time(end_node, env, default="maxtime")
        return starts, ends, svalid & evalid

    def _per_trajectory_time(self, node, env: dict, default: str):
        """Evaluate an expression to one timestamp per trajectory."""
        n = len(self.dataset.index)
        if node is None:
            arr = self.dataset.mintime if default == "mintime" else self.dataset.maxtime
            return arr.copy(), self.dataset.observed.copy()
        val = self.eval(node, env)
        if isinstance(val, Value):
            if val.is_missing():
                return np.zeros(n, np.int64), np.zeros(n, bool)
            if val.kind != TIMESTAMP:
                raise EvalError(f"timestep bound must be a timestamp, got {val.kind}",
                                node.span)
            return np.full(n, val.payload, np.int64), np.ones(n, bool)
        vec, valid = self._collapse_per_trajectory(val, node.span)
        return vec, valid

    def _collapse_per_trajectory(self, series, span):
        """One timestamp per trajectory from an attribute or row series
        (first row wins, with a diagnostic when collapsing)."""
        n = len(self.dataset.index)
        out = np.zeros(n, np.int64)
        valid = np.zeros(n, bool)
        if isinstance(series, AttributeSeries):
            vec = series.values
            for i in range(n):
                v = vec.get(i)
                if v.is_missing():
                    continue
                if v.kind != TIMESTAMP:
                    raise EvalError(
                        f"expected timestamps per trajectory, got {v.kind}", span)
                out[i] = v.payload
                valid[i] = True
            return out, valid
        if isinstance(series, (EventSeries, TimeSeries, IntervalSeries)):
            collapsed = 0
            seen = set()
            use_starts = isinstance(series, IntervalSeries)
            for pos in range(len(series)):
                code = int(series.traj[pos])
                if code in seen:
                    collapsed += 1
                    continue
                if use_starts:
                    # an interval used as a bound stands for its start time
                    seen.add(code)
                    out[code] = series.starts[pos]
                    valid[code] = True
                    continue
                v = series.values.get(pos)
                if v.is_missing():
                    continue
                if v.kind != TIMESTAMP:
                    raise EvalError(
                        f"expected timestamps per trajectory, got {v.kind}", span)
                seen.add(code)
                out[code] = v.payload
                valid[code] = True
            if collapsed:
                self.diagnostics.append(
                    f"trajectory bound expression had multiple rows per trajectory; "
                    f"used the first ({collapsed} extra row(s) ignored)")
            return out, valid
        raise EvalError("cannot use this series as a per-trajectory bound", span)

    def _windows(self, window, frame: TimestepFrame, env: dict) -> Windows:
        m = len(frame)
        if window is None:
            return Windows(np.full(m, T_NEG_INF, np.int64),
                           np.full(m, T_POS_INF, np.int64),
                           np.zeros(m, bool))
        now_template = TimeSeries(
            self.dataset.index, frame.traj, frame.times,
            ValueVector.from_timestamps(frame.times),
            provenance=frame.provenance, presorted=True)
        wenv = dict(env)
        wenv["#now"] = now_template

        def bound(expr_node, fill):
            if expr_node is None:
                return np.full(m, fill, np.int64), np.zeros(m, bool)
            val = self.eval(expr_node, wenv)
            return self._per_timestep_times(val, frame, expr_node.span)

        if window.form == "range":
            ws, ws_missing = bound(window.start, T_NEG_INF)
            we, we_missing = bound(window.end, T_POS_INF)
            return Windows(ws, we, ws_missing | we_missing)
        if window.form == "before":
            we, missing = bound(window.end, T_POS_INF)
            return Windows(np.full(m, T_NEG_INF, np.int64), we, missing)
        if window.form == "after":
            ws, missing = bound(window.start, T_NEG_INF)
            return Windows(ws + 1, np.full(m, T_POS_INF, np.int64), missing)
        if window.form == "at":
            t, missing = bound(window.start, 0)
            return Windows(t, t, missing, point=True)
        raise EvalError(f"unknown window form {window.form!r}")

    def _per_timestep_times(self, val, frame: TimestepFrame, span):
        """One timestamp per timestep row."""
        m = len(frame)
        if isinstance(val, Value):
            if val.is_missing():
                return np.zeros(m, np.int64), np.ones(m, bool)
            if val.kind != TIMESTAMP:
                raise EvalError(f"window bound must be a timestamp, got {val.kind}", span)
            return np.full(m, val.payload, np.int64), np.zeros(m, bool)
        if isinstance(val, TimeSeries):
            if len(val) != m or not (val.traj == frame.traj).all() \
                    or not (val.times == frame.times).all():
                raise EvalError("window bound is not aligned to the timesteps", span)
            vec = val.values
            if vec.kind != TIMESTAMP and not vec.missing.all():
                raise EvalError(f"window bound must be a timestamp, got {vec.kind}", span)
            data = vec.data.astype(np.int64) if vec.kind == TIMESTAMP \
                else np.zeros(m, np.int64)
            return data, vec.missing.copy()
        if isinstance(val, (AttributeSeries, EventSeries, IntervalSeries)):
            if isinstance(val, AttributeSeries):
                per_traj, valid = self._attribute_times(val, span)
            else:
                per_traj, valid = self._collapse_per_trajectory(val, span)
            return per_traj[frame.traj], ~valid[frame.traj]
        raise EvalError("cannot use this value as a window bound", span)

    def _attribute_times(self, attr: AttributeSeries, span):
        n = len(self.dataset.index)
        out = np.zeros(n, np.int64)
        valid = np.zeros(n, bool)
        vec = attr.values
        for i in range(n):
            v = vec.get(i)
            if v.is_missing():
                continue
            if v.kind != TIMESTAMP:
                raise EvalError(f"window bound must be a timestamp, got {v.kind}", span)
            out[i] = v.payload
            valid[i] = True
        return out, valid


def _compile_relation(relation: str, pattern):
    from ..dataset.resolve import _pattern_test
    return _pattern_test(relation, pattern)


def unparse_timestep_safe(ts) -> str:
    from ..lang.unparse import _render_timestep
    try:
        return _render_timestep(ts)
    except Exception:
        return type(ts).__name__


def align_operands(operands: list):
    """Align scalars/attributes/row series to a common template.

    Returns (template_series_or_None, vectors). A None template means all
    operands are scalar Values (returned unchanged).
    """
    template = None
    rank = -1
    for op in operands:
        r = 0 if isinstance(op, Value) else (1 if isinstance(op, AttributeSeries) else 2)
        if r > rank:
            template, rank = (None if r == 0 else op), r
    if template is None:
        return None, operands
    vectors = [aligned_values(template, op) for op in operands]
    return template, vectors
