"""Index-backed evaluator for the SELECT subset over a KnowledgeGraph."""

from __future__ import annotations

from typing import Iterable, Optional, Union

from ..errors import EvalError
from ..frontend.ast import And, Compare, Exists, FilterExpr, Not, NotExists, Or, QueryAst, TriplePattern
from ..frontend.parser import parse_query
from ..model import UNBOUND, KnowledgeGraph, ResultSet, Term, TermKind, Value, merge_bindings

Binding = dict[str, Value]


def match_pattern(g: KnowledgeGraph, p: TriplePattern) -> list[Binding]:
    """Bindings for one pattern; a variable repeated inside it must agree."""
    s, pr, o = (None if t.is_variable else t for t in p)
    out = []
    for triple in g.match(s, pr, o):
        b: Binding = {}
        ok = True
        for qt, dt in zip(p, triple):
            if not qt.is_variable:
                continue
            prev = b.get(qt.var_name)
            if prev is not None and prev.key != dt.key:
                ok = False
                break
            b[qt.var_name] = dt
        if ok:
            out.append(b)
    return out


def hash_join(left: list[Binding], right: list[Binding], shared: Iterable[str]) -> list[Binding]:
    shared = list(shared)
    if not shared:
        return [{**lb, **rb} for lb in left for rb in right]
    index: dict[tuple, list[Binding]] = {}
    for rb in right:
        index.setdefault(tuple(rb[v].key for v in shared), []).append(rb)
    out = []
    for lb in left:
        for rb in index.get(tuple(lb[v].key for v in shared), ()):
            out.append({**lb, **rb})
    return out


def left_join(left: list[Binding], right: list[Binding], shared: Iterable[str]) -> list[Binding]:
    shared = list(shared)
    index: dict[tuple, list[Binding]] = {}
    for rb in right:
        index.setdefault(tuple(rb[v].key for v in shared), []).append(rb)
    out = []
    for lb in left:
        if all(lb.get(v, UNBOUND) is not UNBOUND for v in shared):
            merged = [{**lb, **rb} for rb in index.get(tuple(lb[v].key for v in shared), ())]
        else:
            merged = [m for rb in right if (m := merge_bindings(lb, rb)) is not None]
        out.extend(merged or [lb])
    return out


def join_patterns(g: KnowledgeGraph, patterns: Iterable[TriplePattern]) -> list[Binding]:
    rows: list[Binding] = [{}]
    bound: set[str] = set()
    for p in patterns:
        matches = match_pattern(g, p)
        names = set(p.variables())
        rows = hash_join(rows, matches, sorted(bound & names))
        bound |= names
        if not rows:
            break
    return rows


def _value(term: Term, row: Binding) -> Value:
    return row.get(term.var_name, UNBOUND) if term.is_variable else term


def _compare(op: str, a: Value, b: Value) -> bool:
    if a is UNBOUND or b is UNBOUND:
        return False
    if op == "=":
        return a.key == b.key
    if op == "!=":
        return a.key != b.key
    a_num = a.kind is TermKind.NUMBER
    if a_num != (b.kind is TermKind.NUMBER):
        raise EvalError(f"cannot order {a.render()} against {b.render()}")
    x, y = (a.value, b.value) if a_num else (a.lexical, b.lexical)
    if op == "<":
        return x < y
    if op == "<=":
        return x <= y
    if op == ">":
        return x > y
    return x >= y


def eval_filter(e: FilterExpr, row: Binding) -> bool:
    if isinstance(e, Exists):
        return row.get(e.term.var_name, UNBOUND) is not UNBOUND
    if isinstance(e, NotExists):
        return row.get(e.term.var_name, UNBOUND) is UNBOUND
    if isinstance(e, And):
        return eval_filter(e.left, row) and eval_filter(e.right, row)
    if isinstance(e, Or):
        return eval_filter(e.left, row) or eval_filter(e.right, row)
    if isinstance(e, Not):
        return not eval_filter(e.operand, row)
    if isinstance(e, Compare):
        return _compare(e.op, _value(e.lhs, row), _value(e.rhs, row))
    raise EvalError(f"unknown filter expression {e!r}")


def eval_sparql(g: KnowledgeGraph, query: Union[QueryAst, str]) -> ResultSet:
    ast = parse_query(query) if isinstance(query, str) else query
    rows = join_patterns(g, ast.patterns)
    bound = {v for p in ast.patterns for v in p.variables()}
    for block in ast.optional_blocks:
        names = {v for p in block for v in p.variables()}
        rows = left_join(rows, join_patterns(g, block), sorted(bound & names))
        bound |= names
    if ast.filter is not None:
        rows = [r for r in rows if eval_filter(ast.filter, r)]
    mods = ast.modifiers
    if mods.order_by is not None:
        var = mods.order_by.variable
        rows.sort(key=lambda r: r.get(var, UNBOUND).order_key, reverse=mods.order_by.descending)
    if mods.offset:
        rows = rows[mods.offset:]
    if mods.limit is not None:
        rows = rows[:mods.limit]
    variables = ast.projected_variables()
    projected = [{v: r.get(v, UNBOUND) for v in variables} for r in rows]
    return ResultSet(variables, projected, ordered=mods.order_by is not None)


class SparqlEngine:
    """Callable wrapper holding a graph; safe for concurrent reads."""

    def __init__(self, graph: KnowledgeGraph):
        self.graph = graph

    def execute(self, query: Union[QueryAst, str]) -> ResultSet:
        return eval_sparql(self.graph, query)

    def count(self, pattern: Optional[TriplePattern] = None) -> int:
        if pattern is None:
            return len(self.graph)
        return len(match_pattern(self.graph, pattern))
