from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from polykg.engines import PipelineEngine, bindings_from_rows, eval_sparql
from polykg.engines.pipeline import matches, resolve
from polykg.engines.sparql import hash_join, join_patterns, match_pattern
from polykg.errors import EvalError, MissingProjection, UnknownCollection
from polykg.frontend import parse_query, print_query
from polykg.frontend.ast import TriplePattern
from polykg.model import UNBOUND, KnowledgeGraph, ResultSet, Term, Triple, same_results
from polykg.testing import random_graph, random_translatable_query
from polykg.translate import MqlPipeline

seeds = st.integers(0, 2**32 - 1)


def _graph(seed: int) -> KnowledgeGraph:
    return random_graph(random.Random(seed), max_triples=60, functional=False)


# -- direct evaluator -----------------------------------------------------------------


def test_repeated_variable_within_a_pattern():
    g = KnowledgeGraph([
        Triple(Term.name("a"), Term.name("p"), Term.name("a")),
        Triple(Term.name("a"), Term.name("p"), Term.name("b")),
    ])
    x = Term.variable("x")
    assert match_pattern(g, TriplePattern(x, Term.name("p"), x)) == [{"x": Term.name("a")}]


def test_optional_leaves_unbound(mini_kg):
    graph, _ = mini_kg
    rs = eval_sparql(graph, "SELECT ?s ?m WHERE { ?s UNII ?u . OPTIONAL { ?s marker ?m } }")
    assert rs.rows == [{"s": Term.name("CISPLATIN"), "m": UNBOUND}]


def test_cross_type_ordering_raises(mini_kg):
    graph, _ = mini_kg
    with pytest.raises(EvalError):
        eval_sparql(graph, 'SELECT ?v WHERE { Table_1326 ID ?v . FILTER(?v < "x") }')
    rs = eval_sparql(graph, 'SELECT ?v WHERE { Table_1326 ID ?v . FILTER(?v != "305") }')
    assert len(rs) == 1


@settings(max_examples=100, deadline=None)
@given(seeds, seeds)
def test_join_is_commutative(graph_seed, query_seed):
    g = _graph(graph_seed)
    rng = random.Random(query_seed)
    q = random_translatable_query(rng, g, allow_filter=False, allow_modifiers=False)
    left = join_patterns(g, q.patterns)
    right = join_patterns(g, reversed(q.patterns))
    variables = sorted({v for p in q.patterns for v in p.variables()})
    as_rs = lambda rows: ResultSet(variables, rows)  # noqa: E731
    assert same_results(as_rs(left), as_rs(right))


@settings(max_examples=100, deadline=None)
@given(seeds, seeds)
def test_optional_is_a_superset_of_required(graph_seed, query_seed):
    g = _graph(graph_seed)
    rng = random.Random(query_seed)
    q = random_translatable_query(rng, g, allow_filter=False, allow_modifiers=False)
    required = eval_sparql(g, q)
    extra = random.Random(query_seed).choice(["link0", "label0", "num0"])
    head, tail = print_query(q).rsplit("}", 1)
    var = q.variables()[0]
    loose = eval_sparql(g, f"{head} OPTIONAL {{ ?{var} {extra} ?extra_opt }} }}{tail}")
    assert len(loose) >= len(required)
    kept = ResultSet(required.variables, [{v: r[v] for v in required.variables} for r in loose.rows])
    assert set(kept.keys()) == set(required.keys())


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(0, 8), st.integers(0, 8))
def test_limit_offset_laws(seed, limit, offset):
    g = _graph(seed)
    base = "SELECT ?s ?o WHERE { ?s link0 ?o . } ORDER BY ASC(?s)"
    full = eval_sparql(g, base)
    page = eval_sparql(g, f"{base} LIMIT {limit} OFFSET {offset}")
    assert len(page) == max(0, min(limit, len(full) - offset))
    assert [r["s"] for r in page] == [r["s"] for r in full.rows[offset:offset + limit]]


# -- pipeline engine ------------------------------------------------------------------


def test_resolve_flattens_arrays_and_greedy_keys():
    row = {"a": [{"b": [1, 2]}, {"b": [3]}], "x.y": ["dotted"]}
    assert resolve(row, "a.b") == [1, 2, 3]
    assert resolve(row, "x.y") == ["dotted"]
    assert resolve(row, "missing.path") == []


@pytest.mark.parametrize(
    "body,expected",
    [
        ({"n": 5}, True),
        ({"n": {"$gt": 4, "$lt": 6}}, True),
        ({"n": {"$gt": "4"}}, False),
        ({"n": {"$in": [1, 5]}}, True),
        ({"tag": "a"}, True),
        ({"tag": {"$ne": "a"}}, False),
        ({"gone": {"$exists": False}}, True),
        ({"$or": [{"n": 1}, {"tag": "b"}]}, True),
        ({"$nor": [{"n": 5}]}, False),
        ({"$not": {"n": 5}}, False),
        ({"n": {"$not": {"$gt": 10}}}, True),
        ({"$expr": {"$eq": ["$n", "$m"]}}, True),
        ({"$expr": {"$lt": ["$tag", "$n"]}}, False),
    ],
)
def test_match_operators(body, expected):
    row = {"subject_id": "s", "n": [Term.number(5)], "m": [Term.number(5.0)], "tag": [Term.string("a"), Term.name("b")]}
    assert matches(row, body) is expected


def test_lookup_preserves_collection_order(mini_kg):
    _, docs = mini_kg
    engine = PipelineEngine(docs)
    rows = engine.aggregate([
        {"$match": {"subject_id": "CISPLATIN"}},
        {"$lookup": {"from": "kg", "localField": "FDA_Code", "foreignField": "subject_id", "as": "j"}},
    ])
    assert [d["subject_id"] for d in rows[0]["j"]] == ["Table_1326"]


def test_unknown_collection(mini_kg):
    _, docs = mini_kg
    with pytest.raises(UnknownCollection):
        PipelineEngine(docs).aggregate(MqlPipeline("other", (MqlPipeline.from_list([{"$match": {}}]).stages)))


def test_bindings_from_rows_expands_arrays():
    rs = bindings_from_rows([{"x": ["a", "b"], "y": 1}], ["x", "y"])
    assert rs.rows == [
        {"x": Term.name("a"), "y": Term.number(1)},
        {"x": Term.name("b"), "y": Term.number(1)},
    ]
    assert bindings_from_rows([{"x": []}], ["x"]).rows == []
    with pytest.raises(MissingProjection):
        bindings_from_rows([{"y": 1}], ["x"])


def test_projection_keeps_name_and_string_with_same_text():
    docs_rows = [{"subject_id": "s", "p": [Term.name("e1"), Term.string("e1")]}]
    engine = PipelineEngine({"kg": docs_rows})
    rs = engine.execute([{"$match": {}}, {"$project": {"o": "$p"}}])
    assert len(rs) == 2
