from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from polykg.engines import PipelineEngine, eval_sparql
from polykg.errors import UnknownStage, UntranslatableQuery
from polykg.frontend import parse_query
from polykg.model import same_results
from polykg.ntriples import group_by_subject
from polykg.shape import Shape
from polykg.testing import random_graph, random_multivalued_query, random_translatable_query
from polykg.translate import (
    LOOKUP_STEP,
    MqlPipeline,
    MqlStage,
    build_operator_graph,
    is_translatable,
    translate,
)

seeds = st.integers(0, 2**32 - 1)


def _stages(text: str) -> list[dict]:
    return translate(parse_query(text)).to_list()


def test_operator_graph_for_tree():
    og = build_operator_graph(parse_query("SELECT ?c WHERE { ?a p ?b . ?a q ?x . ?b r ?c . }"))
    assert og.join_kind is Shape.TREE
    assert [l.alias for l in og.lookups] == ["join_field"]
    assert og.path_of("c") == "join_field.r"
    assert og.path_of("a") == "subject_id"
    assert [s.role for s in og.pattern_chain].count(LOOKUP_STEP) == 1


def test_second_lookup_uses_numbered_alias():
    stages = _stages("SELECT ?d WHERE { ?a p ?b . ?b q ?c . ?c r ?d . }")
    lookups = [s["$lookup"] for s in stages if "$lookup" in s]
    assert [(l["localField"], l["as"]) for l in lookups] == [("p", "join_field"), ("join_field.q", "join_field2")]
    assert stages[-1] == {"$project": {"d": "$join_field2.r"}}


def test_filter_and_modifiers_emit_in_order():
    stages = _stages('SELECT ?x WHERE { ?x p ?y . FILTER(?y > 2) } ORDER BY DESC(?y) LIMIT 3 OFFSET 1')
    assert stages == [
        {"$match": {"subject_id": {"$exists": True}, "$and": [{"p": {"$exists": True}}, {"p": {"$gt": 2}}]}},
        {"$sort": {"p": -1}},
        {"$skip": 1},
        {"$limit": 3},
        {"$project": {"x": "$subject_id"}},
    ]


def test_repeated_variable_becomes_expr_equality():
    stages = _stages("SELECT ?x WHERE { ?x p ?y . ?x q ?y . }")
    assert stages[0]["$match"]["$expr"] == {"$eq": ["$p", "$q"]}


def test_dollar_strings_are_wrapped_as_literals():
    stages = _stages('SELECT ?x WHERE { ?x p ?y . FILTER("$p" = ?y) }')
    assert {"p": {"$eq": "$p"}} in stages[0]["$match"]["$and"]


@pytest.mark.parametrize(
    "text",
    [
        "SELECT ?x WHERE { ?x p ?y . OPTIONAL { ?y q ?z } }",
        "SELECT ?x WHERE { ?x ?p ?y . }",
        "SELECT ?x WHERE { ?x p ?z . ?y q ?z . }",
    ],
)
def test_untranslatable(text):
    assert not is_translatable(parse_query(text))
    with pytest.raises(UntranslatableQuery):
        translate(parse_query(text))


def test_pipeline_text_round_trip():
    pipeline = translate(parse_query("SELECT ?c WHERE { ?a p ?b . ?b q ?c . }"), collection="docs")
    assert MqlPipeline.from_text(pipeline.to_text()) == pipeline
    assert pipeline.projection() == ["c"]


def test_pipeline_validation():
    with pytest.raises(UnknownStage):
        MqlStage("group", {})
    with pytest.raises(ValueError):
        MqlPipeline("kg", (MqlStage("limit", 1),))


def _agree(graph, query) -> bool:
    expected = eval_sparql(graph, query)
    got = PipelineEngine(group_by_subject(graph)).execute(translate(query))
    order = query.modifiers.order_by
    return same_results(expected, got, ordered=order is not None, order_by=order and order.variable)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_translation_preserves_results(seed):
    rng = random.Random(seed)
    graph = random_graph(rng)
    assert _agree(graph, random_translatable_query(rng, graph))


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_translation_preserves_multivalued_star_results(seed):
    rng = random.Random(seed)
    graph = random_graph(rng, max_triples=80, functional=False)
    assert _agree(graph, random_multivalued_query(rng, graph))
