from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import classify_by_definition
from polykg.errors import UnlabelableQuery
from polykg.frontend import parse_query
from polykg.shape import Shape, bfs_levels, build_query_graph, find_source_nodes, has_cycle, label_query, shape_of
from polykg.testing import random_acyclic_patterns


def _label(body: str, tail: str = ""):
    return label_query(parse_query(f"SELECT * WHERE {{ {body} }} {tail}"))


@pytest.mark.parametrize(
    "body,shape",
    [
        ("?x p o .", Shape.SINGLE),
        ("s p ?o .", Shape.SINGLE),
        ("?x p ?a . ?x q ?b .", Shape.SUBJECT_SUBJECT),
        ("?x p ?a . ?a q ?b .", Shape.SUBJECT_OBJECT),
        ("?x p ?a . ?a q ?b . ?b r c .", Shape.SUBJECT_OBJECT),
        ("?x p ?a . ?x q ?b . ?b r c .", Shape.TREE),
        ("?x p ?z . ?y q ?z .", Shape.TREE),
    ],
)
def test_shapes(body, shape):
    assert _label(body).shape is shape


def test_constant_objects_are_separate_nodes():
    # two patterns sharing a constant object do not form a join
    assert _label("?x p c . ?x q c .").shape is Shape.SUBJECT_SUBJECT


def test_flags():
    label = _label("?x p ?y . OPTIONAL { ?y q ?z } FILTER(EXISTS(?y))", "LIMIT 1")
    assert (label.has_modifiers, label.has_optional, label.has_filter) == (True, True, True)
    assert label.shape is Shape.SUBJECT_OBJECT
    assert label.describe() == "subject-object [modifiers, optional, filter]"


def test_cycle_is_unlabelable():
    with pytest.raises(UnlabelableQuery):
        _label("?x p ?y . ?y q ?x .")
    assert has_cycle(build_query_graph(parse_query("SELECT * WHERE { ?x p ?x }")))


def test_bfs_levels():
    g = build_query_graph(parse_query("SELECT * WHERE { ?x p ?a . ?x q ?b . ?b r ?c . }"))
    sources = find_source_nodes(g)
    levels = bfs_levels(g, sources)
    assert [len(level) for level in levels] == [1, 2, 1]
    assert shape_of(g)[0] is Shape.TREE


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bfs_label_matches_definition(seed):
    patterns = random_acyclic_patterns(random.Random(seed))
    shape, sources = shape_of(build_query_graph(patterns))
    assert shape.value == classify_by_definition(patterns)
    assert sources
