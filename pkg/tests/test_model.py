from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from polykg.errors import MalformedTerm
from polykg.model import (
    UNBOUND,
    KnowledgeGraph,
    ResultSet,
    Term,
    TermKind,
    Triple,
    graph_insert,
    merge_bindings,
    same_results,
    term_parse,
)

A, B = Term.name("a"), Term.name("b")
P = Term.name("p")


def test_names_and_strings_share_a_join_key():
    assert Term.name("Table_1326").key == Term.string("Table_1326").key
    assert Term.name("Table_1326") != Term.string("Table_1326")
    assert Term.number(5).key != Term.string("5").key


def test_numbers_compare_by_value():
    assert Term.number(2).key == Term.number(2.0).key
    assert Term.number(2).order_key < Term.number(10).order_key
    assert Term.number(10).order_key < Term.string("a").order_key


def test_unbound_sorts_first_and_is_a_singleton():
    import pickle

    assert UNBOUND.order_key < Term.number(-1e9).order_key
    assert pickle.loads(pickle.dumps(UNBOUND)) is UNBOUND


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), True])
def test_number_rejects_non_finite_and_bool(bad):
    with pytest.raises(ValueError):
        Term.number(bad)


def test_variable_name_normalised():
    assert Term.variable("?x") == Term.variable("x")
    assert Term.variable("x").var_name == "x"
    with pytest.raises(MalformedTerm):
        Term.variable("?")
    with pytest.raises(ValueError):
        _ = A.var_name


@pytest.mark.parametrize(
    "text,expected",
    [
        ("CISPLATIN", Term.name("CISPLATIN")),
        ("<http://x.org/a>", Term.name("http://x.org/a")),
        ('"Q20Q"', Term.string("Q20Q")),
        ('"a \\"quoted\\" word"', Term.string('a "quoted" word')),
        ("305", Term.number(305)),
        ("-2.5", Term.number(-2.5)),
        ("?x", Term.variable("x")),
    ],
)
def test_term_parse(text, expected):
    assert term_parse(text) == expected


def test_render_brackets_reserved_words_and_odd_names():
    assert Term.name("select").render() == "<select>"
    assert Term.name("http://x/y").render() == "<http://x/y>"
    assert Term.name("gene_PA356").render() == "gene_PA356"
    assert Term.string("a\nb").render() == '"a\\nb"'


@given(st.text(max_size=30))
def test_string_render_parse_round_trip(text):
    t = Term.string(text)
    assert term_parse(t.render()) == t


def test_term_parse_rejects_iri_with_space():
    with pytest.raises(MalformedTerm):
        term_parse("<http://x.org/a b>")


def test_triple_rejects_variables():
    with pytest.raises(ValueError):
        Triple(Term.variable("x"), P, A)


def test_graph_is_a_set_with_indexes():
    g = KnowledgeGraph([Triple(A, P, B), Triple(A, P, B), Triple(B, P, Term.number(1))])
    assert len(g) == 2
    assert g.by_subject(A) == [Triple(A, P, B)]
    assert g.by_object(Term.number(1)) == [Triple(B, P, Term.number(1))]
    assert len(g.by_predicate(P)) == 2
    assert g.match(None, P, None) and not g.match(B, P, B)
    assert Triple(A, P, B) in g


def test_graph_insert_is_idempotent():
    g = KnowledgeGraph()
    graph_insert(graph_insert(g, Triple(A, P, B)), Triple(A, P, B))
    assert len(g) == 1


def test_match_object_uses_join_key():
    g = KnowledgeGraph([Triple(A, P, Term.string("b"))])
    assert g.match(None, P, B) == [Triple(A, P, Term.string("b"))]


def test_merge_bindings():
    assert merge_bindings({"x": A}, {"y": B}) == {"x": A, "y": B}
    assert merge_bindings({"x": A}, {"x": B}) is None
    assert merge_bindings({"x": UNBOUND}, {"x": B}) == {"x": B}


def _rs(rows, ordered=False):
    return ResultSet(["x"], [{"x": Term.number(v)} for v in rows], ordered)


def test_same_results_bag_and_sequence():
    assert same_results(_rs([1, 2, 2]), _rs([2, 1, 2]))
    assert not same_results(_rs([1, 2]), _rs([1, 2, 2]))
    assert not same_results(_rs([1, 2], True), _rs([2, 1]))


def test_same_results_allows_ties_to_permute():
    a = ResultSet(["k", "v"], [{"k": Term.number(1), "v": A}, {"k": Term.number(1), "v": B}], True)
    b = ResultSet(["k", "v"], [{"k": Term.number(1), "v": B}, {"k": Term.number(1), "v": A}], True)
    assert same_results(a, b, order_by="k")
    assert not same_results(a, b)


@given(st.lists(st.integers(-5, 5), max_size=12), st.randoms())
def test_same_results_is_permutation_invariant(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert _rs(values) == _rs(shuffled)


def test_results_json_round_trip():
    rs = ResultSet(
        ["x", "y"],
        [
            {"x": Term.name("http://a"), "y": Term.number(3)},
            {"x": Term.name("_:b0"), "y": Term.number(2.5)},
            {"x": Term.string("lit"), "y": UNBOUND},
        ],
    )
    doc = rs.to_json()
    assert "y" not in doc["results"]["bindings"][2]
    back = ResultSet.from_json(doc)
    assert back.rows == rs.rows


def test_truncated_and_column():
    rs = _rs([3, 1, 2])
    assert rs.truncated(1).column("x") == [Term.number(3)]
    assert len(rs) == 3 and [r["x"] for r in rs] == rs.column("x")


def test_term_kinds_are_distinct():
    assert {TermKind(t.kind) for t in (A, Term.string("s"), Term.number(1), Term.variable("v"))} == set(TermKind)
