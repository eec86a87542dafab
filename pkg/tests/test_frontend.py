from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from polykg.errors import LexError, ParseError, QuerySyntaxError, UnsupportedFeature
from polykg.frontend import parse_query, print_query
from polykg.frontend.ast import And, Compare, Exists, ModifierSet, Not, NotExists, Or, OrderBy, TriplePattern
from polykg.frontend.lexer import expand_prefixes, tokenize
from polykg.model import Term
from polykg.testing import random_ast

X, Y = Term.variable("x"), Term.variable("y")


def test_tokenize_ends_with_eof_and_tracks_positions():
    tokens = tokenize('SELECT ?x\nWHERE { ?x p "a b" . }')
    assert tokens[-1].kind == "eof"
    where = tokens[2]
    assert (where.kind, where.position) == ("keyword", (2, 1))
    assert [t.kind for t in tokens[4:8]] == ["variable", "identifier", "literal", "punct"]


def test_lex_errors():
    with pytest.raises(LexError) as info:
        tokenize('SELECT ?x WHERE { ?x p "open }')
    assert info.value.position == (1, 24)
    with pytest.raises(LexError):
        tokenize("SELECT ?x WHERE { ?x p @ }")


def test_prefix_expansion_keeps_positions():
    text = "PREFIX ex: <http://ex.org/>\nSELECT ?x WHERE { ?x ex:p \"ex:q\" . }"
    expanded = expand_prefixes(text)
    assert "<http://ex.org/p>" in expanded and '"ex:q"' in expanded
    assert expanded.count("\n") == text.count("\n")
    ast = parse_query(text)
    assert ast.patterns[0].predicate == Term.name("http://ex.org/p")


def test_parse_full_query():
    ast = parse_query(
        'SELECT ?x ?y WHERE { ?x p ?y . OPTIONAL { ?y q "z" } FILTER(?y > 3 && !EXISTS(?x)) }'
        " ORDER BY DESC(?y) LIMIT 5 OFFSET 2"
    )
    assert ast.projection == ("x", "y")
    assert ast.patterns == (TriplePattern(X, Term.name("p"), Y),)
    assert ast.optional_blocks == ((TriplePattern(Y, Term.name("q"), Term.string("z")),),)
    assert ast.filter == And(Compare(">", Y, Term.number(3)), Not(Exists(X)))
    assert ast.modifiers == ModifierSet(OrderBy("y", True), 5, 2, True)


def test_operator_precedence():
    ast = parse_query("SELECT * WHERE { ?x p ?y . FILTER(EXISTS(?x) || EXISTS(?y) && NOT EXISTS(?x)) }")
    assert ast.filter == Or(Exists(X), And(Exists(Y), NotExists(X)))


def test_select_star_projects_pattern_variables_in_order():
    ast = parse_query("SELECT * WHERE { ?b p ?a . ?a q ?c . }")
    assert ast.projected_variables() == ["b", "a", "c"]


@pytest.mark.parametrize(
    "text,feature",
    [
        ("SELECT DISTINCT ?x WHERE { ?x p o }", "DISTINCT"),
        ("SELECT ?x WHERE { { ?x p o } UNION { ?x q o } }", None),
        ("SELECT ?x WHERE { ?x p/q o }", "property paths"),
        ("SELECT ?x WHERE { ?x p o ; q r }", "predicate/object lists"),
        ("SELECT ?x WHERE { ?x p ?y . FILTER(?y > 1) FILTER(?y < 3) }", "more than one FILTER"),
    ],
)
def test_unsupported_features(text, feature):
    with pytest.raises(QuerySyntaxError) as info:
        parse_query(text)
    if feature is not None:
        assert isinstance(info.value, UnsupportedFeature)
        assert feature in str(info.value)


@pytest.mark.parametrize(
    "text",
    [
        "SELECT WHERE { ?x p o }",
        "SELECT ?x WHERE { }",
        "SELECT ?x ?x WHERE { ?x p o }",
        "SELECT ?x WHERE { ?x p o } LIMIT",
        "SELECT ?x WHERE { ?x p o } trailing",
        "SELECT ?x WHERE { ?x p o ",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_query(text)


def test_printer_output_is_canonical():
    ast = parse_query("select ?x where { ?x p 1 . filter(?x != \"a\") } order by ?x limit 1")
    assert print_query(ast) == (
        'SELECT ?x\nWHERE {\n  ?x p 1 .\n  FILTER(?x != "a")\n}\nORDER BY ASC(?x)\nLIMIT 1'
    )


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_print_parse_fixpoint(seed):
    ast = random_ast(random.Random(seed))
    assert parse_query(print_query(ast)) == ast
