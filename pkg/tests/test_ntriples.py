from __future__ import annotations

import io
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from polykg.errors import MalformedLine
from polykg.model import Term, Triple
from polykg.ntriples import (
    dump_documents,
    flatten_documents,
    group_by_subject,
    load_ntriples,
    parse_line,
    parse_ntriples,
    serialize_ntriples,
)
from polykg.testing import random_rich_graph


def test_mini_kg_load(mini_kg_text):
    graph, docs, report = load_ntriples(mini_kg_text)
    assert report.summary() == "8 triples, 2 documents (0 lines skipped)"
    cis = docs[0]
    assert cis.subject_id == "CISPLATIN"
    assert cis.fields["FDA_Code"] == [Term.string("Table_1326")]
    assert docs[1].fields["ID"] == [Term.number(305)]


@pytest.mark.parametrize(
    "line,obj",
    [
        ('<http://a> <http://p> "x"@en .', Term.string("x")),
        ('a p "7"^^<http://www.w3.org/2001/XMLSchema#integer> .', Term.number(7)),
        ('a p "2.5"^^<http://www.w3.org/2001/XMLSchema#double> .', Term.number(2.5)),
        ('a p "x"^^<http://www.w3.org/2001/XMLSchema#string> .', Term.string("x")),
        ("a p _:b1 .", Term.name("_:b1")),
        ('a p "tab\\there" .', Term.string("tab\there")),
    ],
)
def test_parse_line_objects(line, obj):
    assert parse_line(line).object == obj


@pytest.mark.parametrize(
    "line",
    ["a p b", "a p .", '"lit" p b .', "a 5 b .", "a p b c .", 'a p "open .'],
)
def test_parse_line_rejects(line):
    with pytest.raises(ValueError):
        parse_line(line)


def test_strict_mode_reports_line_number():
    with pytest.raises(MalformedLine) as info:
        parse_ntriples("a p b .\nbroken\n")
    assert info.value.line_no == 2


def test_lenient_mode_counts_only_malformed_lines():
    text = "# comment\n\na p b .\nbroken\nc p d .\nalso broken .\n"
    triples, report = parse_ntriples(text, strict=False)
    assert len(triples) == report.triples_loaded == 2
    assert report.lines_skipped == 2
    assert [e.line_no for e in report.errors] == [4, 6]


def test_group_by_subject_keeps_order_and_drops_duplicates():
    t = [Triple(Term.name("s"), Term.name("p"), Term.number(n)) for n in (1, 2, 1)]
    docs = group_by_subject(t)
    assert len(docs) == 1 and docs[0].fields == {"p": [Term.number(1), Term.number(2)]}
    assert flatten_documents(docs) == t[:2]


def test_dump_documents_is_ndjson(mini_kg):
    _, docs = mini_kg
    buf = io.StringIO()
    assert dump_documents(docs, buf) == 2
    first = json.loads(buf.getvalue().splitlines()[0])
    assert first["subject_id"] == "CISPLATIN"
    assert first["UNII"] == ["Q20Q"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_serialize_parse_round_trip(seed):
    graph = random_rich_graph(random.Random(seed))
    triples, report = parse_ntriples(serialize_ntriples(graph))
    assert set(triples) == set(graph)
    assert report.lines_skipped == 0
