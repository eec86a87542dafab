"""N-Triples loading and subject-grouped document conversion.

The line grammar is deliberately loose: besides ``<iri>``, ``_:bnode`` and
quoted literals it accepts the bare-name style used in hand-written extracts
(``CISPLATIN UNII "Q20Q" .``) and bare numerals as numeric objects.
Language tags are dropped and XSD numeric datatypes become numbers; any
other datatype is kept as a plain string literal.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import IO, Iterable

from .errors import MalformedLine, MalformedTerm
from .model import (
    NUMBER_RE,
    Document,
    KnowledgeGraph,
    Term,
    TermKind,
    Triple,
    parse_number,
    unescape,
)
from .model import _NUMERIC_TYPES

_TOKEN_RE = re.compile(
    r"""
    \s*(?:
        (?P<iri><[^\s<>"]*>)
      | (?P<lit>"(?:[^"\\]|\\.)*")(?:@(?P<lang>[A-Za-z][\w-]*)|\^\^(?P<dtype><[^\s<>"]*>|[^\s"]+))?
      | (?P<bare>[^\s"<>]+)
    )
    """,
    re.VERBOSE,
)


@dataclass
class IngestReport:
    triples_loaded: int = 0
    lines_skipped: int = 0
    documents_emitted: int = 0
    errors: list[MalformedLine] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"{self.triples_loaded} triples, {self.documents_emitted} documents "
            f"({self.lines_skipped} lines skipped)"
        )


def _split_terms(line: str) -> list[tuple[str, re.Match]]:
    pos, out = 0, []
    while pos < len(line) and line[pos:].strip():
        m = _TOKEN_RE.match(line, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"unreadable text at column {pos + 1}")
        kind = next(k for k in ("iri", "lit", "bare") if m.group(k) is not None)
        out.append((kind, m))
        pos = m.end()
    return out


def _node(kind: str, m: re.Match, position: str) -> Term:
    if kind == "iri":
        inner = m.group("iri")[1:-1]
        if not inner:
            raise ValueError(f"empty IRI in {position}")
        return Term.name(inner)
    if kind == "lit":
        if position != "object":
            raise ValueError(f"literal in {position} position")
        text = unescape(m.group("lit")[1:-1])
        dtype = m.group("dtype")
        if dtype is not None and dtype.strip("<>") in _NUMERIC_TYPES and NUMBER_RE.fullmatch(text.strip()):
            return Term(TermKind.NUMBER, text.strip(), parse_number(text.strip()))
        return Term.string(text)
    bare = m.group("bare")
    if NUMBER_RE.fullmatch(bare):
        if position != "object":
            raise ValueError(f"number in {position} position")
        return Term(TermKind.NUMBER, bare, parse_number(bare))
    return Term.name(bare)


def parse_line(line: str) -> Triple:
    """Parse one statement line (without the line number bookkeeping)."""
    body = line.rstrip()
    if not body.endswith("."):
        raise ValueError("missing terminating '.'")
    parts = _split_terms(body[:-1])
    if len(parts) != 3:
        raise ValueError(f"expected 3 terms, found {len(parts)}")
    try:
        s, p, o = (
            _node(kind, m, pos)
            for (kind, m), pos in zip(parts, ("subject", "predicate", "object"))
        )
    except MalformedTerm as exc:
        raise ValueError(str(exc)) from None
    return Triple(s, p, o)


def parse_ntriples(text: str, strict: bool = True) -> tuple[list[Triple], IngestReport]:
    triples: list[Triple] = []
    report = IngestReport()
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            triples.append(parse_line(stripped))
        except ValueError as exc:
            err = MalformedLine(line_no, line, str(exc))
            if strict:
                raise err from None
            report.errors.append(err)
            report.lines_skipped += 1
            continue
        report.triples_loaded += 1
    return triples, report


def group_by_subject(triples: Iterable[Triple]) -> list[Document]:
    docs: dict[str, Document] = {}
    seen: set[Triple] = set()
    for t in triples:
        if t in seen:
            continue
        seen.add(t)
        sid = t.subject.lexical
        doc = docs.get(sid)
        if doc is None:
            doc = docs[sid] = Document(sid)
        doc.fields.setdefault(t.predicate.lexical, []).append(t.object)
    return list(docs.values())


def flatten_documents(docs: Iterable[Document]) -> list[Triple]:
    return [t for doc in docs for t in doc.triples()]


def load_ntriples(text: str, strict: bool = True) -> tuple[KnowledgeGraph, list[Document], IngestReport]:
    """Parse, build the indexed graph and derive its document collection."""
    triples, report = parse_ntriples(text, strict=strict)
    graph = KnowledgeGraph(triples)
    docs = group_by_subject(graph)
    report.documents_emitted = len(docs)
    return graph, docs, report


def dump_documents(docs: Iterable[Document], fp: IO[str]) -> int:
    """Write newline-delimited JSON documents; returns the count written."""
    n = 0
    for doc in docs:
        fp.write(json.dumps(doc.to_json(), ensure_ascii=False))
        fp.write("\n")
        n += 1
    return n


def serialize_ntriples(triples: Iterable[Triple]) -> str:
    return "".join(t.render() + "\n" for t in triples)
