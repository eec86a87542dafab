"""Core domain types: terms, triples, the indexed graph, documents, result sets.

Terms carry a *match key* that every comparison in the package goes through.
Names and string literals share the text key space, so the literal
``"Table_1326"`` joins with the entity ``Table_1326`` exactly as it does once
both become plain strings in a document store.  Numbers key by numeric value.
"""

from __future__ import annotations

import enum
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Optional, Union

from .errors import MalformedTerm

# Words the query lexer treats as keywords; names spelled like one must be
# written in angle brackets to survive a print/parse round trip.
RESERVED_WORDS = frozenset(
    {
        "SELECT", "WHERE", "OPTIONAL", "FILTER", "ORDER", "BY", "ASC", "DESC",
        "LIMIT", "OFFSET", "EXISTS", "NOT",
        # recognised only so they can be rejected with a clear message
        "UNION", "DISTINCT", "REDUCED", "GROUP", "HAVING", "CONSTRUCT", "ASK",
        "DESCRIBE", "GRAPH", "MINUS", "BIND", "VALUES", "SERVICE", "FROM",
        "PREFIX", "BASE",
    }
)

BARE_NAME_RE = re.compile(r"[^\W\d][\w\-]*(?:[.:][\w\-]+)*")
VARIABLE_RE = re.compile(r"[^\W\d][\w]*|\d[\w]*")
NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "'": "'", "n": "\n", "r": "\r", "t": "\t"}


class TermKind(str, enum.Enum):
    NAME = "iri-or-name"
    STRING = "literal-string"
    NUMBER = "literal-number"
    VARIABLE = "variable"


Number = Union[int, float]


@dataclass(frozen=True)
class Term:
    kind: TermKind
    lexical: str
    value: Optional[Number] = None

    @classmethod
    def name(cls, text: str) -> "Term":
        return cls(TermKind.NAME, text)

    @classmethod
    def string(cls, text: str) -> "Term":
        return cls(TermKind.STRING, text)

    @classmethod
    def number(cls, value: Number) -> "Term":
        if isinstance(value, bool) or value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"not a finite number: {value!r}")
        return cls(TermKind.NUMBER, str(value) if isinstance(value, int) else repr(value), value)

    @classmethod
    def variable(cls, name: str) -> "Term":
        name = name[1:] if name.startswith("?") else name
        if not name:
            raise MalformedTerm("variable needs a name")
        return cls(TermKind.VARIABLE, "?" + name)

    @property
    def is_variable(self) -> bool:
        return self.kind is TermKind.VARIABLE

    @property
    def var_name(self) -> str:
        if not self.is_variable:
            raise ValueError(f"{self} is not a variable")
        return self.lexical[1:]

    @property
    def key(self) -> tuple:
        if self.kind is TermKind.NUMBER:
            return ("n", self.value)
        if self.kind is TermKind.VARIABLE:
            return ("v", self.lexical)
        return ("s", self.lexical)

    @property
    def order_key(self) -> tuple:
        if self.kind is TermKind.NUMBER:
            return (1, self.value)
        return (2, self.lexical)

    @property
    def native(self) -> Union[str, Number]:
        """The plain JSON value a document store would hold for this term."""
        return self.value if self.kind is TermKind.NUMBER else self.lexical

    def render(self) -> str:
        if self.kind is TermKind.STRING:
            return '"' + "".join(_ESCAPES.get(c, c) for c in self.lexical) + '"'
        if self.kind is TermKind.NAME:
            if BARE_NAME_RE.fullmatch(self.lexical) and self.lexical.upper() not in RESERVED_WORDS:
                return self.lexical
            return f"<{self.lexical}>"
        return self.lexical

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"Term({self.render()})"


class _Unbound:
    """Marker for an optional variable left without a value."""

    _instance = None
    key = None
    order_key = (0,)

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def render(self) -> str:
        return ""

    def __repr__(self) -> str:
        return "UNBOUND"

    def __reduce__(self):
        return (_Unbound, ())


UNBOUND = _Unbound()
Value = Union[Term, _Unbound]


def unescape(body: str) -> str:
    out = []
    chars = iter(body)
    for c in chars:
        if c == "\\":
            nxt = next(chars, None)
            if nxt is None or nxt not in _UNESCAPES:
                raise MalformedTerm(f"bad escape in {body!r}")
            out.append(_UNESCAPES[nxt])
        else:
            out.append(c)
    return "".join(out)


def parse_number(text: str) -> Number:
    if re.search(r"[.eE]", text):
        return float(text)
    return int(text)


def term_parse(text: str) -> Term:
    """Classify one term written in query/N-Triples surface syntax."""
    text = text.strip()
    if not text:
        raise MalformedTerm("empty term")
    head = text[0]
    if head == "?":
        if not VARIABLE_RE.fullmatch(text[1:]):
            raise MalformedTerm(f"bad variable {text!r}")
        return Term.variable(text)
    if head in "\"'":
        if len(text) < 2 or text[-1] != head or _escaped_at(text, len(text) - 1):
            raise MalformedTerm(f"unterminated string {text!r}")
        return Term.string(unescape(text[1:-1]))
    if head == "<":
        if not text.endswith(">") or len(text) < 3 or any(c.isspace() for c in text):
            raise MalformedTerm(f"bad IRI {text!r}")
        return Term.name(text[1:-1])
    if NUMBER_RE.fullmatch(text):
        return Term(TermKind.NUMBER, text, parse_number(text))
    if any(c.isspace() for c in text) or '"' in text:
        raise MalformedTerm(f"bad name {text!r}")
    return Term.name(text)


def _escaped_at(text: str, index: int) -> bool:
    backslashes = 0
    i = index - 1
    while i >= 0 and text[i] == "\\":
        backslashes += 1
        i -= 1
    return backslashes % 2 == 1


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        for part in (self.subject, self.predicate, self.object):
            if part.is_variable:
                raise ValueError(f"stored triples cannot hold variables: {part}")

    def __iter__(self) -> Iterator[Term]:
        return iter((self.subject, self.predicate, self.object))

    def render(self) -> str:
        return f"{self.subject.render()} {self.predicate.render()} {self.object.render()} ."


class KnowledgeGraph:
    """Insertion-ordered triple set with subject, predicate and object indexes."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: list[Triple] = []
        self._members: set[Triple] = set()
        self._by_subject: dict[tuple, list[Triple]] = defaultdict(list)
        self._by_predicate: dict[tuple, list[Triple]] = defaultdict(list)
        self._by_object: dict[tuple, list[Triple]] = defaultdict(list)
        for t in triples:
            self.add(t)

    def add(self, t: Triple) -> bool:
        if t in self._members:
            return False
        self._members.add(t)
        self._triples.append(t)
        self._by_subject[t.subject.key].append(t)
        self._by_predicate[t.predicate.key].append(t)
        self._by_object[t.object.key].append(t)
        return True

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, t: object) -> bool:
        return t in self._members

    @property
    def triples(self) -> tuple[Triple, ...]:
        return tuple(self._triples)

    def by_subject(self, term: Term) -> list[Triple]:
        return list(self._by_subject.get(term.key, ()))

    def by_predicate(self, term: Term) -> list[Triple]:
        return list(self._by_predicate.get(term.key, ()))

    def by_object(self, term: Term) -> list[Triple]:
        return list(self._by_object.get(term.key, ()))

    def match(
        self,
        subject: Optional[Term] = None,
        predicate: Optional[Term] = None,
        obj: Optional[Term] = None,
    ) -> list[Triple]:
        """Triples agreeing (by match key) with every non-None position."""
        bound = [
            (index, term, pos)
            for index, term, pos in (
                (self._by_subject, subject, 0),
                (self._by_predicate, predicate, 1),
                (self._by_object, obj, 2),
            )
            if term is not None
        ]
        if not bound:
            return list(self._triples)
        candidates = min((index.get(term.key, ()) for index, term, _ in bound), key=len)
        return [
            t for t in candidates
            if all(tuple(t)[pos].key == term.key for _, term, pos in bound)
        ]

    def subjects(self) -> list[Term]:
        return [triples[0].subject for triples in self._by_subject.values()]

    def __repr__(self) -> str:
        return f"<KnowledgeGraph {len(self)} triples>"


def graph_insert(g: KnowledgeGraph, t: Triple) -> KnowledgeGraph:
    g.add(t)
    return g


@dataclass
class Document:
    """A subject-grouped record: ``subject_id`` plus predicate -> values."""

    subject_id: str
    fields: dict[str, list[Term]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.subject_id:
            raise ValueError("subject_id must be nonempty")

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"subject_id": self.subject_id}
        for pred, values in self.fields.items():
            out[pred] = [v.native for v in values]
        return out

    def triples(self) -> Iterator[Triple]:
        subject = Term.name(self.subject_id)
        for pred, values in self.fields.items():
            p = Term.name(pred)
            for v in values:
                yield Triple(subject, p, v)


def _row_key(row: Mapping[str, Value], variables: list[str]) -> tuple:
    return tuple(row.get(v, UNBOUND).key for v in variables)


@dataclass(eq=False)
class ResultSet:
    variables: list[str]
    rows: list[dict[str, Value]]
    ordered: bool = False

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[dict[str, Value]]:
        return iter(self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResultSet):
            return NotImplemented
        return same_results(self, other)

    def keys(self) -> list[tuple]:
        return [_row_key(r, self.variables) for r in self.rows]

    def column(self, var: str) -> list[Value]:
        return [r.get(var, UNBOUND) for r in self.rows]

    def truncated(self, n: int) -> "ResultSet":
        return ResultSet(list(self.variables), self.rows[:n], self.ordered)

    def to_json(self) -> dict[str, Any]:
        """SPARQL 1.1 query results JSON document."""
        bindings = []
        for row in self.rows:
            b = {}
            for var in self.variables:
                value = row.get(var, UNBOUND)
                if value is UNBOUND:
                    continue
                b[var] = _term_to_json(value)
            bindings.append(b)
        return {"head": {"vars": list(self.variables)}, "results": {"bindings": bindings}}

    @classmethod
    def from_json(cls, doc: Mapping[str, Any], ordered: bool = False) -> "ResultSet":
        variables = list(doc["head"]["vars"])
        rows = []
        for b in doc["results"]["bindings"]:
            rows.append({v: (_term_from_json(b[v]) if v in b else UNBOUND) for v in variables})
        return cls(variables, rows, ordered)


XSD = "http://www.w3.org/2001/XMLSchema#"
_NUMERIC_TYPES = {XSD + t for t in ("integer", "int", "long", "short", "decimal", "double", "float",
                                     "nonNegativeInteger", "positiveInteger", "negativeInteger",
                                     "nonPositiveInteger", "unsignedInt", "unsignedLong")}


def _term_to_json(term: Term) -> dict[str, str]:
    if term.kind is TermKind.NAME:
        if term.lexical.startswith("_:"):
            return {"type": "bnode", "value": term.lexical[2:]}
        return {"type": "uri", "value": term.lexical}
    if term.kind is TermKind.NUMBER:
        dtype = "integer" if isinstance(term.value, int) else "double"
        return {"type": "literal", "value": term.lexical, "datatype": XSD + dtype}
    return {"type": "literal", "value": term.lexical}


def _term_from_json(b: Mapping[str, str]) -> Term:
    kind, value = b["type"], b["value"]
    if kind == "uri":
        return Term.name(value)
    if kind == "bnode":
        return Term.name("_:" + value)
    if b.get("datatype") in _NUMERIC_TYPES and NUMBER_RE.fullmatch(value.strip()):
        return Term(TermKind.NUMBER, value.strip(), parse_number(value.strip()))
    return Term.string(value)


def same_results(
    a: ResultSet,
    b: ResultSet,
    ordered: Optional[bool] = None,
    order_by: Optional[str] = None,
) -> bool:
    """Compare two result sets as bags, or as sequences when order matters.

    With ``order_by`` naming a projected variable, rows that tie on that
    variable may appear in any order: the sequence of sort keys must match
    and each tie group must match as a bag.
    """
    if set(a.variables) != set(b.variables):
        return False
    if ordered is None:
        ordered = a.ordered or b.ordered
    variables = list(a.variables)
    ka = [_row_key(r, variables) for r in a.rows]
    kb = [_row_key(r, variables) for r in b.rows]
    if not ordered:
        return Counter(ka) == Counter(kb)
    if order_by is None or order_by not in variables:
        return ka == kb
    if len(ka) != len(kb):
        return False
    col = variables.index(order_by)
    return _tie_groups(ka, col) == _tie_groups(kb, col)


def _tie_groups(keys: list[tuple], col: int) -> list[tuple]:
    groups: list[tuple] = []
    for k in keys:
        if groups and groups[-1][0] == k[col]:
            groups[-1][1][k] += 1
        else:
            groups.append((k[col], Counter([k])))
    return groups


def merge_bindings(a: Mapping[str, Value], b: Mapping[str, Value]) -> Optional[dict[str, Value]]:
    """Merge two bindings; None when a shared bound variable disagrees."""
    merged = dict(a)
    for var, value in b.items():
        mine = merged.get(var, UNBOUND)
        if mine is UNBOUND:
            merged[var] = value
        elif value is not UNBOUND and mine.key != value.key:
            return None
    return merged
