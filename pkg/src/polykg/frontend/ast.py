"""Syntax tree for the supported query subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from ..model import Term

COMPARISON_OPS = ("=", "!=", ">", ">=", "<", "<=")


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    object: Term

    def __iter__(self) -> Iterator[Term]:
        return iter((self.subject, self.predicate, self.object))

    def variables(self) -> list[str]:
        return [t.var_name for t in self if t.is_variable]


@dataclass(frozen=True)
class Exists:
    term: Term


@dataclass(frozen=True)
class NotExists:
    term: Term


@dataclass(frozen=True)
class And:
    left: "FilterExpr"
    right: "FilterExpr"


@dataclass(frozen=True)
class Or:
    left: "FilterExpr"
    right: "FilterExpr"


@dataclass(frozen=True)
class Not:
    operand: "FilterExpr"


@dataclass(frozen=True)
class Compare:
    op: str
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")


FilterExpr = Union[Exists, NotExists, And, Or, Not, Compare]


def expr_terms(expr: FilterExpr) -> Iterator[Term]:
    if isinstance(expr, (Exists, NotExists)):
        yield expr.term
    elif isinstance(expr, (And, Or)):
        yield from expr_terms(expr.left)
        yield from expr_terms(expr.right)
    elif isinstance(expr, Not):
        yield from expr_terms(expr.operand)
    else:
        yield expr.lhs
        yield expr.rhs


@dataclass(frozen=True)
class OrderBy:
    variable: str
    descending: bool = False


@dataclass(frozen=True)
class ModifierSet:
    order_by: Optional[OrderBy] = None
    limit: Optional[int] = None
    offset: Optional[int] = None
    has_filter: bool = False

    @property
    def any(self) -> bool:
        """True when a result-shaping modifier (ORDER BY/LIMIT/OFFSET) is present."""
        return self.order_by is not None or self.limit is not None or self.offset is not None


@dataclass(frozen=True)
class QueryAst:
    projection: Optional[tuple[str, ...]]  # None means SELECT *
    patterns: tuple[TriplePattern, ...]
    optional_blocks: tuple[tuple[TriplePattern, ...], ...] = ()
    filter: Optional[FilterExpr] = None
    modifiers: ModifierSet = field(default_factory=ModifierSet)

    @property
    def select_all(self) -> bool:
        return self.projection is None

    def all_patterns(self) -> list[TriplePattern]:
        out = list(self.patterns)
        for block in self.optional_blocks:
            out.extend(block)
        return out

    def variables(self) -> list[str]:
        """Every variable in order of first appearance (patterns, then filter)."""
        seen: dict[str, None] = {}
        for pattern in self.all_patterns():
            for name in pattern.variables():
                seen.setdefault(name, None)
        if self.filter is not None:
            for t in expr_terms(self.filter):
                if t.is_variable:
                    seen.setdefault(t.var_name, None)
        return list(seen)

    def projected_variables(self) -> list[str]:
        if self.projection is None:
            return [v for v in self.variables() if v in self._pattern_variables()]
        return list(self.projection)

    def _pattern_variables(self) -> set[str]:
        return {v for p in self.all_patterns() for v in p.variables()}
