from .ast import (
    And,
    Compare,
    Exists,
    FilterExpr,
    ModifierSet,
    Not,
    NotExists,
    Or,
    OrderBy,
    QueryAst,
    TriplePattern,
    expr_terms,
)
from .lexer import Token, expand_prefixes, tokenize
from .parser import parse, parse_query
from .printer import print_expr, print_query

__all__ = [
    "And", "Compare", "Exists", "FilterExpr", "ModifierSet", "Not", "NotExists", "Or",
    "OrderBy", "QueryAst", "Token", "TriplePattern", "expand_prefixes", "expr_terms",
    "parse", "parse_query", "print_expr", "print_query", "tokenize",
]
