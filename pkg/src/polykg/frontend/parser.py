"""Recursive-descent parser for the SELECT subset.

Grammar::

    query     := SELECT ('*' | VAR+) WHERE? '{' group '}' modifier* EOF
    group     := (triple ('.')? | OPTIONAL '{' triple ('.' triple)* '.'? '}' | FILTER '(' expr ')')*
    modifier  := ORDER BY (VAR | (ASC|DESC) '(' VAR ')') | LIMIT INT | OFFSET INT
    expr      := conj ('||' conj)*
    conj      := unary ('&&' unary)*
    unary     := '!' unary | '(' expr ')' | EXISTS '(' VAR ')' | NOT EXISTS '(' VAR ')'
               | operand CMP operand

Anything recognisably SPARQL but outside the subset raises UnsupportedFeature.
"""

from __future__ import annotations

from typing import Optional

from ..errors import MalformedTerm, ParseError, UnsupportedFeature
from ..model import Term, term_parse
from .ast import (
    COMPARISON_OPS,
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
)
from .lexer import Token, expand_prefixes, tokenize

_UNSUPPORTED_KEYWORDS = {
    "UNION", "DISTINCT", "REDUCED", "GROUP", "HAVING", "CONSTRUCT", "ASK", "DESCRIBE",
    "GRAPH", "MINUS", "BIND", "VALUES", "SERVICE", "FROM", "PREFIX", "BASE",
}


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else f"{tok.kind} {tok.text!r}"


class _Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind != "eof":
            raise ValueError("token stream must end with an eof token")
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        return self.tok.kind == "keyword" and self.tok.text.upper() in words

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def fail(self, expected: str) -> ParseError:
        tok = self.tok
        if tok.kind == "keyword" and tok.text.upper() in _UNSUPPORTED_KEYWORDS:
            return UnsupportedFeature(tok.text.upper(), tok.position)
        if tok.kind == "sign" and tok.text in ("/", "^", "|"):
            return UnsupportedFeature("property paths", tok.position)
        if tok.kind == "punct" and tok.text in (";", ","):
            return UnsupportedFeature(f"predicate/object lists ({tok.text!r})", tok.position)
        return ParseError(expected, _describe(tok), tok.position)

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise self.fail(word)
        return self.advance()

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            raise self.fail(repr(text) if text else kind)
        return self.advance()

    # -- query ------------------------------------------------------------

    def query(self) -> QueryAst:
        self.expect_keyword("SELECT")
        projection: Optional[list[str]]
        proj_tokens: list[Token] = []
        if self.at("punct", "*"):
            self.advance()
            projection = None
        else:
            while self.at("variable"):
                proj_tokens.append(self.advance())
            if not proj_tokens:
                raise self.fail("'*' or a variable")
            projection = []
            for t in proj_tokens:
                name = t.text[1:]
                if name in projection:
                    raise ParseError("distinct projection variables", f"repeated {t.text}", t.position)
                projection.append(name)
        if self.at_keyword("WHERE"):
            self.advance()
        open_brace = self.expect("punct", "{")
        patterns, optionals, filt = self.group()
        if not patterns and not optionals:
            raise ParseError("a triple pattern", "empty pattern block", open_brace.position)
        self.expect("punct", "}")
        modifiers = self.modifiers(filt is not None)
        if not self.at("eof"):
            raise self.fail("end of input")
        ast = QueryAst(
            projection=None if projection is None else tuple(projection),
            patterns=tuple(patterns),
            optional_blocks=tuple(tuple(b) for b in optionals),
            filter=filt,
            modifiers=modifiers,
        )
        known = set(ast.variables())
        for t in proj_tokens:
            if t.text[1:] not in known:
                raise ParseError("a projected variable used in the query", f"unused {t.text}", t.position)
        return ast

    def group(self):
        patterns: list[TriplePattern] = []
        optionals: list[list[TriplePattern]] = []
        filt: Optional[FilterExpr] = None
        while True:
            if self.at("punct", "}") or self.at("eof"):
                return patterns, optionals, filt
            if self.at_keyword("OPTIONAL"):
                self.advance()
                brace = self.expect("punct", "{")
                block = self.pattern_block()
                if not block:
                    raise ParseError("a triple pattern", "empty OPTIONAL block", brace.position)
                self.expect("punct", "}")
                optionals.append(block)
                if self.at("punct", "."):
                    self.advance()
            elif self.at_keyword("FILTER"):
                tok = self.advance()
                if filt is not None:
                    raise UnsupportedFeature("more than one FILTER", tok.position)
                self.expect("punct", "(")
                filt = self.expr()
                self.expect("punct", ")")
                if self.at("punct", "."):
                    self.advance()
            elif self.at("punct", "{"):
                raise UnsupportedFeature("nested group patterns", self.tok.position)
            else:
                patterns.append(self.triple())
                if self.at("punct", "."):
                    self.advance()
                elif not (self.at("punct", "}") or self.at_keyword("OPTIONAL", "FILTER")):
                    raise self.fail("'.'")

    def pattern_block(self) -> list[TriplePattern]:
        block: list[TriplePattern] = []
        while not self.at("punct", "}"):
            if self.at_keyword("OPTIONAL", "FILTER") or self.at("punct", "{"):
                raise UnsupportedFeature(f"{self.tok.text} inside OPTIONAL", self.tok.position)
            block.append(self.triple())
            if self.at("punct", "."):
                self.advance()
            elif not self.at("punct", "}"):
                raise self.fail("'.' or '}'")
        return block

    def triple(self) -> TriplePattern:
        s = self.term("subject")
        p = self.term("predicate")
        o = self.term("object")
        return TriplePattern(s, p, o)

    def term(self, role: str) -> Term:
        tok = self.tok
        if tok.kind == "variable":
            self.advance()
            return Term.variable(tok.text[1:])
        if tok.kind == "identifier" or (tok.kind == "literal" and role != "predicate"):
            self.advance()
            try:
                return term_parse(tok.text)
            except MalformedTerm as exc:
                raise ParseError(f"a {role} term", str(exc), tok.position) from None
        raise self.fail(f"a {role} term")

    # -- modifiers --------------------------------------------------------

    def modifiers(self, has_filter: bool) -> ModifierSet:
        order_by: Optional[OrderBy] = None
        limit: Optional[int] = None
        offset: Optional[int] = None
        while not self.at("eof"):
            if self.at_keyword("ORDER"):
                tok = self.advance()
                if order_by is not None:
                    raise ParseError("a single ORDER BY", "repeated ORDER BY", tok.position)
                self.expect_keyword("BY")
                order_by = self.order_key()
                if self.at("variable") or self.at_keyword("ASC", "DESC"):
                    raise UnsupportedFeature("multiple ORDER BY keys", self.tok.position)
            elif self.at_keyword("LIMIT", "OFFSET"):
                tok = self.advance()
                word = tok.text.upper()
                if (limit if word == "LIMIT" else offset) is not None:
                    raise ParseError(f"a single {word}", f"repeated {word}", tok.position)
                count = self.count()
                if word == "LIMIT":
                    limit = count
                else:
                    offset = count
            else:
                raise self.fail("ORDER BY, LIMIT, OFFSET or end of input")
        return ModifierSet(order_by=order_by, limit=limit, offset=offset, has_filter=has_filter)

    def order_key(self) -> OrderBy:
        if self.at("variable"):
            return OrderBy(self.advance().text[1:])
        if self.at_keyword("ASC", "DESC"):
            descending = self.advance().text.upper() == "DESC"
            self.expect("punct", "(")
            var = self.expect("variable")
            self.expect("punct", ")")
            return OrderBy(var.text[1:], descending)
        if self.at("punct", "("):
            raise UnsupportedFeature("ORDER BY expressions", self.tok.position)
        raise self.fail("a variable, ASC(...) or DESC(...)")

    def count(self) -> int:
        tok = self.tok
        if tok.kind == "literal" and tok.text.isdigit():
            self.advance()
            value = int(tok.text)
            if value >= 2**63:
                raise ParseError("a count below 2**63", tok.text, tok.position)
            return value
        raise ParseError("a non-negative integer", _describe(tok), tok.position)

    # -- filter expressions ----------------------------------------------

    def expr(self) -> FilterExpr:
        left = self.conj()
        while self.at("sign", "||"):
            self.advance()
            left = Or(left, self.conj())
        return left

    def conj(self) -> FilterExpr:
        left = self.unary()
        while self.at("sign", "&&"):
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> FilterExpr:
        if self.at("sign", "!"):
            self.advance()
            return Not(self.unary())
        if self.at("punct", "("):
            self.advance()
            inner = self.expr()
            self.expect("punct", ")")
            return inner
        if self.at_keyword("EXISTS"):
            self.advance()
            return Exists(self.exists_arg())
        if self.at_keyword("NOT"):
            self.advance()
            self.expect_keyword("EXISTS")
            return NotExists(self.exists_arg())
        if self.at("identifier") and self.tokens[self.i + 1].text == "(":
            raise UnsupportedFeature(f"function call {self.tok.text}()", self.tok.position)
        lhs = self.operand()
        if not (self.tok.kind == "sign" and self.tok.text in COMPARISON_OPS):
            raise self.fail("a comparison operator")
        op = self.advance().text
        rhs = self.operand()
        return Compare(op, lhs, rhs)

    def exists_arg(self) -> Term:
        if self.at("punct", "{"):
            raise UnsupportedFeature("EXISTS over a graph pattern", self.tok.position)
        self.expect("punct", "(")
        var = self.expect("variable")
        self.expect("punct", ")")
        return Term.variable(var.text[1:])

    def operand(self) -> Term:
        tok = self.tok
        if tok.kind in ("variable", "literal", "identifier"):
            return self.term("operand")
        raise self.fail("a variable or constant")


def parse(tokens: list[Token]) -> QueryAst:
    return _Parser(tokens).query()


def parse_query(text: str) -> QueryAst:
    """Expand PREFIX declarations, tokenize and parse in one step."""
    return parse(tokenize(expand_prefixes(text)))
