"""Tokenizer for the supported SELECT subset, plus textual PREFIX expansion."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Literal

from ..errors import LexError
from ..model import RESERVED_WORDS

TokenKind = Literal["keyword", "identifier", "variable", "literal", "sign", "punct", "eof"]


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    position: tuple[int, int]
    offset: int = 0

    def __repr__(self) -> str:
        return f"{self.kind}({self.text})"


_RULES: list[tuple[str, str]] = [
    ("ws", r"\s+"),
    ("comment", r"\#[^\n]*"),
    ("variable", r"[?$][^\W\d]\w*|[?$]\d\w*"),
    ("string", r'"(?:[^"\\\n]|\\.)*"|\'(?:[^\'\\\n]|\\.)*\''),
    ("number", r"[+-]?(?:\d+\.\d+|\.\d+|\d+)(?:[eE][+-]?\d+)?"),
    ("iri", r"<[^\s<>\"{}|\\^`]+>"),
    ("sign", r"&&|\|\||!=|<=|>=|[=<>!/^|]"),
    ("punct", r"[.{}()*;,]"),
    ("word", r"[^\W\d][\w\-]*(?:[.:][\w\-]+)*:?"),
]
_MASTER = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _RULES))
_UNTERMINATED = re.compile(r"[\"']")


def tokenize(text: str) -> list[Token]:
    """Split query text into tokens; the final token is always ``eof``."""
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _MASTER.match(text, pos)
        column = pos - line_start + 1
        if m is None:
            if _UNTERMINATED.match(text, pos):
                raise LexError("unterminated string", (line, column))
            raise LexError(f"illegal character {text[pos]!r}", (line, column))
        group = m.lastgroup
        lexeme = m.group()
        if group == "word":
            kind = "keyword" if lexeme.upper() in RESERVED_WORDS else "identifier"
            tokens.append(Token(kind, lexeme, (line, column), pos))
        elif group == "iri":
            tokens.append(Token("identifier", lexeme, (line, column), pos))
        elif group in ("string", "number"):
            tokens.append(Token("literal", lexeme, (line, column), pos))
        elif group in ("variable", "sign", "punct"):
            tokens.append(Token(group, lexeme, (line, column), pos))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", (line, pos - line_start + 1), pos))
    return tokens


_PREFIX_DECL = re.compile(r"\s*PREFIX\s+([^\W\d][\w\-.]*)?:\s*<([^>\s]*)>", re.IGNORECASE)
_SKIP_OR_PNAME = re.compile(
    r'"(?:[^"\\\n]|\\.)*"|\'(?:[^\'\\\n]|\\.)*\'|<[^\s<>]*>|\#[^\n]*'
    r"|(?<![\w?$:\-])([^\W\d][\w\-.]*)?:([\w\-]+(?:\.[\w\-]+)*)?"
)


def expand_prefixes(text: str) -> str:
    """Strip leading PREFIX declarations and expand ``p:local`` names to IRIs.

    Declarations are blanked with spaces and newlines kept, so error
    positions still point into the caller's text.
    """
    prefixes: dict[str, str] = {}
    pos = 0
    while True:
        m = _PREFIX_DECL.match(text, pos)
        if m is None:
            break
        prefixes[m.group(1) or ""] = m.group(2)
        pos = m.end()
    if not prefixes:
        return text
    head = re.sub(r"[^\n]", " ", text[:pos])

    def expand(m: re.Match) -> str:
        whole = m.group()
        if whole[0] in "\"'<#":
            return whole
        prefix, local = m.group(1) or "", m.group(2) or ""
        if prefix not in prefixes:
            return whole
        return f"<{prefixes[prefix]}{local}>"

    return head + _SKIP_OR_PNAME.sub(expand, text[pos:])
