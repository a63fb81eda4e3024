"""Hand-written lexer for the extended ECA language.

Comments run from `//` to end of line and are dropped. Everything else maps
onto the token alphabet of the grammar: keywords, identifiers, integer and
float literals, operators and punctuation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from .errors import LexError, Span

KEYWORDS = frozenset({
    "struct", "begin", "end", "void", "bool", "int", "float",
    "skip", "if", "then", "else", "repeat", "while", "and", "or",
})

BOOL_LITERALS = frozenset({"true", "false"})

# Longest operators first so that maximal munch falls out of a simple scan.
OPERATORS = ("::", ">=", "<=", "==", "!=", ">", "<", "+", "-", "*", "=")
PUNCTUATION = ("(", ")", ".", ",", ";")


class TokenKind(Enum):
    KEYWORD = auto()
    IDENT = auto()
    INT = auto()
    FLOAT = auto()
    BOOL = auto()
    OP = auto()
    PUNCT = auto()
    EOF = auto()


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: Span

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.text!r}, {self.span})"


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_part(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(source: str) -> list[Token]:
    """Tokenize source text; raises LexError on characters outside the alphabet."""
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(source)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = source[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if c == "/" and source.startswith("//", i):
            while i < n and source[i] != "\n":
                advance(1)
            continue
        start_span = Span(line, col)
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            kind = TokenKind.INT
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                kind = TokenKind.FLOAT
            text = source[i:j]
            tokens.append(Token(kind, text, Span(line, col, len(text))))
            advance(len(text))
            continue
        if _is_ident_start(c):
            j = i
            while j < n and _is_ident_part(source[j]):
                j += 1
            text = source[i:j]
            if text in KEYWORDS:
                kind = TokenKind.KEYWORD
            elif text in BOOL_LITERALS:
                kind = TokenKind.BOOL
            else:
                kind = TokenKind.IDENT
            tokens.append(Token(kind, text, Span(line, col, len(text))))
            advance(len(text))
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token(TokenKind.OP, op, Span(line, col, len(op))))
                advance(len(op))
                break
        else:
            if c in PUNCTUATION:
                tokens.append(Token(TokenKind.PUNCT, c, Span(line, col, 1)))
                advance(1)
            else:
                raise LexError(start_span, f"unexpected character {c!r}")

    tokens.append(Token(TokenKind.EOF, "", Span(line, col, 0)))
    return tokens
