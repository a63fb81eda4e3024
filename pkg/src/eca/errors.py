"""Shared error types carrying source positions."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Position of a token or node in the source text (1-based)."""

    line: int
    col: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class EcaError(Exception):
    """Base class for all toolkit errors that point at a source location."""

    def __init__(self, span: Span | None, message: str):
        self.span = span
        self.message = message
        super().__init__(message)

    def format(self, filename: str = "<input>") -> str:
        where = f"{filename}:{self.span}" if self.span else filename
        return f"{where}: {self.message}"


class LexError(EcaError):
    pass


class ParseError(EcaError):
    def __init__(self, span: Span | None, message: str, expected: frozenset[str] = frozenset()):
        super().__init__(span, message)
        self.expected = expected


class ClassificationError(ParseError):
    """A statement-only form was used where a value is required."""
