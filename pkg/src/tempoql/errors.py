"""Exception types shared across the package.

Errors that relate to a location in query text carry a (start, end) byte
span so editors can underline the offending region.
"""

from __future__ import annotations


class TempoQLError(Exception):
    """Base class for all errors raised by this package."""


class QueryTypeError(TempoQLError):
    """An operation was applied to values of incompatible kinds."""


class AlignmentError(TempoQLError):
    """Two series could not be broadcast together.

    ``divergence`` identifies the first (trajectory, time) at which the
    operand indices disagree, when that is known.
    """

    def __init__(self, message: str, divergence: tuple | None = None):
        super().__init__(message)
        self.divergence = divergence


class ParseError(TempoQLError):
    """Raised when query text cannot be parsed.

    Attributes:
        span: (start, end) byte offsets of the offending region.
        expected: sorted list of token descriptions that would have been
            accepted at this point.
        hint: optional recovery suggestion.
    """

    def __init__(self, message: str, span: tuple[int, int],
                 expected: list[str] | None = None, hint: str | None = None):
        super().__init__(message)
        self.span = span
        self.expected = sorted(set(expected or []))
        self.hint = hint

    def __str__(self) -> str:
        base = super().__str__()
        parts = [f"{base} (at {self.span[0]}..{self.span[1]})"]
        if self.expected:
            parts.append("expected " + ", ".join(self.expected))
        if self.hint:
            parts.append(self.hint)
        return "; ".join(parts)


class EvalError(TempoQLError):
    """Raised when a parsed query cannot be evaluated.

    Carries the source span of the subexpression that failed, when known.
    """

    def __init__(self, message: str, span: tuple[int, int] | None = None):
        super().__init__(message)
        self.span = span


class SpecError(TempoQLError):
    """A dataset specification violates its schema.

    ``pointer`` is a JSON-pointer-style path to the offending key.
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer


class IngestError(TempoQLError):
    """A source file could not be ingested."""


class StoreError(TempoQLError):
    """The query store file is malformed or an operation on it is invalid."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer


class ProviderError(TempoQLError):
    """The language-model provider failed or returned an unusable response."""
