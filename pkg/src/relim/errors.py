"""Exception types shared across the engine."""

from __future__ import annotations


class ParseError(ValueError):
    """Problem-text syntax or arity error, with source position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class PreconditionError(ValueError):
    """A named inequality or requirement of an operation does not hold."""

    def __init__(self, message: str, inequality: str | None = None):
        self.inequality = inequality
        super().__init__(message)


class SequenceError(PreconditionError):
    """A sequence certificate cannot be built; carries the failing step index."""

    def __init__(self, message: str, index: int | None = None, inequality: str | None = None):
        self.index = index
        super().__init__(message, inequality=inequality)


class BlowupError(RuntimeError):
    """A search exceeded its configured size cap.

    Carries partial statistics so callers can report how far the search got
    instead of truncating silently.
    """

    def __init__(self, message: str, stats: dict | None = None):
        self.stats = dict(stats or {})
        super().__init__(message)


class OperationCancelled(RuntimeError):
    """A cooperative cancellation point was triggered."""
