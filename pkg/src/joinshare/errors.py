"""Exception hierarchy shared across the package."""

from __future__ import annotations


class JoinShareError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(JoinShareError):
    """Unknown column, duplicate name, or incompatible value kinds."""


class LoadError(JoinShareError):
    """A delimited-text source could not be parsed under its declared schema."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class CatalogError(JoinShareError):
    """Duplicate table or view name, or a reference to a missing table."""


class DSLError(JoinShareError):
    """Syntax or resolution error in a graph model definition, with position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{message} at line {line}, column {col}")


class JoinGraphError(JoinShareError):
    """A query cannot be represented as a connected join graph."""


class NoCommonJoinError(JoinGraphError):
    """Two join graphs share no join edge, so no decomposition exists."""


class ViewOverlapError(JoinShareError):
    """Two occurrences of a view pattern share a table instance within one query."""


class ExtractionError(JoinShareError):
    """The extracted graph violates referential closure or id uniqueness."""
