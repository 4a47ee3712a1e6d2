"""Table catalog: ingestion, statistics and view materialization."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from ..errors import CatalogError, LoadError
from .relation import Column, Relation, Schema
from .values import Kind, parse_value, value_nbytes

DEFAULT_PAGE_SIZE = 8192


@dataclass(frozen=True)
class TableStats:
    cardinality: int
    page_count: int
    distinct: dict[str, int]
    # average serialized bytes per value, by bare column name
    widths: dict[str, float]
    total_bytes: int

    @property
    def row_width(self) -> float:
        return sum(self.widths.values())


def pages_for(nbytes: float, page_size: int) -> int:
    return max(1, math.ceil(nbytes / page_size))


def default_width(kind: Kind) -> float:
    return {Kind.INT: 8.0, Kind.FLOAT: 8.0, Kind.BOOL: 1.0, Kind.TEXT: 12.0}[kind]


def compute_stats(rel: Relation, page_size: int = DEFAULT_PAGE_SIZE) -> TableStats:
    n = len(rel.rows)
    distinct: dict[str, int] = {}
    widths: dict[str, float] = {}
    total = 0
    for i, col in enumerate(rel.schema):
        values = [r[i] for r in rel.rows]
        nbytes = sum(value_nbytes(v) for v in values)
        total += nbytes
        distinct[col.base_name] = len({v for v in values if v is not None})
        widths[col.base_name] = nbytes / n if n else default_width(col.kind)
    return TableStats(n, pages_for(total, page_size), distinct, widths, total)


def read_delimited(name: str, source: TextIO, schema: Schema, delimiter: str = ",") -> Relation:
    """Parse a delimited-text stream whose header row names the schema columns."""
    reader = csv.reader(source, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise LoadError(f"table {name}: missing header row", line=1) from None
    expected = [c.base_name for c in schema]
    if [h.strip() for h in header] != expected:
        raise LoadError(f"table {name}: header {header} does not match columns {expected}", line=1)
    kinds = [c.kind for c in schema]
    rows = []
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(kinds):
            raise LoadError(f"table {name}: expected {len(kinds)} fields, got {len(record)}", line=lineno)
        row = []
        for text, kind, col in zip(record, kinds, expected):
            try:
                row.append(parse_value(text, kind))
            except ValueError:
                raise LoadError(f"table {name}: {text!r} is not a valid {kind.value}",
                                line=lineno, column=col) from None
        rows.append(tuple(row))
    return Relation(schema, rows)


def write_delimited(rel: Relation, sink: TextIO, delimiter: str = ",") -> None:
    from .values import format_value

    writer = csv.writer(sink, delimiter=delimiter, lineterminator="\n")
    writer.writerow([c.base_name for c in rel.schema])
    for row in rel.rows:
        writer.writerow([format_value(v) for v in row])


@dataclass
class Database:
    """Named relations plus their statistics.

    Stored relations carry columns qualified by the table name
    (``SS.c_id``); :meth:`scan` re-qualifies them with a query alias.
    ``counters`` records scans, materializations and bytes written.
    """

    page_size: int = DEFAULT_PAGE_SIZE
    tables: dict[str, Relation] = field(default_factory=dict)
    stats: dict[str, TableStats] = field(default_factory=dict)
    views: set[str] = field(default_factory=set)
    counters: Counter = field(default_factory=Counter)

    def __contains__(self, name: str) -> bool:
        return name in self.tables

    def register(self, name: str, rel: Relation) -> TableStats:
        if name in self.tables:
            raise CatalogError(f"table {name!r} already exists")
        if "." in name:
            raise CatalogError(f"table name {name!r} may not contain '.'")
        stored = Relation(rel.schema.requalify(name), rel.rows)
        self.tables[name] = stored
        self.stats[name] = compute_stats(stored, self.page_size)
        return self.stats[name]

    def load_table(self, name: str, source: TextIO | str, schema: Schema,
                   delimiter: str = ",") -> Relation:
        if name in self.tables:
            raise CatalogError(f"table {name!r} already exists")
        if isinstance(source, str):
            source = io.StringIO(source)
        rel = read_delimited(name, source, schema, delimiter)
        self.register(name, rel)
        return self.tables[name]

    def add_rows(self, name: str, columns: Iterable[tuple[str, Kind | str]],
                 rows: Iterable[tuple]) -> Relation:
        """Register an in-memory table (used by generators and tests)."""
        schema = Schema.of(*columns)
        rel = Relation.checked(schema, rows)
        self.register(name, rel)
        return self.tables[name]

    def materialize(self, rel: Relation, view_name: str) -> TableStats:
        """Store ``rel`` as a view table; bytes written are counted."""
        if view_name in self.tables:
            raise CatalogError(f"view name {view_name!r} collides with an existing table")
        stats = self.register(view_name, rel)
        self.views.add(view_name)
        self.counters["materializations"] += 1
        self.counters[f"materialize:{view_name}"] += 1
        self.counters["bytes_materialized"] += stats.total_bytes
        return stats

    def table(self, name: str) -> Relation:
        try:
            return self.tables[name]
        except KeyError:
            raise CatalogError(f"unknown table {name!r}") from None

    def table_stats(self, name: str) -> TableStats:
        try:
            return self.stats[name]
        except KeyError:
            raise CatalogError(f"no statistics for table {name!r}") from None

    def column_kind(self, table: str, column: str) -> Kind:
        return self.table(table).schema.kind(f"{table}.{column}")

    def has_column(self, table: str, column: str) -> bool:
        return table in self.tables and f"{table}.{column}" in self.tables[table].schema

    def scan(self, name: str, alias: str | None = None, columns: Iterable[str] | None = None) -> Relation:
        """Read a table under ``alias``, optionally keeping only bare ``columns``."""
        rel = self.table(name)
        self.counters[f"scan:{name}"] += 1
        self.counters["scans"] += 1
        alias = alias or name
        if columns is not None:
            from .operators import project

            wanted = [f"{name}.{c}" for c in columns]
            rel = project(rel, wanted)
        if alias != name:
            rel = Relation(rel.schema.requalify(alias), rel.rows)
        return rel

    def fork(self) -> "Database":
        """A catalog sharing this one's tables; additions do not leak back."""
        return Database(self.page_size, dict(self.tables), dict(self.stats), set(self.views), Counter())


def schema_for(columns: Iterable[tuple[str, str]]) -> Schema:
    return Schema(tuple(Column(n, Kind.parse(k)) for n, k in columns))
