"""Schemas and immutable in-memory relations."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import SchemaError
from .values import Kind, conforms, row_sort_key


@dataclass(frozen=True)
class Column:
    name: str
    kind: Kind

    @property
    def qualifier(self) -> str | None:
        head, dot, _ = self.name.partition(".")
        return head if dot else None

    @property
    def base_name(self) -> str:
        return self.name.rpartition(".")[2]


@dataclass(frozen=True)
class Schema:
    columns: tuple[Column, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        index = {}
        for i, col in enumerate(self.columns):
            if col.name in index:
                raise SchemaError(f"duplicate column {col.name!r} in schema")
            index[col.name] = i
        object.__setattr__(self, "_index", index)

    @classmethod
    def of(cls, *pairs: tuple[str, Kind | str]) -> "Schema":
        return cls(tuple(Column(n, k if isinstance(k, Kind) else Kind.parse(k)) for n, k in pairs))

    def __len__(self) -> int:
        return len(self.columns)

    def __iter__(self):
        return iter(self.columns)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"unknown column {name!r}; have {self.names}") from None

    def column(self, name: str) -> Column:
        return self.columns[self.index(name)]

    def kind(self, name: str) -> Kind:
        return self.column(name).kind

    def concat(self, other: "Schema") -> "Schema":
        return Schema(self.columns + other.columns)

    def select(self, names: Sequence[str]) -> "Schema":
        return Schema(tuple(self.column(n) for n in names))

    def requalify(self, qualifier: str) -> "Schema":
        return Schema(tuple(Column(f"{qualifier}.{c.base_name}", c.kind) for c in self.columns))

    def rename(self, mapping: dict[str, str]) -> "Schema":
        return Schema(tuple(Column(mapping.get(c.name, c.name), c.kind) for c in self.columns))


class Relation:
    """A schema plus an ordered multiset of rows.

    Rows are plain tuples.  Relations are never mutated after construction;
    operators always build new ones.
    """

    __slots__ = ("schema", "rows")

    def __init__(self, schema: Schema, rows: Iterable[tuple] = ()):
        self.schema = schema
        self.rows = rows if isinstance(rows, list) else list(rows)

    @classmethod
    def checked(cls, schema: Schema, rows: Iterable[tuple]) -> "Relation":
        rel = cls(schema, [tuple(r) for r in rows])
        rel.validate()
        return rel

    def validate(self) -> None:
        arity = len(self.schema)
        kinds = [c.kind for c in self.schema]
        for n, row in enumerate(self.rows):
            if len(row) != arity:
                raise SchemaError(f"row {n} has {len(row)} values, schema has {arity}")
            for value, kind, col in zip(row, kinds, self.schema):
                if not conforms(value, kind):
                    raise SchemaError(f"row {n}: {value!r} is not a {kind.value} for {col.name}")

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __repr__(self) -> str:
        return f"Relation({self.schema.names}, {len(self.rows)} rows)"

    def column_values(self, name: str) -> list:
        i = self.schema.index(name)
        return [r[i] for r in self.rows]

    def multiset(self) -> Counter:
        return Counter(self.rows)

    def sorted_rows(self) -> list[tuple]:
        return sorted(self.rows, key=row_sort_key)

    def same_multiset(self, other: "Relation") -> bool:
        return self.schema.names == other.schema.names and self.multiset() == other.multiset()
