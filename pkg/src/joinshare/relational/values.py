"""Value kinds, text parsing, byte sizing and null-aware ordering."""

from __future__ import annotations

import enum
from typing import Any, Union

from ..errors import SchemaError

Value = Union[int, float, str, bool, None]


class Kind(str, enum.Enum):
    INT = "int"
    FLOAT = "float"
    TEXT = "text"
    BOOL = "bool"

    @classmethod
    def parse(cls, name: str) -> "Kind":
        aliases = {
            "int": cls.INT, "integer": cls.INT, "int64": cls.INT, "bigint": cls.INT,
            "float": cls.FLOAT, "double": cls.FLOAT, "float64": cls.FLOAT, "real": cls.FLOAT,
            "text": cls.TEXT, "str": cls.TEXT, "string": cls.TEXT, "varchar": cls.TEXT,
            "bool": cls.BOOL, "boolean": cls.BOOL,
        }
        try:
            return aliases[name.strip().lower()]
        except KeyError:
            raise SchemaError(f"unknown value kind {name!r}") from None

    @property
    def numeric(self) -> bool:
        return self in (Kind.INT, Kind.FLOAT)


_TRUE = {"true", "t", "1", "yes"}
_FALSE = {"false", "f", "0", "no"}


def parse_value(text: str, kind: Kind) -> Value:
    """Parse one delimited-text field; the empty field is the null marker."""
    if text == "":
        return None
    if kind is Kind.INT:
        return int(text)
    if kind is Kind.FLOAT:
        return float(text)
    if kind is Kind.BOOL:
        low = text.strip().lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"not a boolean: {text!r}")
    return text


def format_value(value: Value) -> str:
    if value is None:
        return ""
    if value is True:
        return "true"
    if value is False:
        return "false"
    return str(value)


def kind_of(value: Any) -> Kind | None:
    if value is None:
        return None
    if isinstance(value, bool):
        return Kind.BOOL
    if isinstance(value, int):
        return Kind.INT
    if isinstance(value, float):
        return Kind.FLOAT
    if isinstance(value, str):
        return Kind.TEXT
    raise SchemaError(f"unsupported value {value!r}")


def conforms(value: Value, kind: Kind) -> bool:
    if value is None:
        return True
    actual = kind_of(value)
    return actual is kind or (kind is Kind.FLOAT and actual is Kind.INT)


def compatible(a: Kind, b: Kind) -> bool:
    """Whether values of the two kinds may be compared or joined."""
    return a is b or (a.numeric and b.numeric)


# Serialized widths: fixed 8 bytes for numbers, 1 for booleans and nulls,
# a 4-byte length prefix plus UTF-8 payload for text.
def value_nbytes(value: Value) -> int:
    if value is None or value is True or value is False:
        return 1
    if isinstance(value, str):
        return 4 + len(value.encode("utf-8"))
    return 8


def row_nbytes(row: tuple) -> int:
    return sum(value_nbytes(v) for v in row)


_KIND_RANK = {Kind.BOOL: 0, Kind.INT: 1, Kind.FLOAT: 1, Kind.TEXT: 2}


def sort_key(value: Value) -> tuple:
    """Total order over values: null first, then by kind, then by value."""
    if value is None:
        return (0,)
    return (1, _KIND_RANK[kind_of(value)], value)


def row_sort_key(row: tuple) -> tuple:
    return tuple(sort_key(v) for v in row)
