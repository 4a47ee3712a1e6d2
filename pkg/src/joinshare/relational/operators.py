"""Relational operators over immutable relations.

Every operator has multiset semantics; duplicates are only removed by
:func:`distinct` or ``project(..., dedup=True)``.  A null in a join key or in
either side of a comparison never satisfies the predicate.
"""

from __future__ import annotations

import operator
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

from ..errors import SchemaError
from . import kernels
from .relation import Relation, Schema
from .values import Value, compatible, kind_of

COMPARATORS: dict[str, Callable[[object, object], bool]] = {
    "=": operator.eq,
    "<>": operator.ne,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}

FLIPPED = {"=": "=", "<>": "<>", "!=": "<>", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


@dataclass(frozen=True)
class Cmp:
    """``left op right`` where right is a column (``right``) or a constant (``value``)."""

    left: str
    op: str
    right: str | None = None
    value: Value = None

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise SchemaError(f"unsupported comparison operator {self.op!r}")


def compile_predicate(schema: Schema, conds: Sequence[Cmp]) -> Callable[[tuple], bool]:
    """Compile a conjunction into a row predicate; nulls fail every comparison."""
    tests = []
    for c in conds:
        li = schema.index(c.left)
        fn = COMPARATORS[c.op]
        if c.right is not None:
            ri = schema.index(c.right)
            if not compatible(schema.kind(c.left), schema.kind(c.right)):
                raise SchemaError(f"cannot compare {c.left} with {c.right}")
            tests.append((li, ri, None, fn))
        else:
            if c.value is None:
                raise SchemaError("comparison against null constant is never true")
            vk = kind_of(c.value)
            if not compatible(schema.kind(c.left), vk):
                raise SchemaError(f"cannot compare {c.left} with {c.value!r}")
            tests.append((li, None, c.value, fn))

    def check(row: tuple) -> bool:
        for li, ri, const, fn in tests:
            a = row[li]
            b = row[ri] if ri is not None else const
            if a is None or b is None or not fn(a, b):
                return False
        return True

    return check


def _key_positions(left: Schema, right: Schema, on: Sequence[tuple[str, str]]):
    lidx, ridx = [], []
    for lcol, rcol in on:
        li, ri = left.index(lcol), right.index(rcol)
        lk, rk = left.kind(lcol), right.kind(rcol)
        if not compatible(lk, rk):
            raise SchemaError(f"kind mismatch joining {lcol} ({lk.value}) with {rcol} ({rk.value})")
        lidx.append(li)
        ridx.append(ri)
    return tuple(lidx), tuple(ridx)


def _residual(left: Schema, right: Schema, residual: Sequence[Cmp]):
    if not residual:
        return None
    check = compile_predicate(left.concat(right), residual)
    return lambda row, match: check(row + match)


def _join(left: Relation, right: Relation, on, residual, outer: bool, counters: Counter | None):
    schema = left.schema.concat(right.schema)
    if not on:
        return nested_loop_join(left, right, residual, outer=outer, counters=counters)
    lidx, ridx = _key_positions(left.schema, right.schema, on)
    table = kernels.build_table(right.rows, ridx)
    pad = (None,) * len(right.schema)
    rows = kernels.probe_table(left.rows, lidx, table, outer, pad,
                               _residual(left.schema, right.schema, residual))
    if counters is not None:
        counters["tuples_built"] += len(right.rows)
        counters["tuples_probed"] += len(left.rows)
        counters["tuples_emitted"] += len(rows)
    return Relation(schema, rows)


def hash_inner_join(left: Relation, right: Relation, on: Sequence[tuple[str, str]],
                    residual: Sequence[Cmp] = (), counters: Counter | None = None) -> Relation:
    """Equi-join ``left`` and ``right`` on column pairs ``on``; output is left ++ right.

    The hash table is built on ``right``; ``left`` probes it.  ``residual``
    conjuncts refer to the concatenated schema and filter matched pairs.
    """
    return _join(left, right, on, residual, False, counters)


def hash_left_outer_join(outer: Relation, inner: Relation, on: Sequence[tuple[str, str]],
                         residual: Sequence[Cmp] = (), counters: Counter | None = None) -> Relation:
    """Left outer equi-join: unmatched ``outer`` rows are padded with nulls."""
    return _join(outer, inner, on, residual, True, counters)


def nested_loop_join(left: Relation, right: Relation, conds: Sequence[Cmp], outer: bool = False,
                     counters: Counter | None = None) -> Relation:
    """Fallback for joins without an equality conjunct."""
    schema = left.schema.concat(right.schema)
    check = compile_predicate(schema, conds)
    pad = (None,) * len(right.schema)
    rows = []
    for lrow in left.rows:
        matched = False
        for rrow in right.rows:
            row = lrow + rrow
            if check(row):
                rows.append(row)
                matched = True
        if outer and not matched:
            rows.append(lrow + pad)
    if counters is not None:
        counters["tuples_probed"] += len(left.rows) * len(right.rows)
        counters["tuples_emitted"] += len(rows)
    return Relation(schema, rows)


def select(rel: Relation, conds: Sequence[Cmp]) -> Relation:
    if not conds:
        return rel
    check = compile_predicate(rel.schema, conds)
    return Relation(rel.schema, [r for r in rel.rows if check(r)])


def project(rel: Relation, columns: Sequence[str], dedup: bool = False) -> Relation:
    idx = tuple(rel.schema.index(c) for c in columns)
    schema = rel.schema.select(columns)
    if idx == tuple(range(len(rel.schema))):
        rows = rel.rows
    else:
        rows = kernels.take(rel.rows, idx)
    out = Relation(schema, rows)
    return distinct(out) if dedup else out


def distinct(rel: Relation) -> Relation:
    """Collapse the multiset to a set, keeping first occurrences in order."""
    return Relation(rel.schema, list(dict.fromkeys(rel.rows)))


def rename(rel: Relation, mapping: dict[str, str]) -> Relation:
    return Relation(rel.schema.rename(mapping), rel.rows)
