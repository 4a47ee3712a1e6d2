"""Execution of inner-join graphs on the in-memory engine."""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from .cost import estimate_cardinality
from .dsl import ColRef, Comparison
from .errors import JoinGraphError
from .joingraph import INNER, JoinGraph
from .relational.catalog import Database
from .relational import kernels
from .relational.operators import Cmp, hash_inner_join, select
from .relational.relation import Column, Relation, Schema
from .subgraphs import pattern_label


def to_cmp(c: Comparison) -> Cmp:
    if isinstance(c.right, ColRef):
        return Cmp(str(c.left), c.op, right=str(c.right))
    return Cmp(str(c.left), c.op, value=c.right.value)


def scan_instance(g: JoinGraph, alias: str, db: Database, columns: Sequence[str] | None = None) -> Relation:
    """Scan one table instance with projection pushdown and its filters applied."""
    table = g.table(alias)
    if columns is None:
        needed = g.referenced_columns(alias)
        columns = [c.base_name for c in db.table(table).schema if c.base_name in needed]
    rel = db.scan(table, alias, columns)
    return select(rel, [to_cmp(f) for f in g.filters_of(alias)])


def join_order(g: JoinGraph, db: Database) -> tuple[str, ...]:
    return estimate_cardinality(g, db).order


def execute_graph(g: JoinGraph, db: Database, counters: Counter | None = None,
                  order: Sequence[str] | None = None, extra_columns: dict[str, set[str]] | None = None,
                  project_outputs: bool = True) -> Relation:
    """Evaluate an inner-join graph left-deep and project onto its outputs.

    The join order comes from the cost model unless ``order`` is given.
    ``extra_columns`` keeps additional columns per alias in the unprojected
    result (used when the caller probes it further).
    """
    if any(e.kind != INNER for e in g.edges):
        raise JoinGraphError("outer edges are only evaluated through a merged unit")
    counters = db.counters if counters is None else counters
    order = tuple(order) if order is not None else join_order(g, db)
    if sorted(order) != sorted(g.aliases):
        raise JoinGraphError(f"join order {order} does not cover {g.aliases}")

    def instance(alias):
        needed = g.referenced_columns(alias) | (extra_columns or {}).get(alias, set())
        cols = [c.base_name for c in db.table(g.table(alias)).schema if c.base_name in needed]
        return scan_instance(g, alias, db, cols)

    current = instance(order[0])
    placed = {order[0]}
    for v in order[1:]:
        edges = [e for e in g.edges if v in e.endpoints and e.other(v) in placed]
        if not edges:
            raise JoinGraphError(f"{v} has no join with {sorted(placed)}")
        on, residual = [], []
        for e in edges:
            c = e.cond
            inner_side, outer_side = (c.right, c.left) if c.right.alias == v else (c.left, c.right)
            if c.op == "=":
                on.append((str(outer_side), str(inner_side)))
            else:
                residual.append(to_cmp(c))
            counters[f"join:{pattern_label((g.table(e.endpoints[0]), g.table(e.endpoints[1])))}"] += 1
        current = hash_inner_join(current, instance(v), on, residual, counters)
        counters["joins"] += 1
        placed.add(v)
    if not project_outputs:
        return current
    return output_projection(g, current)


def output_projection(g: JoinGraph, rel: Relation) -> Relation:
    """Positional projection onto ``g.outputs`` renamed to the output names."""
    idx = tuple(rel.schema.index(f"{o.alias}.{o.column}") for o in g.outputs)
    schema = Schema(tuple(Column(o.name, rel.schema.columns[i].kind) for o, i in zip(g.outputs, idx)))
    return Relation(schema, kernels.take(rel.rows, idx))
