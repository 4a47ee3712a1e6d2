"""Join graphs of edge queries.

A join graph is an undirected multigraph: one vertex per table instance of
the query (base table plus alias) and one edge per two-alias comparison.
Each edge carries its join type (inner or outer) and its normalized
condition.  Single-alias comparisons stay attached to their vertex as
filters, and ``outputs`` lists the columns the query returns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable

from .dsl import ColRef, Comparison, Literal, ParsedQuery, normalize_comparison
from .errors import JoinGraphError

INNER = "inner"
OUTER = "outer"


@dataclass(frozen=True)
class TableInstance:
    table: str
    alias: str

    def __str__(self) -> str:
        return self.alias if self.alias == self.table else f"{self.alias}:{self.table}"


@dataclass(frozen=True)
class JoinEdge:
    """A join predicate between two table instances.

    ``cond`` is normalized (lesser qualified name on the left).  For outer
    edges ``preserved`` names the instance whose rows are never filtered.
    """

    cond: Comparison
    kind: str = INNER
    preserved: str | None = None

    @property
    def endpoints(self) -> tuple[str, str]:
        return (self.cond.left.alias, self.cond.right.alias)

    def other(self, alias: str) -> str:
        a, b = self.endpoints
        return b if alias == a else a

    def column_of(self, alias: str) -> str:
        return self.cond.left.column if self.cond.left.alias == alias else self.cond.right.column

    def touches(self, aliases) -> bool:
        a, b = self.endpoints
        return a in aliases or b in aliases

    def __str__(self) -> str:
        if self.kind == OUTER:
            return f"{self.cond} [outer, preserves {self.preserved}]"
        return str(self.cond)


@dataclass(frozen=True)
class OutputCol:
    alias: str
    column: str
    name: str


@dataclass(frozen=True)
class JoinGraph:
    vertices: tuple[TableInstance, ...]
    edges: tuple[JoinEdge, ...] = ()
    filters: tuple[Comparison, ...] = ()
    outputs: tuple[OutputCol, ...] = ()
    _tables: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        tables = {}
        for v in self.vertices:
            if v.alias in tables:
                raise JoinGraphError(f"duplicate alias {v.alias!r}")
            tables[v.alias] = v.table
        for e in self.edges:
            a, b = e.endpoints
            if a == b or a not in tables or b not in tables:
                raise JoinGraphError(f"edge {e.cond} must join two distinct instances of the graph")
        for f in self.filters:
            if f.left.alias not in tables:
                raise JoinGraphError(f"filter {f} references an unknown alias")
        for o in self.outputs:
            if o.alias not in tables:
                raise JoinGraphError(f"output {o.alias}.{o.column} references an unknown alias")
        object.__setattr__(self, "_tables", tables)

    # -- structure -------------------------------------------------------

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def aliases(self) -> list[str]:
        return [v.alias for v in self.vertices]

    def table(self, alias: str) -> str:
        return self._tables[alias]

    def filters_of(self, alias: str) -> tuple[Comparison, ...]:
        return tuple(f for f in self.filters if f.left.alias == alias)

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {a: set() for a in self.aliases}
        for e in self.edges:
            a, b = e.endpoints
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def edges_between(self, a: str, b: str) -> list[JoinEdge]:
        pair = {a, b}
        return [e for e in self.edges if set(e.endpoints) == pair]

    def components(self, exclude: Iterable[str] = ()) -> list[frozenset[str]]:
        """Connected components after deleting ``exclude``, in vertex order."""
        excluded = set(exclude)
        adj = self.adjacency()
        seen: set[str] = set()
        out = []
        for start in self.aliases:
            if start in excluded or start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                for nb in adj[stack.pop()]:
                    if nb not in excluded and nb not in comp:
                        comp.add(nb)
                        stack.append(nb)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def is_connected(self, aliases: Iterable[str] | None = None) -> bool:
        keep = set(self.aliases if aliases is None else aliases)
        if not keep:
            return False
        return len(self.components(set(self.aliases) - keep)) == 1

    def crossing_edges(self, inside: Iterable[str], outside: Iterable[str]) -> list[JoinEdge]:
        ins, outs = set(inside), set(outside)
        return [e for e in self.edges
                if (e.endpoints[0] in ins and e.endpoints[1] in outs)
                or (e.endpoints[1] in ins and e.endpoints[0] in outs)]

    def induced(self, aliases: Iterable[str], outputs: Iterable[OutputCol] = ()) -> "JoinGraph":
        keep = set(aliases)
        return JoinGraph(
            tuple(v for v in self.vertices if v.alias in keep),
            tuple(e for e in self.edges if e.endpoints[0] in keep and e.endpoints[1] in keep),
            tuple(f for f in self.filters if f.left.alias in keep),
            tuple(outputs),
        )

    def with_outputs(self, outputs: Iterable[OutputCol]) -> "JoinGraph":
        return replace(self, outputs=tuple(outputs))

    def rename(self, mapping: dict[str, str]) -> "JoinGraph":
        """Rename aliases; conditions are re-normalized."""
        def col(c: ColRef) -> ColRef:
            return ColRef(mapping.get(c.alias, c.alias), c.column)

        def cmp(c: Comparison) -> Comparison:
            right = col(c.right) if isinstance(c.right, ColRef) else c.right
            return normalize_comparison(col(c.left), c.op, right)

        return JoinGraph(
            tuple(TableInstance(v.table, mapping.get(v.alias, v.alias)) for v in self.vertices),
            sort_edges(JoinEdge(cmp(e.cond), e.kind,
                                mapping.get(e.preserved, e.preserved) if e.preserved else None)
                       for e in self.edges),
            tuple(sorted((cmp(f) for f in self.filters), key=str)),
            tuple(OutputCol(mapping.get(o.alias, o.alias), o.column, o.name) for o in self.outputs),
        )

    def referenced_columns(self, alias: str) -> set[str]:
        """Columns of ``alias`` used by edges, filters or outputs."""
        cols = set()
        for e in self.edges:
            for c in (e.cond.left, e.cond.right):
                if c.alias == alias:
                    cols.add(c.column)
        for f in self.filters:
            if f.left.alias == alias:
                cols.add(f.left.column)
            if isinstance(f.right, ColRef) and f.right.alias == alias:
                cols.add(f.right.column)
        for o in self.outputs:
            if o.alias == alias:
                cols.add(o.column)
        return cols

    # -- serialization -----------------------------------------------------

    def canonical_encoding(self) -> str:
        """Alias-preserving canonical text; equal iff the graphs are equal."""
        verts = ",".join(sorted(f"{v.alias}:{v.table}" for v in self.vertices))
        edges = ";".join(sorted(f"{e.kind}|{e.preserved or ''}|{e.cond}" for e in self.edges))
        filters = ";".join(sorted(str(f) for f in self.filters))
        outputs = ";".join(f"{o.alias}.{o.column}>{o.name}" for o in self.outputs)
        return f"V[{verts}] E[{edges}] F[{filters}] O[{outputs}]"

    def to_json(self) -> dict:
        return {
            "vertices": [{"alias": v.alias, "table": v.table} for v in self.vertices],
            "edges": [{"condition": _cmp_json(e.cond), "kind": e.kind, "preserved": e.preserved}
                      for e in self.edges],
            "filters": [_cmp_json(f) for f in self.filters],
            "outputs": [{"alias": o.alias, "column": o.column, "name": o.name} for o in self.outputs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "JoinGraph":
        return cls(
            tuple(TableInstance(v["table"], v["alias"]) for v in data["vertices"]),
            tuple(JoinEdge(_cmp_from_json(e["condition"]), e["kind"], e.get("preserved"))
                  for e in data["edges"]),
            tuple(_cmp_from_json(f) for f in data.get("filters", [])),
            tuple(OutputCol(o["alias"], o["column"], o["name"]) for o in data.get("outputs", [])),
        )

    def to_dot(self, name: str = "Q") -> str:
        lines = [f"graph {json.dumps(name)} {{"]
        for v in self.vertices:
            flt = " AND ".join(str(f) for f in self.filters_of(v.alias))
            label = f"{v.alias}: {v.table}" + (f"\\n{flt}" if flt else "")
            lines.append(f"  {json.dumps(v.alias)} [label={json.dumps(label)}];")
        for e in self.edges:
            a, b = e.endpoints
            attrs = [f"label={json.dumps(str(e.cond))}"]
            if e.kind == OUTER:
                attrs.append("style=dashed")
                attrs.append(f"taillabel={json.dumps('o' if e.preserved == a else '')}")
                attrs.append(f"headlabel={json.dumps('o' if e.preserved == b else '')}")
            lines.append(f"  {json.dumps(a)} -- {json.dumps(b)} [{', '.join(attrs)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _cmp_json(c: Comparison) -> dict:
    right = ({"column": str(c.right)} if isinstance(c.right, ColRef) else {"value": c.right.value})
    return {"left": str(c.left), "op": c.op, "right": right}


def _cmp_from_json(d: dict) -> Comparison:
    def ref(text: str) -> ColRef:
        alias, _, column = text.partition(".")
        return ColRef(alias, column)

    right = ref(d["right"]["column"]) if "column" in d["right"] else Literal(d["right"]["value"])
    return Comparison(ref(d["left"]), d["op"], right)


def sort_edges(edges: Iterable[JoinEdge]) -> tuple[JoinEdge, ...]:
    return tuple(sorted(edges, key=lambda e: (str(e.cond), e.kind, e.preserved or "")))


def build_join_graph(q: ParsedQuery, outputs: Iterable[OutputCol] | None = None) -> JoinGraph:
    """Join graph of a parsed query; every join starts out as an inner join.

    Raises :class:`JoinGraphError` if the query is a cartesian product.
    """
    if not q.from_:
        raise JoinGraphError("query has no tables")
    vertices = tuple(TableInstance(f.table, f.alias) for f in q.from_)
    edges = sort_edges(JoinEdge(c) for c in q.where if c.is_join)
    filters = tuple(sorted((c for c in q.where if not c.is_join), key=str))
    if outputs is None:
        outputs = [OutputCol(s.col.alias, s.col.column, s.name) for s in q.select]
    g = JoinGraph(vertices, edges, filters, tuple(outputs))
    parts = g.components()
    if len(parts) > 1:
        listed = " | ".join("{" + ", ".join(a for a in g.aliases if a in p) + "}" for p in parts)
        raise JoinGraphError(f"query is not connected (cartesian product): {listed}")
    return g


SRC = "__src"
DST = "__dst"


def edge_query_graph(edge) -> JoinGraph:
    """Join graph of an edge definition's query.

    Outputs are the source id, the destination id, then the properties.
    """
    outputs = [OutputCol(edge.src.alias, edge.src.column, SRC),
               OutputCol(edge.dst.alias, edge.dst.column, DST)]
    seen = {SRC, DST}
    for s in edge.properties:
        name = s.name
        while name in seen:
            name += "_"
        seen.add(name)
        outputs.append(OutputCol(s.col.alias, s.col.column, name))
    return build_join_graph(edge.query, outputs)
