"""Join sharing by materialized view.

A connected pattern occurring at least twice across the queries (a query
may contribute several occurrences) becomes a view.  Each consumer has
every occurrence collapsed into a single vertex that scans the view.  The
view keeps only the columns its consumers read outside the pattern: output
columns and columns of edges leaving the occurrence.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .dsl import ColRef, normalize_comparison
from .errors import CatalogError, ViewOverlapError
from .executor import execute_graph
from .joingraph import JoinEdge, JoinGraph, OutputCol, TableInstance, sort_edges
from .relational.catalog import Database
from .relational.relation import Relation
from .subgraphs import DEFAULT_CAP, Occurrence, pattern_label, pattern_occurrences


def view_column(def_alias: str, column: str) -> str:
    return f"{def_alias}__{column}"


@dataclass(frozen=True)
class ViewDef:
    """A materialized view over one pattern.

    ``def_aliases[k]`` names pattern vertex ``k`` inside ``definition``;
    each occurrence lists the consumer aliases playing those vertices.
    """

    name: str
    encoding: str
    tables: tuple[str, ...]
    def_aliases: tuple[str, ...]
    definition: JoinGraph
    occurrences: tuple[Occurrence, ...]

    @property
    def label(self) -> str:
        return pattern_label(self.tables)

    @property
    def columns(self) -> list[str]:
        return [o.name for o in self.definition.outputs]

    def consumers(self) -> list[int]:
        return sorted({o.query for o in self.occurrences})

    def occurrences_in(self, query: int) -> list[Occurrence]:
        return [o for o in self.occurrences if o.query == query]

    def to_json(self) -> dict:
        return {"name": self.name, "pattern": self.label, "definition": self.definition.to_json(),
                "columns": self.columns,
                "occurrences": [{"query": o.query, "aliases": list(o.aliases)} for o in self.occurrences]}


def _definition_aliases(tables: Sequence[str]) -> tuple[str, ...]:
    counts = Counter(tables)
    seen: Counter = Counter()
    out = []
    for t in tables:
        if counts[t] == 1:
            out.append(t)
        else:
            seen[t] += 1
            out.append(f"{t}{seen[t]}")
    return tuple(out)


def _overlapping(occs: Sequence[Occurrence]) -> bool:
    by_query: dict[int, set[str]] = {}
    for o in occs:
        used = by_query.setdefault(o.query, set())
        if used & o.vertex_set:
            return True
        used |= o.vertex_set
    return False


def make_view(name: str, encoding: str, tables: tuple[str, ...], occs: Sequence[Occurrence],
              graphs: Sequence[JoinGraph]) -> ViewDef:
    """Build a view definition whose columns cover every consumer's needs."""
    if _overlapping(occs):
        raise ViewOverlapError(f"occurrences of {pattern_label(tables)} overlap within a query")
    def_aliases = _definition_aliases(tables)
    need: list[set[str]] = [set() for _ in tables]
    for occ in occs:
        g = graphs[occ.query]
        pos = {a: k for k, a in enumerate(occ.aliases)}
        for o in g.outputs:
            if o.alias in pos:
                need[pos[o.alias]].add(o.column)
        for e in g.edges:
            a, b = e.endpoints
            if (a in pos) != (b in pos):
                inside = a if a in pos else b
                need[pos[inside]].add(e.column_of(inside))
    first = occs[0]
    g0 = graphs[first.query]
    ren = {a: def_aliases[k] for k, a in enumerate(first.aliases)}
    base = g0.induced(first.aliases).rename(ren)
    if not any(need):
        # keep multiplicities observable even if nothing outside reads the view
        e = base.edges[0]
        need[def_aliases.index(e.cond.left.alias)].add(e.cond.left.column)
    outputs = []
    for k, cols in enumerate(need):
        for c in sorted(cols):
            outputs.append(OutputCol(def_aliases[k], c, view_column(def_aliases[k], c)))
    # definition vertices in pattern order
    vertices = tuple(TableInstance(t, a) for t, a in zip(tables, def_aliases))
    definition = JoinGraph(vertices, base.edges, base.filters, tuple(outputs))
    return ViewDef(name, encoding, tuple(tables), def_aliases, definition, tuple(occs))


def propose_views(graphs: Sequence[JoinGraph], taken_names: set[str] | frozenset[str] = frozenset(),
                  prefix: str = "V", cap: int = DEFAULT_CAP, first_index: int = 1) -> list[ViewDef]:
    """One view per pattern with at least two non-overlapping occurrences.

    Ordered by pattern size descending then canonical encoding; patterns
    with overlapping occurrences inside one query are skipped.
    """
    found = pattern_occurrences(graphs, cap)
    keyed = sorted(found.items(), key=lambda kv: (-len(kv[1][0]), kv[0]))
    views = []
    n = first_index
    taken = set(taken_names)
    for enc, (tables, occs) in keyed:
        if len(occs) < 2 or _overlapping(occs):
            continue
        while f"{prefix}{n}" in taken:
            n += 1
        name = f"{prefix}{n}"
        taken.add(name)
        views.append(make_view(name, enc, tables, occs, graphs))
    return views


def rewrite_with_view(g: JoinGraph, view: ViewDef, occurrences: Sequence[Occurrence] | None = None) -> JoinGraph:
    """Replace each occurrence in ``g`` with one vertex scanning ``view``."""
    occs = list(occurrences) if occurrences is not None else None
    if occs is None:
        raise ValueError("occurrences in this query must be given")
    if not occs:
        return g
    if _overlapping(occs):
        raise ViewOverlapError(f"occurrences of {view.name} overlap")
    taken = set(g.aliases)
    where: dict[str, tuple[str, str]] = {}  # consumer alias -> (instance alias, definition alias)
    inst_aliases = []
    for j, occ in enumerate(occs):
        inst = view.name if len(occs) == 1 else f"{view.name}_{j + 1}"
        while inst in taken and inst not in occ.aliases:
            inst += "_"
        taken.add(inst)
        inst_aliases.append(inst)
        for k, a in enumerate(occ.aliases):
            if g.table(a) != view.tables[k]:
                raise ViewOverlapError(f"{a} does not match pattern vertex {view.def_aliases[k]}")
            where[a] = (inst, view.def_aliases[k])

    def ref(c: ColRef) -> ColRef:
        if c.alias in where:
            inst, da = where[c.alias]
            return ColRef(inst, view_column(da, c.column))
        return c

    vertices = []
    placed = set()
    for v in g.vertices:
        if v.alias in where:
            inst = where[v.alias][0]
            if inst not in placed:
                placed.add(inst)
                vertices.append(TableInstance(view.name, inst))
        else:
            vertices.append(v)
    edges = []
    for e in g.edges:
        a, b = e.endpoints
        if a in where and b in where and where[a][0] == where[b][0]:
            continue
        cond = normalize_comparison(ref(e.cond.left), e.cond.op, ref(e.cond.right))
        pres = e.preserved
        if pres is not None and pres in where:
            pres = where[pres][0]
        edges.append(JoinEdge(cond, e.kind, pres))
    filters = [f for f in g.filters if f.left.alias not in where]
    outputs = []
    for o in g.outputs:
        if o.alias in where:
            inst, da = where[o.alias]
            outputs.append(OutputCol(inst, view_column(da, o.column), o.name))
        else:
            outputs.append(o)
    return JoinGraph(tuple(vertices), sort_edges(edges), tuple(sorted(filters, key=str)), tuple(outputs))


def view_order(views: Sequence[ViewDef]) -> list[ViewDef]:
    """Views sorted so every view comes after the views it reads."""
    names = {v.name for v in views}
    done: set[str] = set()
    out = []
    pending = list(views)
    while pending:
        progressed = False
        for v in list(pending):
            deps = {t for t in v.tables if t in names}
            if deps <= done:
                out.append(v)
                done.add(v.name)
                pending.remove(v)
                progressed = True
        if not progressed:
            raise CatalogError("views depend on each other cyclically")
    return out


def materialize_views(views: Sequence[ViewDef], db: Database, counters: Counter | None = None) -> None:
    for v in view_order(views):
        rel = execute_graph(v.definition, db, counters)
        db.materialize(rel, v.name)


def execute_with_views(views: Sequence[ViewDef], rewritten: Sequence[JoinGraph], db: Database,
                       counters: Counter | None = None) -> list[Relation]:
    """Materialize every view once, then run the rewritten queries against them."""
    materialize_views(views, db, counters)
    return [execute_graph(g, db, counters) for g in rewritten]


def apply_view(graphs: Sequence[JoinGraph], view: ViewDef) -> list[JoinGraph]:
    """Rewrite every consumer of ``view`` among ``graphs`` (others unchanged)."""
    return [rewrite_with_view(g, view, view.occurrences_in(i)) if view.occurrences_in(i) else g
            for i, g in enumerate(graphs)]

