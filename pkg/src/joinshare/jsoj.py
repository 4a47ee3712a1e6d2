"""Join sharing by outer join.

Two queries with a common connected subgraph S are merged into one graph:
S keeps its inner joins and every non-shared part of either query hangs
off S through its connecting edges, now marked outer with S preserved.

Execution never materializes the merged cross product.  S is evaluated
once, each part once (hashed on its connecting columns), and every S row
is then expanded separately for each origin query using only that query's
own parts.  This reproduces each origin's result with exact multiplicities.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

from .cost import CostParams, CostReport, StatsSource, merged_report
from .errors import NoCommonJoinError
from .executor import execute_graph, to_cmp
from .joingraph import OUTER, JoinEdge, JoinGraph, OutputCol, sort_edges
from .relational import kernels
from .relational.catalog import Database
from .relational.operators import Cmp, compile_predicate, distinct, hash_left_outer_join, select
from .relational.relation import Column, Relation, Schema
from .relational.values import Kind
from .subgraphs import DEFAULT_CAP, Decomposition, enumerate_decompositions, pattern_label


@dataclass(frozen=True)
class Part:
    """A non-shared subgraph attached to the shared one.

    ``aliases`` live in the merged graph's namespace; ``connecting`` edges
    are outer with the shared endpoint preserved.
    """

    origin: int
    aliases: frozenset[str]
    connecting: tuple[JoinEdge, ...]


@dataclass(frozen=True)
class MergedUnit:
    decomposition: Decomposition = field(repr=False)
    merged_graph: JoinGraph
    shared_aliases: frozenset[str]
    parts: tuple[Part, ...]
    origin_graphs: tuple[JoinGraph, JoinGraph]
    # origin alias -> merged alias, per origin
    renames: tuple[dict, dict] = field(repr=False, compare=False)
    labels: tuple[str, str] = ("Q1", "Q2")

    @property
    def shared_graph(self) -> JoinGraph:
        return self.merged_graph.induced(self.shared_aliases)

    @property
    def part_graphs(self) -> list[JoinGraph]:
        return [self.merged_graph.induced(p.aliases) for p in self.parts]

    @property
    def outer_edges(self) -> list[JoinEdge]:
        return [e for e in self.merged_graph.edges if e.kind == OUTER]

    def parts_of(self, origin: int) -> list[int]:
        return [k for k, p in enumerate(self.parts) if p.origin == origin]

    def origin_outputs(self, origin: int) -> list[OutputCol]:
        ren = self.renames[origin]
        return [OutputCol(ren[o.alias], o.column, o.name) for o in self.origin_graphs[origin].outputs]

    def report(self, stats: StatsSource, p: CostParams) -> CostReport:
        return merged_report(self.shared_graph, self.part_graphs, self.origin_graphs, stats, p,
                             f"Join({self.labels[0]} + {self.labels[1]})")

    def recipe(self) -> dict:
        """How each origin's rows are recovered from the merged evaluation."""
        out = {}
        for i in (0, 1):
            out[self.labels[i]] = {
                "parts": [sorted(self.parts[k].aliases) for k in self.parts_of(i)],
                "outputs": [{"alias": o.alias, "column": o.column, "name": o.name}
                            for o in self.origin_outputs(i)],
            }
        return out


def _fresh(alias: str, taken: set[str]) -> str:
    n = 2
    while f"{alias}_{n}" in taken:
        n += 1
    return f"{alias}_{n}"


def build_merged(d: Decomposition, labels: tuple[str, str] = ("Q1", "Q2")) -> MergedUnit:
    """Assemble the merged graph for one decomposition."""
    g1, g2 = d.graphs
    ren1 = {a: a for a in g1.aliases}
    taken = set(g1.aliases)
    ren2 = {b: a for a, b in d.mapping}
    for b in g2.aliases:
        if b not in ren2:
            ren2[b] = b if b not in taken else _fresh(b, taken | set(g2.aliases))
            taken.add(ren2[b])
    g2r = g2.rename(ren2)
    shared = frozenset(a for a, _ in d.mapping)

    vertices = list(g1.vertices)
    edges = list(g1.induced(shared).edges)
    filters = list(g1.filters)
    parts = []
    for i, (g, ren) in enumerate(((g1, ren1), (g2r, None))):
        for comp in d.non_shared[i]:
            aliases = frozenset(comp if ren is not None else (ren2[b] for b in comp))
            if i == 1:
                vertices += [v for v in g.vertices if v.alias in aliases]
                filters += [f for f in g.filters if f.left.alias in aliases]
            edges += g.induced(aliases).edges
            conn = []
            for e in g.crossing_edges(aliases, shared):
                keep = e.endpoints[0] if e.endpoints[0] in shared else e.endpoints[1]
                conn.append(JoinEdge(e.cond, OUTER, keep))
            edges += conn
            parts.append(Part(i, aliases, tuple(sort_edges(conn))))
    outputs = [OutputCol(ren1[o.alias], o.column, f"{labels[0]}.{o.name}") for o in g1.outputs]
    outputs += [OutputCol(ren2[o.alias], o.column, f"{labels[1]}.{o.name}") for o in g2.outputs]
    merged = JoinGraph(tuple(vertices), sort_edges(edges), tuple(sorted(filters, key=str)), tuple(outputs))
    return MergedUnit(d, merged, shared, tuple(parts), (g1, g2), (ren1, ren2), labels)


def merge_candidates(g1: JoinGraph, g2: JoinGraph, labels: tuple[str, str] = ("Q1", "Q2"),
                     cap: int = DEFAULT_CAP) -> list[MergedUnit]:
    return [build_merged(d, labels) for d in enumerate_decompositions(g1, g2, cap)]


def merge_pair(g1: JoinGraph, g2: JoinGraph, stats: StatsSource, p: CostParams = CostParams(),
               labels: tuple[str, str] = ("Q1", "Q2"), cap: int = DEFAULT_CAP) -> MergedUnit:
    """The cheapest merged unit over all decompositions; ties by canonical encoding."""
    units = merge_candidates(g1, g2, labels, cap)
    if not units:
        raise NoCommonJoinError("the two queries share no join")
    return min(units, key=lambda u: (u.report(stats, p).total, u.merged_graph.canonical_encoding()))


# --------------------------------------------------------------------------- execution


def _needed_columns(unit: MergedUnit) -> dict[str, set[str]]:
    need: dict[str, set[str]] = {}
    for i in (0, 1):
        for o in unit.origin_outputs(i):
            need.setdefault(o.alias, set()).add(o.column)
    for part in unit.parts:
        for e in part.connecting:
            for c in (e.cond.left, e.cond.right):
                need.setdefault(c.alias, set()).add(c.column)
    return need


class _Probe:
    """Hash table over one part's result keyed on its connecting columns."""

    def __init__(self, part: Part, shared_schema: Schema, rel: Relation):
        self.rel = rel
        skeys, pkeys, residual = [], [], []
        for e in part.connecting:
            c = e.cond
            s_side, p_side = (c.left, c.right) if c.left.alias not in part.aliases else (c.right, c.left)
            if c.op == "=":
                skeys.append(shared_schema.index(str(s_side)))
                pkeys.append(rel.schema.index(str(p_side)))
            else:
                residual.append(to_cmp(c))
        self.skeys = tuple(skeys)
        self.table = kernels.build_table(rel.rows, tuple(pkeys)) if pkeys else None
        self.residual = compile_predicate(shared_schema.concat(rel.schema), residual) if residual else None

    def matches(self, row: tuple) -> list:
        if self.table is None:
            cands = self.rel.rows
        else:
            if len(self.skeys) == 1:
                key = row[self.skeys[0]]
            else:
                key = tuple(row[i] for i in self.skeys)
                if None in key:
                    return []
            if key is None:
                return []
            cands = self.table.get(key, ())
        if self.residual is None:
            return list(cands)
        return [m for m in cands if self.residual(row + m)]


def _evaluate_pieces(unit: MergedUnit, db: Database, counters: Counter):
    need = _needed_columns(unit)
    shared_g = unit.shared_graph
    sq_s = execute_graph(shared_g, db, counters, extra_columns=need, project_outputs=False)
    parts = []
    for k, (part, pg) in enumerate(zip(unit.parts, unit.part_graphs)):
        rel = execute_graph(pg, db, counters, extra_columns=need, project_outputs=False)
        parts.append(rel)
        for e in part.connecting:
            g = unit.merged_graph
            counters[f"join:{pattern_label((g.table(e.endpoints[0]), g.table(e.endpoints[1])))}"] += 1
        counters["joins"] += 1
    return sq_s, parts


def execute_merged(unit: MergedUnit, db: Database, counters: Counter | None = None) -> tuple[Relation, Relation]:
    """Results of both origin queries from one shared evaluation."""
    counters = db.counters if counters is None else counters
    sq_s, part_rels = _evaluate_pieces(unit, db, counters)
    probes = [_Probe(p, sq_s.schema, r) for p, r in zip(unit.parts, part_rels)]
    counters["tuples_built"] += sum(len(r) for r in part_rels)

    plans = []
    for i in (0, 1):
        mine = unit.parts_of(i)
        slot = {k: n + 1 for n, k in enumerate(mine)}
        where = {}
        for k in mine:
            for a in unit.parts[k].aliases:
                where[a] = k
        pos = []
        kinds = []
        for o in unit.origin_outputs(i):
            col = f"{o.alias}.{o.column}"
            if o.alias in where:
                rel = part_rels[where[o.alias]]
                pos.append((slot[where[o.alias]], rel.schema.index(col)))
                kinds.append(rel.schema.kind(col))
            else:
                pos.append((0, sq_s.schema.index(col)))
                kinds.append(sq_s.schema.kind(col))
        schema = Schema(tuple(Column(o.name, kd) for o, kd in zip(unit.origin_outputs(i), kinds)))
        plans.append((mine, pos, schema, []))

    for row in sq_s.rows:
        counters["tuples_probed"] += 1
        cache: dict[int, list] = {}
        for mine, pos, _, out in plans:
            lists = []
            for k in mine:
                if k not in cache:
                    cache[k] = probes[k].matches(row)
                if not cache[k]:
                    lists = None
                    break
                lists.append(cache[k])
            if lists is None:
                continue
            for combo in itertools.product(*lists):
                src = (row,) + combo
                out.append(tuple(src[s][j] for s, j in pos))
    results = tuple(Relation(schema, out) for _, _, schema, out in plans)
    counters["tuples_emitted"] += sum(len(r) for r in results)
    return results  # type: ignore[return-value]


def execute_merged_naive(unit: MergedUnit, db: Database, counters: Counter | None = None) -> Relation:
    """Materialize the merged outer-join relation with one marker column per part.

    A part's marker is TRUE where the part matched and null where the row
    was padded.
    """
    counters = db.counters if counters is None else counters
    sq_s, part_rels = _evaluate_pieces(unit, db, counters)
    current = sq_s
    for k, (part, rel) in enumerate(zip(unit.parts, part_rels)):
        marked = Relation(rel.schema.concat(Schema((Column(f"__u{k}.matched", Kind.BOOL),))),
                          [r + (True,) for r in rel.rows])
        on, residual = [], []
        for e in part.connecting:
            c = e.cond
            s_side, p_side = (c.left, c.right) if c.left.alias not in part.aliases else (c.right, c.left)
            if c.op == "=":
                on.append((str(s_side), str(p_side)))
            else:
                residual.append(to_cmp(c))
        current = hash_left_outer_join(current, marked, on, residual, counters)
    return current


def recover_from_naive(unit: MergedUnit, merged: Relation, origin: int) -> Relation:
    """Set-projection of one origin's result from the naive merged relation."""
    conds = [Cmp(f"__u{k}.matched", "=", value=True) for k in unit.parts_of(origin)]
    rows = select(merged, conds)
    outs = unit.origin_outputs(origin)
    idx = tuple(rows.schema.index(f"{o.alias}.{o.column}") for o in outs)
    schema = Schema(tuple(Column(o.name, rows.schema.columns[i].kind) for o, i in zip(outs, idx)))
    return distinct(Relation(schema, kernels.take(rows.rows, idx)))
