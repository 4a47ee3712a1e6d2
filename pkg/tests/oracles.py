"""Independent reference implementations and random instance builders.

Nothing here calls the executor, the cost model or the subgraph matcher;
the oracles work directly on stored rows.
"""

from __future__ import annotations

import itertools
import operator
import random
from collections import Counter

from joinshare.dsl import ColRef, Literal, normalize_comparison
from joinshare.joingraph import JoinEdge, JoinGraph, OutputCol, TableInstance, sort_edges
from joinshare.relational.catalog import Database

OPS = {"=": operator.eq, "<>": operator.ne, "<": operator.lt, "<=": operator.le,
       ">": operator.gt, ">=": operator.ge}


def holds(a, op, b) -> bool:
    return a is not None and b is not None and OPS[op](a, b)


# --------------------------------------------------------------------------- relational oracles


def nl_join(left_rows, right_rows, pairs):
    """Nested-loop equi-join on positional key pairs."""
    return [l + r for l in left_rows for r in right_rows
            if all(holds(l[i], "=", r[j]) for i, j in pairs)]


def nl_anti(left_rows, right_rows, pairs):
    return [l for l in left_rows
            if not any(all(holds(l[i], "=", r[j]) for i, j in pairs) for r in right_rows)]


# --------------------------------------------------------------------------- join graph oracle


def _bind_order(g: JoinGraph) -> list[str]:
    adj = g.adjacency()
    order = [g.aliases[0]]
    seen = set(order)
    k = 0
    while k < len(order):
        for nb in sorted(adj[order[k]]):
            if nb not in seen:
                seen.add(nb)
                order.append(nb)
        k += 1
    order += [a for a in g.aliases if a not in seen]
    return order


def evaluate(g: JoinGraph, db: Database) -> Counter:
    """Multiset of output tuples of an inner-join graph, by backtracking."""
    order = _bind_order(g)
    rows = {}
    cols = {}
    for a in g.aliases:
        rel = db.tables[g.table(a)]
        cols[a] = {c.base_name: i for i, c in enumerate(rel.schema)}
        rows[a] = rel.rows

    def value(binding, ref: ColRef):
        return binding[ref.alias][cols[ref.alias][ref.column]]

    def ok(binding, c):
        right = value(binding, c.right) if isinstance(c.right, ColRef) else c.right.value
        return holds(value(binding, c.left), c.op, right)

    checks = {a: [] for a in order}
    for pos, a in enumerate(order):
        bound = set(order[:pos + 1])
        for e in g.edges:
            if a in e.endpoints and e.other(a) in bound:
                checks[a].append(e.cond)
        checks[a] += list(g.filters_of(a))

    out: Counter = Counter()
    binding = {}

    def step(k):
        if k == len(order):
            out[tuple(value(binding, ColRef(o.alias, o.column)) for o in g.outputs)] += 1
            return
        a = order[k]
        for r in rows[a]:
            binding[a] = r
            if all(ok(binding, c) for c in checks[a]):
                step(k + 1)
        binding.pop(a, None)

    step(0)
    return out


# --------------------------------------------------------------------------- random instances

COLUMNS = ("k1", "k2", "k3", "v")


def random_db(rng: random.Random, tables=("T0", "T1", "T2", "T3", "T4"), max_rows: int = 50,
              domain: int = 12, null_rate: float = 0.05) -> Database:
    db = Database()
    for t in tables:
        n = rng.randint(0, max_rows)
        rows = []
        for _ in range(n):
            row = []
            for c in COLUMNS:
                if c != "v" and rng.random() < null_rate:
                    row.append(None)
                else:
                    row.append(rng.randint(1, domain if c != "v" else 30))
            rows.append(tuple(row))
        db.add_rows(t, [(c, "int") for c in COLUMNS], rows)
    return db


def edge(a: str, ca: str, op: str, b: str, cb: str, kind: str = "inner") -> JoinEdge:
    return JoinEdge(normalize_comparison(ColRef(a, ca), op, ColRef(b, cb)), kind)


def random_edge(rng: random.Random, a: str, b: str) -> JoinEdge:
    op = "=" if rng.random() < 0.85 else rng.choice(["<", ">=", "<>"])
    return edge(a, rng.choice(COLUMNS[:3]), op, b, rng.choice(COLUMNS[:3]))


class GraphBuilder:
    """Accumulates vertices/edges under fresh aliases."""

    def __init__(self):
        self.vertices: list[TableInstance] = []
        self.edges: list[JoinEdge] = []
        self.filters = []
        self.counts: Counter = Counter()

    def add(self, table: str) -> str:
        self.counts[table] += 1
        alias = table if self.counts[table] == 1 else f"{table}_{self.counts[table]}"
        self.vertices.append(TableInstance(table, alias))
        return alias

    def build(self, rng: random.Random, n_outputs: int | None = None) -> JoinGraph:
        aliases = [v.alias for v in self.vertices]
        n = n_outputs if n_outputs is not None else rng.randint(1, 3)
        outs = [OutputCol(rng.choice(aliases), rng.choice(COLUMNS), f"o{i}") for i in range(n)]
        return JoinGraph(tuple(self.vertices), sort_edges(self.edges),
                         tuple(sorted(self.filters, key=str)), tuple(outs))


def core_pattern(rng: random.Random, tables, size: int):
    """A random connected pattern: (tables, edges as (i, ca, op, j, cb))."""
    ts = [rng.choice(tables) for _ in range(size)]
    es = []
    for k in range(1, size):
        j = rng.randrange(k)
        op = "=" if rng.random() < 0.85 else rng.choice(["<", ">="])
        es.append((j, rng.choice(COLUMNS[:3]), op, k, rng.choice(COLUMNS[:3])))
    if size >= 3 and rng.random() < 0.3:
        i, j = rng.sample(range(size), 2)
        es.append((i, rng.choice(COLUMNS[:3]), "=", j, rng.choice(COLUMNS[:3])))
    return ts, es


def embed(b: GraphBuilder, pattern) -> list[str]:
    ts, es = pattern
    aliases = [b.add(t) for t in ts]
    for i, ca, op, j, cb in es:
        b.edges.append(edge(aliases[i], ca, op, aliases[j], cb))
    return aliases


def extend(rng: random.Random, b: GraphBuilder, tables, extra: int) -> None:
    added = []
    for _ in range(extra):
        anchor = rng.choice([v.alias for v in b.vertices])
        new = b.add(rng.choice(tables))
        b.edges.append(random_edge(rng, anchor, new))
        added.append(new)
    # filters only on added vertices so the embedded pattern stays shared
    if added and rng.random() < 0.3:
        target = rng.choice(added)
        b.filters.append(normalize_comparison(ColRef(target, "v"), rng.choice(["<", ">", "="]),
                                              Literal(rng.randint(5, 25))))


def random_query_pair(rng: random.Random, tables=("T0", "T1", "T2", "T3", "T4"),
                      max_tables: int = 5) -> tuple[JoinGraph, JoinGraph]:
    """Two inner-join queries that share at least one join."""
    core = core_pattern(rng, tables, rng.randint(2, 3))
    graphs = []
    for _ in range(2):
        b = GraphBuilder()
        embed(b, core)
        extend(rng, b, tables, rng.randint(0, max_tables - len(core[0])))
        graphs.append(b.build(rng))
    return graphs[0], graphs[1]


def random_workload(rng: random.Random, tables=("T0", "T1", "T2", "T3", "T4"), queries: int | None = None,
                    max_tables: int = 5) -> list[JoinGraph]:
    """Queries sharing a random pattern, some containing it more than once."""
    core = core_pattern(rng, tables, rng.randint(2, 3))
    out = []
    for _ in range(queries or rng.randint(1, 3)):
        b = GraphBuilder()
        first = embed(b, core)
        if rng.random() < 0.4 and 2 * len(core[0]) <= max_tables:
            second = embed(b, core)
            b.edges.append(random_edge(rng, rng.choice(first), rng.choice(second)))
        extend(rng, b, tables, rng.randint(0, max(0, max_tables - len(b.vertices))))
        out.append(b.build(rng))
    return out


# --------------------------------------------------------------------------- brute-force matching


def edge_signature(g: JoinGraph, e: JoinEdge, mapping: dict[str, int]) -> tuple:
    """Edge with aliases replaced by pattern positions, orientation-free."""
    c = e.cond
    left = (mapping[c.left.alias], c.left.column)
    right = (mapping[c.right.alias], c.right.column)
    flipped = {"=": "=", "<>": "<>", "<": ">", ">": "<", "<=": ">=", ">=": "<="}
    a = (left, c.op, right)
    b = (right, flipped[c.op], left)
    return (e.kind, min(a, b))


def brute_embeddings(pattern: JoinGraph, g: JoinGraph) -> list[tuple[str, ...]]:
    """All injective alias maps pattern -> g preserving tables, filters and induced edges."""
    p_aliases = pattern.aliases
    pos = {a: k for k, a in enumerate(p_aliases)}
    want = Counter(edge_signature(pattern, e, pos) for e in pattern.edges)
    want_filters = [sorted(str(f).split(".", 1)[1] for f in pattern.filters_of(a)) for a in p_aliases]
    found = []
    for combo in itertools.permutations(g.aliases, len(p_aliases)):
        if any(g.table(x) != pattern.table(a) for x, a in zip(combo, p_aliases)):
            continue
        if any(sorted(str(f).split(".", 1)[1] for f in g.filters_of(x)) != want_filters[k]
               for k, x in enumerate(combo)):
            continue
        inv = {x: k for k, x in enumerate(combo)}
        got = Counter(edge_signature(g, e, inv) for e in g.edges
                      if e.endpoints[0] in inv and e.endpoints[1] in inv)
        if got == want:
            found.append(combo)
    return found


def connected_alias_sets(g: JoinGraph, min_size: int = 2):
    adj = g.adjacency()
    out = []
    for r in range(min_size, len(g.aliases) + 1):
        for combo in itertools.combinations(g.aliases, r):
            s = set(combo)
            seen = {combo[0]}
            stack = [combo[0]]
            while stack:
                for nb in adj[stack.pop()]:
                    if nb in s and nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            if seen == s:
                out.append(frozenset(combo))
    return out


# --------------------------------------------------------------------------- fixtures shared by several files


def retail_db() -> Database:
    """Small retail instance for the four-table retail model.

    Customer 1 buys items 10 and 11 under promotions on those very items,
    so it gets discount edges to both; customer 2 buys item 10 without a
    promotion; customer 3 buys item 12 under a promotion for another item.
    """
    db = Database()
    db.add_rows("C", [("c_id", "int"), ("name", "text")], [(1, "c1"), (2, "c2"), (3, "c3")])
    db.add_rows("I", [("i_no", "int"), ("name", "text"), ("price", "float")],
                [(10, "i1", 3.5), (11, "i2", 7.25), (12, "i3", 1.0)])
    db.add_rows("P", [("p_no", "int"), ("i_no", "int")], [(100, 10), (101, 11), (102, 11)])
    db.add_rows("SS", [("c_id", "int"), ("i_no", "int"), ("p_no", "int")],
                [(1, 10, 100), (1, 11, 101), (1, 11, 101), (2, 10, None), (3, 12, 102)])
    return db
