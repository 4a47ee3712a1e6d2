"""Shared subgraphs between join graphs and query decompositions.

Matching ignores aliases: two table instances match when they read the same
base table under the same filters, and two edge bundles match when their
join types and conditions agree after alias substitution.  All searches
are exhaustive up to ``cap`` vertices per graph.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dsl import ColRef
from .errors import NoCommonJoinError
from .joingraph import JoinEdge, JoinGraph
from .relational.operators import FLIPPED

DEFAULT_CAP = 12

Mapping = tuple[tuple[str, str], ...]


class CapExceededWarning(RuntimeWarning):
    pass


# --------------------------------------------------------------------------- labels


def vertex_label(g: JoinGraph, alias: str) -> tuple:
    def flt(c):
        right = f"_.{c.right.column}" if isinstance(c.right, ColRef) else str(c.right)
        return f"{c.left.column} {c.op} {right}"

    return (g.table(alias), tuple(sorted(flt(f) for f in g.filters_of(alias))))


def _oriented(e: JoinEdge, x: str) -> tuple:
    """Edge template seen from endpoint ``x``."""
    c = e.cond
    if c.left.alias == x:
        cx, op, cy = c.left.column, c.op, c.right.column
    else:
        cx, op, cy = c.right.column, FLIPPED[c.op], c.left.column
    pres = "" if e.preserved is None else ("x" if e.preserved == x else "y")
    return (e.kind, pres, cx, op, cy)


class _Index:
    """Per-graph lookup of vertex labels and oriented edge bundles."""

    def __init__(self, g: JoinGraph):
        self.g = g
        self.labels = {a: vertex_label(g, a) for a in g.aliases}
        bundles: dict[tuple[str, str], list] = {}
        for e in g.edges:
            a, b = e.endpoints
            bundles.setdefault((a, b), []).append(_oriented(e, a))
            bundles.setdefault((b, a), []).append(_oriented(e, b))
        self.bundles = {k: tuple(sorted(v)) for k, v in bundles.items()}
        self.adj = g.adjacency()

    def bundle(self, x: str, y: str) -> tuple:
        return self.bundles.get((x, y), ())


_INDEX_CACHE: dict[int, tuple[JoinGraph, _Index]] = {}


def _index(g: JoinGraph) -> _Index:
    hit = _INDEX_CACHE.get(id(g))
    if hit is not None and hit[0] is g:
        return hit[1]
    if len(_INDEX_CACHE) > 256:
        _INDEX_CACHE.clear()
    idx = _Index(g)
    _INDEX_CACHE[id(g)] = (g, idx)
    return idx


# --------------------------------------------------------------------------- enumeration


def connected_subsets(g: JoinGraph, min_size: int = 2, max_size: int | None = None) -> list[frozenset[str]]:
    """All connected vertex subsets, ordered by size then vertex positions."""
    adj = g.adjacency()
    seen = {frozenset([a]) for a in g.aliases}
    frontier = list(seen)
    while frontier:
        nxt = []
        for s in frontier:
            if max_size is not None and len(s) >= max_size:
                continue
            for a in s:
                for b in adj[a]:
                    if b not in s:
                        t = s | {b}
                        if t not in seen:
                            seen.add(t)
                            nxt.append(t)
        frontier = nxt
    pos = {a: i for i, a in enumerate(g.aliases)}
    return sorted((s for s in seen if len(s) >= min_size),
                  key=lambda s: (len(s), sorted(pos[a] for a in s)))


def canonical_form(g: JoinGraph, subset: Iterable[str]) -> tuple[str, tuple[str, ...]]:
    """Alias-free canonical encoding of the induced subgraph and the vertex order realizing it.

    Colors are refined by neighbourhood until stable; the encoding is the
    minimum over all orderings consistent with the color classes.
    """
    idx = _index(g)
    members = sorted(subset)
    color = {a: repr(idx.labels[a]) for a in members}
    for _ in range(len(members)):
        sig = {a: repr((color[a], sorted((repr(idx.bundle(a, b)), color[b])
                                         for b in members if b != a and idx.bundle(a, b))))
               for a in members}
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {a: f"{ranks[sig[a]]:03d}" for a in members}
        stable = len(set(new.values())) == len(set(color.values()))
        color = new
        if stable:
            break
    classes: dict[str, list[str]] = {}
    for a in members:
        classes.setdefault(color[a], []).append(a)
    ordered_classes = [classes[c] for c in sorted(classes)]
    best: tuple[str, tuple[str, ...]] | None = None
    for combo in itertools.product(*(itertools.permutations(c) for c in ordered_classes)):
        order = tuple(a for part in combo for a in part)
        enc = _encode(idx, order)
        if best is None or enc < best[0]:
            best = (enc, order)
    assert best is not None
    return best


def _encode(idx: _Index, order: Sequence[str]) -> str:
    verts = [idx.labels[a] for a in order]
    edges = [(i, j, idx.bundle(order[i], order[j]))
             for i in range(len(order)) for j in range(i + 1, len(order))
             if idx.bundle(order[i], order[j])]
    return repr((verts, edges))


def pattern_label(tables: Iterable[str]) -> str:
    return "⋈".join(sorted(tables))


def isomorphisms(g1: JoinGraph, s1: Iterable[str], g2: JoinGraph, s2: Iterable[str]) -> list[dict[str, str]]:
    """Every label- and edge-preserving bijection from induced ``s1`` onto induced ``s2``."""
    i1, i2 = _index(g1), _index(g2)
    s1, s2 = set(s1), set(s2)
    if len(s1) != len(s2):
        return []
    # visit s1 in a connected order so partial maps prune early
    start = min(s1)
    order = [start]
    seen = {start}
    for a in order:
        for b in sorted(i1.adj[a]):
            if b in s1 and b not in seen:
                seen.add(b)
                order.append(b)
    order += sorted(s1 - seen)
    targets = sorted(s2)
    out: list[dict[str, str]] = []
    mapping: dict[str, str] = {}

    def extend(k: int) -> None:
        if k == len(order):
            out.append(dict(mapping))
            return
        a = order[k]
        used = set(mapping.values())
        for b in targets:
            if b in used or i2.labels[b] != i1.labels[a]:
                continue
            if all(i1.bundle(a, x) == i2.bundle(b, mapping[x]) for x in order[:k]):
                mapping[a] = b
                extend(k + 1)
                del mapping[a]

    extend(0)
    return out


# --------------------------------------------------------------------------- shared subgraphs


@dataclass(frozen=True)
class SharedSubgraph:
    """A pattern common to two join graphs with every way of matching it.

    Each mapping pairs aliases of the first graph with aliases of the second.
    """

    encoding: str
    tables: tuple[str, ...]
    mappings: tuple[Mapping, ...]

    @property
    def size(self) -> int:
        return len(self.tables)

    @property
    def label(self) -> str:
        return pattern_label(self.tables)


def _greedy_mappings(g1: JoinGraph, g2: JoinGraph) -> list[dict[str, str]]:
    i1, i2 = _index(g1), _index(g2)
    found: dict[frozenset, dict[str, str]] = {}
    for e1 in g1.edges:
        for x1, y1 in (e1.endpoints, e1.endpoints[::-1]):
            for e2 in g2.edges:
                x2, y2 = e2.endpoints
                if (i1.labels[x1], i1.labels[y1]) != (i2.labels[x2], i2.labels[y2]):
                    continue
                if i1.bundle(x1, y1) != i2.bundle(x2, y2):
                    continue
                m = {x1: x2, y1: y2}
                grown = True
                while grown:
                    grown = False
                    used = set(m.values())
                    for a in sorted({n for v in m for n in i1.adj[v]} - set(m)):
                        for b in sorted({n for v in m.values() for n in i2.adj[v]} - used):
                            if i1.labels[a] == i2.labels[b] and \
                                    all(i1.bundle(a, x) == i2.bundle(b, m[x]) for x in m):
                                m[a] = b
                                grown = True
                                break
                        if grown:
                            break
                found.setdefault(frozenset(m.items()), m)
    return list(found.values())


def common_subgraph_candidates(g1: JoinGraph, g2: JoinGraph, cap: int = DEFAULT_CAP) -> list[SharedSubgraph]:
    """Connected subgraphs (at least one join) present in both graphs.

    Ordered by size descending, then canonical encoding; mappings sorted.
    Graphs above ``cap`` vertices get greedy maximal matches only.
    """
    groups: dict[str, tuple[tuple[str, ...], set[Mapping]]] = {}

    def add(s1: Iterable[str], m: dict[str, str]) -> None:
        enc, order = canonical_form(g1, s1)
        tables = tuple(g1.table(a) for a in order)
        groups.setdefault(enc, (tables, set()))[1].add(tuple(sorted(m.items())))

    if len(g1) > cap or len(g2) > cap:
        warnings.warn(f"join graph exceeds the {cap}-vertex search cap; using greedy maximal matches",
                      CapExceededWarning, stacklevel=2)
        for m in _greedy_mappings(g1, g2):
            add(m.keys(), m)
    else:
        by_enc: dict[str, list[frozenset[str]]] = {}
        for s2 in connected_subsets(g2):
            by_enc.setdefault(canonical_form(g2, s2)[0], []).append(s2)
        for s1 in connected_subsets(g1):
            enc = canonical_form(g1, s1)[0]
            for s2 in by_enc.get(enc, ()):
                for m in isomorphisms(g1, s1, g2, s2):
                    add(s1, m)
    out = [SharedSubgraph(enc, tables, tuple(sorted(ms))) for enc, (tables, ms) in groups.items()]
    out.sort(key=lambda c: (-c.size, c.encoding))
    return out


# --------------------------------------------------------------------------- decompositions


@dataclass(frozen=True)
class Decomposition:
    """One shared subgraph placement plus the leftover parts of both queries.

    ``non_shared[i]`` are the components of query ``i`` outside the shared
    vertices and ``connecting[i][k]`` the edges tying part ``k`` to them.
    """

    shared: SharedSubgraph
    mapping: Mapping
    shared_aliases: tuple[frozenset[str], frozenset[str]]
    non_shared: tuple[tuple[frozenset[str], ...], tuple[frozenset[str], ...]]
    connecting: tuple[tuple[tuple[JoinEdge, ...], ...], tuple[tuple[JoinEdge, ...], ...]]
    graphs: tuple[JoinGraph, JoinGraph] = field(repr=False, compare=False)

    def shared_graph(self, i: int = 0) -> JoinGraph:
        return self.graphs[i].induced(self.shared_aliases[i])

    def part_graph(self, i: int, k: int) -> JoinGraph:
        return self.graphs[i].induced(self.non_shared[i][k])

    def reconstruct(self, i: int) -> JoinGraph:
        """Reassemble query ``i`` from its shared part, parts and connecting edges."""
        g = self.graphs[i]
        pieces = [self.shared_graph(i)] + [self.part_graph(i, k) for k in range(len(self.non_shared[i]))]
        aliases = set().union(*(p.aliases for p in pieces))
        edges = [e for p in pieces for e in p.edges] + [e for c in self.connecting[i] for e in c]
        filters = [f for p in pieces for f in p.filters]
        from .joingraph import sort_edges

        return JoinGraph(tuple(v for v in g.vertices if v.alias in aliases), sort_edges(edges),
                         tuple(sorted(filters, key=str)), g.outputs)

    def describe(self) -> str:
        def sets(parts):
            return ", ".join("{" + ",".join(sorted(p)) + "}" for p in parts) or "-"

        return (f"shared {{{','.join(sorted(self.shared_aliases[0]))}}}"
                f"~{{{','.join(sorted(self.shared_aliases[1]))}}} | "
                f"Q1: {sets(self.non_shared[0])} | Q2: {sets(self.non_shared[1])}")


def _parts(g: JoinGraph, shared: frozenset[str]):
    parts = tuple(g.components(shared))
    conn = tuple(tuple(g.crossing_edges(p, shared)) for p in parts)
    return parts, conn


def decompose(g1: JoinGraph, g2: JoinGraph, shared: SharedSubgraph, mapping: Mapping) -> Decomposition:
    s1 = frozenset(a for a, _ in mapping)
    s2 = frozenset(b for _, b in mapping)
    p1, c1 = _parts(g1, s1)
    p2, c2 = _parts(g2, s2)
    return Decomposition(shared, mapping, (s1, s2), (p1, p2), (c1, c2), (g1, g2))


def enumerate_decompositions(g1: JoinGraph, g2: JoinGraph, cap: int = DEFAULT_CAP) -> list[Decomposition]:
    """One decomposition per (candidate, mapping), in candidate order."""
    cands = common_subgraph_candidates(g1, g2, cap)
    if not cands:
        raise NoCommonJoinError("the two queries share no join")
    return [decompose(g1, g2, c, m) for c in cands for m in c.mappings]


# --------------------------------------------------------------------------- occurrences


@dataclass(frozen=True)
class Occurrence:
    """Where a pattern sits in one query: ``aliases[k]`` plays pattern vertex ``k``."""

    query: int
    aliases: tuple[str, ...]

    @property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.aliases)


def pattern_occurrences(graphs: Sequence[JoinGraph], cap: int = DEFAULT_CAP,
                        min_size: int = 2) -> dict[str, tuple[tuple[str, ...], list[Occurrence]]]:
    """Every connected induced pattern of the graphs with its occurrences.

    Keyed by canonical encoding; value is (tables in canonical order,
    occurrences in query then position order).
    """
    out: dict[str, tuple[tuple[str, ...], list[Occurrence]]] = {}
    for qi, g in enumerate(graphs):
        max_size = None
        if len(g) > cap:
            warnings.warn(f"join graph exceeds the {cap}-vertex search cap; only joins of up to 3 "
                          "tables are considered", CapExceededWarning, stacklevel=2)
            max_size = 3
        for s in connected_subsets(g, min_size, max_size):
            enc, order = canonical_form(g, s)
            tables = tuple(g.table(a) for a in order)
            out.setdefault(enc, (tables, []))[1].append(Occurrence(qi, order))
    return out
