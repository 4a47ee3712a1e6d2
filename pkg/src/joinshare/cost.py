"""Cost model for extraction plans.

Every query is assumed to run as a left-deep chain of hash joins: the first
table is streamed and probes hash tables built on each following table.

    Build(T)  = A_D * N_P(T) + c_build * |T|
    Probe(T1) = A_D * N_P(T1) + sum over steps of (c_probe * in + c_out * out)
    Join(Q)   = sum of Build(T_i) for i >= 2, plus Probe(T1)

A merged unit costs Join(SQ_S) + sum Join(SQ_i) + Outer, where Outer builds
one in-memory table per non-shared result and streams SQ_S past them.  A
view costs Join(V) + A_D * N_P(V) for the write, plus the queries that read
it.  Cardinalities are estimated from catalog statistics under the usual
independence and containment assumptions.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from .dsl import ColRef, Comparison
from .errors import CatalogError
from .joingraph import JoinGraph
from .relational.catalog import TableStats, pages_for


@dataclass(frozen=True)
class CostParams:
    A_D: float = 4.0
    c_build: float = 1.0
    c_probe: float = 1.0
    c_out: float = 0.5
    page_size: int = 8192

    def __post_init__(self):
        for name in ("A_D", "c_build", "c_probe", "c_out", "page_size"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"cost parameter {name} must be a positive number, got {value!r}")

    def scaled(self, factor: float) -> "CostParams":
        """All cost constants multiplied by ``factor``; page size unchanged."""
        return CostParams(self.A_D * factor, self.c_build * factor, self.c_probe * factor,
                          self.c_out * factor, self.page_size)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "CostParams":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown cost parameters: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "CostParams":
        return cls.from_dict(json.loads(Path(path).read_text()))


class StatsSource(Protocol):
    page_size: int

    def table_stats(self, name: str) -> TableStats: ...


class StatsOverlay:
    """Statistics of a catalog plus estimated statistics of planned views."""

    def __init__(self, base: StatsSource, extra: dict[str, TableStats] | None = None):
        self.base = base
        self.page_size = base.page_size
        self.extra = dict(extra or {})

    def add(self, name: str, stats: TableStats) -> None:
        self.extra[name] = stats

    def table_stats(self, name: str) -> TableStats:
        if name in self.extra:
            return self.extra[name]
        return self.base.table_stats(name)


# --------------------------------------------------------------------------- estimation


@dataclass(frozen=True)
class JoinStep:
    alias: str
    build_rows: float
    build_pages: int
    input_rows: float
    output_rows: float


@dataclass(frozen=True)
class CardinalityEstimate:
    rows: float
    pages: int
    width: float
    order: tuple[str, ...]
    first_rows: float
    first_pages: int
    steps: tuple[JoinStep, ...]


def _distinct(stats: TableStats, column: str) -> float:
    return max(1.0, float(stats.distinct.get(column, stats.cardinality) or 1))


def _filter_selectivity(f: Comparison, stats: TableStats) -> float:
    d = _distinct(stats, f.left.column)
    if isinstance(f.right, ColRef):
        d = max(d, _distinct(stats, f.right.column))
    if f.op == "=":
        return 1.0 / d
    if f.op == "<>":
        return 1.0 - 1.0 / d
    return 1.0 / 3.0


def _join_selectivity(c: Comparison, stats_of) -> float:
    dl = _distinct(stats_of(c.left.alias), c.left.column)
    dr = _distinct(stats_of(c.right.alias), c.right.column)
    d = max(dl, dr)
    if c.op == "=":
        return 1.0 / d
    if c.op == "<>":
        return 1.0 - 1.0 / d
    return 1.0 / 3.0


def estimate_cardinality(g: JoinGraph, stats: StatsSource) -> CardinalityEstimate:
    """Estimated result size and the greedy left-deep join order for ``g``.

    The order starts at the smallest filtered table and repeatedly adds the
    adjacent table giving the smallest intermediate result; ties go to the
    lexicographically smaller alias.
    """
    table_stats: dict[str, TableStats] = {}
    for a in g.aliases:
        table_stats[a] = stats.table_stats(g.table(a))
    base_rows = {}
    for a in g.aliases:
        st = table_stats[a]
        rows = float(st.cardinality)
        for f in g.filters_of(a):
            rows *= _filter_selectivity(f, st)
        base_rows[a] = rows

    def stats_of(alias):
        return table_stats[alias]

    edges_of: dict[str, list] = {a: [] for a in g.aliases}
    for e in g.edges:
        for x in e.endpoints:
            edges_of[x].append(e)

    first = min(g.aliases, key=lambda a: (base_rows[a], a))
    placed = {first}
    order = [first]
    current = base_rows[first]
    steps = []
    while len(placed) < len(g.aliases):
        best = None
        for v in sorted(set(g.aliases) - placed):
            conds = [e.cond for e in edges_of[v] if e.other(v) in placed]
            if not conds:
                continue
            sel = 1.0
            for c in conds:
                sel *= _join_selectivity(c, stats_of)
            out = current * base_rows[v] * sel
            if best is None or (out, v) < (best[0], best[1]):
                best = (out, v)
        if best is None:
            raise CatalogError("join graph is not connected; cannot order joins")
        out, v = best
        steps.append(JoinStep(v, base_rows[v], table_stats[v].page_count, current, out))
        placed.add(v)
        order.append(v)
        current = out

    width = 0.0
    if g.outputs:
        for o in g.outputs:
            width += table_stats[o.alias].widths.get(o.column, 8.0)
    else:
        for a in g.aliases:
            width += sum(table_stats[a].widths.get(c, 8.0) for c in g.referenced_columns(a))
    return CardinalityEstimate(current, pages_for(current * width, stats.page_size), width,
                               tuple(order), base_rows[first], table_stats[first].page_count,
                               tuple(steps))


def view_stats(g: JoinGraph, est: CardinalityEstimate, stats: StatsSource) -> TableStats:
    """Estimated statistics of the relation ``g`` would produce, keyed by output names."""
    distinct, widths = {}, {}
    for o in g.outputs:
        st = stats.table_stats(g.table(o.alias))
        distinct[o.name] = int(min(_distinct(st, o.column), max(est.rows, 1.0)))
        widths[o.name] = st.widths.get(o.column, 8.0)
    total = est.rows * est.width
    return TableStats(int(round(est.rows)), pages_for(total, stats.page_size), distinct, widths,
                      int(round(total)))


# --------------------------------------------------------------------------- reports


@dataclass
class CostReport:
    """Named cost terms plus nested reports; ``total`` is their plain sum."""

    label: str
    terms: dict[str, float] = field(default_factory=dict)
    children: list["CostReport"] = field(default_factory=list)

    @property
    def total(self) -> float:
        return sum(self.terms.values()) + sum(c.total for c in self.children)

    def to_json(self) -> dict:
        return {"label": self.label, "total": self.total, "terms": dict(self.terms),
                "children": [c.to_json() for c in self.children]}

    def lines(self, indent: int = 0) -> list[str]:
        pad = "  " * indent
        out = [f"{pad}{self.label}: {self.total:.2f}"]
        for k, v in self.terms.items():
            out.append(f"{pad}  {k} = {v:.2f}")
        for c in self.children:
            out.extend(c.lines(indent + 1))
        return out


def query_report(g: JoinGraph, stats: StatsSource, p: CostParams, label: str = "Join(Q)") -> CostReport:
    est = estimate_cardinality(g, stats)
    rep = CostReport(label)
    for s in est.steps:
        rep.terms[f"Build({s.alias})"] = p.A_D * s.build_pages + p.c_build * s.build_rows
    probe = p.A_D * est.first_pages
    for s in est.steps:
        probe += p.c_probe * s.input_rows + p.c_out * s.output_rows
    rep.terms[f"Probe({est.order[0]})"] = probe
    return rep


def cost_query(g: JoinGraph, stats: StatsSource, p: CostParams = CostParams()) -> float:
    return query_report(g, stats, p).total


def baseline_report(graphs: Sequence[JoinGraph], stats: StatsSource, p: CostParams,
                    labels: Sequence[str] | None = None) -> CostReport:
    labels = labels or [f"Q{i + 1}" for i in range(len(graphs))]
    return CostReport("baseline", children=[query_report(g, stats, p, f"Join({lab})")
                                            for g, lab in zip(graphs, labels)])


def merged_report(shared: JoinGraph, parts: Sequence[JoinGraph], origins: Sequence[JoinGraph],
                  stats: StatsSource, p: CostParams, label: str = "Join(Q_M)") -> CostReport:
    rep = CostReport(label)
    rep.children.append(query_report(shared, stats, p, "Join(SQ_S)"))
    outer = CostReport("Outer(O)")
    for k, part in enumerate(parts):
        rep.children.append(query_report(part, stats, p, f"Join(SQ_{k + 1})"))
        outer.terms[f"Build(SQ_{k + 1})"] = p.c_build * estimate_cardinality(part, stats).rows
    shared_rows = estimate_cardinality(shared, stats).rows
    emitted = sum(estimate_cardinality(g, stats).rows for g in origins)
    outer.terms["Probe(SQ_S)"] = p.c_probe * shared_rows * max(1, len(parts)) + p.c_out * emitted
    rep.children.append(outer)
    return rep


def cost_merged(unit, stats: StatsSource, p: CostParams = CostParams()) -> float:
    """Cost of a merged unit (anything with shared/part/origin graphs)."""
    return merged_report(unit.shared_graph, unit.part_graphs, unit.origin_graphs, stats, p).total


def views_report(views: Sequence, rewritten: Sequence[JoinGraph], stats: StatsSource,
                 p: CostParams, labels: Sequence[str] | None = None) -> tuple[CostReport, StatsOverlay]:
    """Cost of creating ``views`` (in order) and running the rewritten queries.

    Views need ``name`` and ``definition``; planned views get estimated
    statistics so later views and queries can read them.
    """
    overlay = stats if isinstance(stats, StatsOverlay) else StatsOverlay(stats)
    overlay = StatsOverlay(overlay.base, overlay.extra)
    rep = CostReport("P_MV")
    for v in views:
        est = estimate_cardinality(v.definition, overlay)
        vrep = query_report(v.definition, overlay, p, f"Join({v.name})")
        vst = view_stats(v.definition, est, overlay)
        vrep.terms[f"A_D*N_P({v.name})"] = p.A_D * vst.page_count
        rep.children.append(vrep)
        try:
            overlay.base.table_stats(v.name)
        except CatalogError:
            overlay.add(v.name, vst)
    labels = labels or [f"Q{i + 1}'" for i in range(len(rewritten))]
    for g, lab in zip(rewritten, labels):
        rep.children.append(query_report(g, overlay, p, f"Join({lab})"))
    return rep, overlay


def cost_mv_plan(views: Sequence, rewritten: Sequence[JoinGraph], stats: StatsSource,
                 p: CostParams = CostParams()) -> float:
    return views_report(views, rewritten, stats, p)[0].total


# --------------------------------------------------------------------------- calibration


def calibrate(rows: int = 200_000, seed: int = 0, repeat: int = 3) -> CostParams:
    """Suggest constants from measured per-tuple build, probe and emit times.

    Times are normalized so that ``c_build`` is 1; ``A_D`` is the time to
    stream one page worth of tuples.
    """
    import numpy as np

    from .relational import kernels

    rng = np.random.default_rng(seed)
    keys = rng.integers(0, max(1, rows // 4), size=rows).tolist()
    build_rows = [(k, i) for i, k in enumerate(keys)]
    probe_rows = [(k,) for k in rng.integers(0, max(1, rows // 2), size=rows).tolist()]

    def best(fn) -> float:
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    t_build = best(lambda: kernels.build_table(build_rows, (0,)))
    table = kernels.build_table(build_rows, (0,))
    t_probe_only = best(lambda: kernels.probe_table(probe_rows, (0,), {}, False, (None, None), None))
    t_probe = best(lambda: kernels.probe_table(probe_rows, (0,), table, False, (None, None), None))
    emitted = len(kernels.probe_table(probe_rows, (0,), table, False, (None, None), None))
    t_scan = best(lambda: [r for r in build_rows])
    unit = t_build / rows
    c_probe = (t_probe_only / rows) / unit
    c_out = max(t_probe - t_probe_only, 1e-9) / max(emitted, 1) / unit
    rows_per_page = 8192 / 16
    a_d = (t_scan / rows) * rows_per_page / unit
    return CostParams(round(a_d, 4), 1.0, round(max(c_probe, 1e-4), 4), round(max(c_out, 1e-4), 4))
