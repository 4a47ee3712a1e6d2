"""Greedy hybrid planning over join-sharing rewrites.

Starting from one unit per query, every iteration builds each plan reachable
by one more rewrite (an outer-join merge of two queries or a view shared by
queries), costs them, and keeps the cheapest if it is strictly cheaper than
the current plan.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .cost import (CostParams, CostReport, StatsOverlay, StatsSource, query_report, views_report)
from .errors import NoCommonJoinError, ViewOverlapError
from .executor import execute_graph
from .joingraph import JoinGraph
from .jsmv import ViewDef, apply_view, make_view, materialize_views
from .jsoj import MergedUnit, execute_merged, merge_candidates
from .relational.catalog import Database
from .relational.relation import Relation
from .subgraphs import DEFAULT_CAP, Occurrence, pattern_label, pattern_occurrences

MODES = ("naive", "js-oj-only", "js-mv-only", "hybrid")


@dataclass(frozen=True)
class Query:
    label: str
    graph: JoinGraph
    original: JoinGraph

    @property
    def rewritten(self) -> bool:
        return self.graph is not self.original


@dataclass(frozen=True)
class Step:
    rewrite: str
    detail: str
    cost_before: float
    cost_after: float

    def to_json(self) -> dict:
        return {"rewrite": self.rewrite, "detail": self.detail,
                "cost_before": self.cost_before, "cost_after": self.cost_after}


@dataclass(frozen=True)
class ExtractionPlan:
    """Queries still run on their own, merged pairs, and views in creation order."""

    queries: tuple[Query, ...]
    merged: tuple[MergedUnit, ...] = ()
    views: tuple[ViewDef, ...] = ()
    provenance: tuple[Step, ...] = ()
    cost: float = 0.0

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.rewrite for s in self.provenance)

    def query(self, label: str) -> Query:
        for q in self.queries:
            if q.label == label:
                return q
        raise KeyError(label)

    def units(self) -> list[tuple[str, object]]:
        """Units in execution order: the view stage, merged units, plain queries."""
        out: list[tuple[str, object]] = []
        if self.views:
            out.append(("ViewStage", (self.views, [q for q in self.queries if q.rewritten])))
        out += [("MergedUnit", m) for m in self.merged]
        out += [("PlainQuery", q) for q in self.queries if not (self.views and q.rewritten)]
        return out

    def structure(self) -> list[dict]:
        out = []
        for kind, u in self.units():
            if kind == "ViewStage":
                views, rewritten = u
                out.append({"kind": kind, "views": [v.name for v in views],
                            "queries": [q.label for q in rewritten]})
            elif kind == "MergedUnit":
                out.append({"kind": kind, "queries": list(u.labels)})
            else:
                out.append({"kind": kind, "queries": [u.label]})
        return out


CostFn = Callable[[ExtractionPlan], float]


def baseline_plan(named: Sequence[tuple[str, JoinGraph]]) -> ExtractionPlan:
    return ExtractionPlan(tuple(Query(label, g, g) for label, g in named))


# --------------------------------------------------------------------------- costing


def plan_report(plan: ExtractionPlan, stats: StatsSource, p: CostParams) -> CostReport:
    """Cost breakdown: views, then merged units, then standalone queries."""
    rep = CostReport("plan")
    vrep, overlay = views_report(plan.views, [], stats, p)
    rep.children.extend(vrep.children)
    for m in plan.merged:
        rep.children.append(m.report(overlay, p))
    for q in plan.queries:
        rep.children.append(query_report(q.graph, overlay, p, f"Join({q.label}{chr(39) if q.rewritten else ''})"))
    return rep


def model_cost(stats: StatsSource, p: CostParams) -> CostFn:
    return lambda plan: plan_report(plan, stats, p).total


# --------------------------------------------------------------------------- candidates


@dataclass(frozen=True)
class Candidate:
    label: str
    detail: str
    plan: ExtractionPlan
    cost: float


def _oj_candidates(plan: ExtractionPlan, cost_fn: CostFn, cap: int) -> list[Candidate]:
    out = []
    qs = plan.queries
    for i in range(len(qs)):
        for j in range(i + 1, len(qs)):
            a, b = qs[i], qs[j]
            try:
                units = merge_candidates(a.graph, b.graph, (a.label, b.label), cap)
            except NoCommonJoinError:
                continue
            best = None
            for u in units:
                label = f"JS-OJ({u.decomposition.shared.label})"
                new = replace(plan, queries=tuple(q for q in qs if q.label not in (a.label, b.label)),
                              merged=plan.merged + (u,),
                              provenance=plan.provenance + (Step(label, f"{a.label} + {b.label}", plan.cost, 0.0),))
                c = cost_fn(new)
                key = (c, u.merged_graph.canonical_encoding())
                if best is None or key < best[0]:
                    best = (key, Candidate(label, f"merge {a.label} + {b.label} on "
                                                  f"{u.decomposition.describe()}", new, c))
            if best is not None:
                out.append(best[1])
    return out


def _view_name(plan: ExtractionPlan, taken: set[str]) -> str:
    n = len(plan.views) + 1
    used = taken | {v.name for v in plan.views}
    while f"V{n}" in used:
        n += 1
    return f"V{n}"


def _mv_candidates(plan: ExtractionPlan, cost_fn: CostFn, cap: int, taken: set[str]) -> list[Candidate]:
    """Views over a pattern shared by a pair of queries, or repeated inside one query."""
    qs = plan.queries
    name = _view_name(plan, taken)
    seen: set[tuple] = set()
    groups: list[tuple[str, tuple[str, ...], list[Occurrence], tuple[int, ...]]] = []
    single = pattern_occurrences([q.graph for q in qs], cap)
    for enc, (tables, occs) in sorted(single.items(), key=lambda kv: (-len(kv[1][0]), kv[0])):
        by_q: dict[int, list[Occurrence]] = {}
        for o in occs:
            by_q.setdefault(o.query, []).append(o)
        members = sorted(by_q)
        for i in members:
            if len(by_q[i]) >= 2:
                groups.append((enc, tables, by_q[i], (i,)))
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                i, j = members[x], members[y]
                groups.append((enc, tables, by_q[i] + by_q[j], (i, j)))
    out = []
    graphs = [q.graph for q in qs]
    for enc, tables, occs, members in groups:
        key = (enc, members)
        if key in seen:
            continue
        seen.add(key)
        try:
            view = make_view(name, enc, tables, occs, graphs)
        except ViewOverlapError:  # overlapping occurrences: skip the candidate
            continue
        rewritten = apply_view(graphs, view)
        label = f"JS-MV({pattern_label(tables)})"
        consumers = " + ".join(qs[i].label for i in members)
        new_queries = tuple(Query(q.label, g, q.original) if g is not q.graph else q
                            for q, g in zip(qs, rewritten))
        new = replace(plan, queries=new_queries, views=plan.views + (view,),
                      provenance=plan.provenance + (Step(label, f"{view.name} for {consumers}", plan.cost, 0.0),))
        out.append(Candidate(label, f"view {view.name} = {view.label} for {consumers} "
                                    f"({len(occs)} occurrences)", new, cost_fn(new)))
    return out


def enumerate_candidates(plan: ExtractionPlan, cost_fn: CostFn, mode: str = "hybrid",
                         cap: int = DEFAULT_CAP, taken_names: set[str] | None = None) -> list[Candidate]:
    """Every plan one rewrite away from ``plan`` with its cost, in a fixed order."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    out: list[Candidate] = []
    if mode in ("js-oj-only", "hybrid"):
        out += _oj_candidates(plan, cost_fn, cap)
    if mode in ("js-mv-only", "hybrid"):
        out += _mv_candidates(plan, cost_fn, cap, set(taken_names or ()))
    return out


def _finish(c: Candidate, before: float) -> ExtractionPlan:
    steps = c.plan.provenance[:-1] + (Step(c.label, c.detail, before, c.cost),)
    return replace(c.plan, provenance=steps, cost=c.cost)


def optimize_graphs(named: Sequence[tuple[str, JoinGraph]], stats: StatsSource,
                    p: CostParams = CostParams(), mode: str = "hybrid", cost_fn: CostFn | None = None,
                    cap: int = DEFAULT_CAP, taken_names: set[str] | None = None) -> ExtractionPlan:
    """Greedy hill climbing; a candidate is accepted only if strictly cheaper."""
    cost_fn = cost_fn or model_cost(stats, p)
    if taken_names is None:
        taken_names = set(getattr(stats, "tables", {}) or ())
    plan = baseline_plan(named)
    plan = replace(plan, cost=cost_fn(plan))
    if mode == "naive":
        return plan
    while True:
        cands = enumerate_candidates(plan, cost_fn, mode, cap, taken_names)
        if not cands:
            break
        best = min(enumerate(cands), key=lambda ic: (ic[1].cost, ic[0]))[1]
        if not best.cost < plan.cost:
            break
        plan = _finish(best, plan.cost)
    return plan


def optimize(edges: Sequence, db: Database, p: CostParams = CostParams(), mode: str = "hybrid",
             cost_fn: CostFn | None = None, cap: int = DEFAULT_CAP) -> ExtractionPlan:
    """Plan the edge definitions of a model against ``db``."""
    from .joingraph import edge_query_graph

    named = [(e.label, edge_query_graph(e)) for e in edges]
    return optimize_graphs(named, db, p, mode, cost_fn, cap, set(db.tables))


# --------------------------------------------------------------------------- explain


def explain_json(plan: ExtractionPlan, stats: StatsSource | None = None, p: CostParams = CostParams(),
                 actual: dict | None = None) -> dict:
    """Machine-readable plan: units, costs, views and the rewrite log."""
    overlay = StatsOverlay(stats) if stats is not None else None
    if stats is not None:
        _, overlay = views_report(plan.views, [], stats, p)
    units = []
    for kind, u in plan.units():
        if kind == "ViewStage":
            views, rewritten = u
            entry = {"kind": kind, "views": [], "queries": []}
            for v in views:
                ve = v.to_json()
                if overlay is not None:
                    st = overlay.table_stats(v.name)
                    ve["estimated"] = {"rows": st.cardinality, "pages": st.page_count}
                if actual and v.name in actual:
                    ve["actual"] = actual[v.name]
                entry["views"].append(ve)
            for q in rewritten:
                qe = {"label": q.label, "graph": q.graph.to_json()}
                if overlay is not None:
                    qe["cost"] = query_report(q.graph, overlay, p).total
                entry["queries"].append(qe)
        elif kind == "MergedUnit":
            entry = {"kind": kind, "queries": list(u.labels), "graph": u.merged_graph.to_json(),
                     "shared": sorted(u.shared_aliases),
                     "outer_edges": [str(e) for e in u.outer_edges], "recipe": u.recipe()}
            if overlay is not None:
                entry["cost"] = u.report(overlay, p).total
        else:
            entry = {"kind": kind, "queries": [u.label], "graph": u.graph.to_json()}
            if overlay is not None:
                entry["cost"] = query_report(u.graph, overlay, p).total
        units.append(entry)
    return {"total_cost": plan.cost, "units": units,
            "provenance": [s.to_json() for s in plan.provenance]}


def explain_text(plan: ExtractionPlan, stats: StatsSource | None = None, p: CostParams = CostParams()) -> str:
    data = explain_json(plan, stats, p)
    lines = [f"plan: {len(data['units'])} unit(s), estimated cost {plan.cost:.2f}"]
    for n, u in enumerate(data["units"], 1):
        cost = f" cost={u['cost']:.2f}" if "cost" in u else ""
        if u["kind"] == "ViewStage":
            lines.append(f"[{n}] ViewStage")
            for v in u["views"]:
                est = v.get("estimated")
                est_s = f" est_rows={est['rows']} est_pages={est['pages']}" if est else ""
                act = v.get("actual")
                act_s = f" rows={act['rows']} pages={act['pages']}" if act else ""
                lines.append(f"    view {v['name']} = {v['pattern']} columns={','.join(v['columns'])}"
                             f" occurrences={len(v['occurrences'])}{est_s}{act_s}")
            for q in u["queries"]:
                c = f" cost={q['cost']:.2f}" if "cost" in q else ""
                lines.append(f"    query {q['label']}' reads views{c}")
        elif u["kind"] == "MergedUnit":
            lines.append(f"[{n}] MergedUnit {' + '.join(u['queries'])}{cost}")
            lines.append(f"    shared: {', '.join(u['shared'])}")
            for e in u["outer_edges"]:
                lines.append(f"    outer: {e}")
        else:
            lines.append(f"[{n}] PlainQuery {u['queries'][0]}{cost}")
    if plan.provenance:
        lines.append("rewrites:")
        for s in plan.provenance:
            lines.append(f"  {s.rewrite}: {s.cost_before:.2f} -> {s.cost_after:.2f} ({s.detail})")
    else:
        lines.append("rewrites: none")
    return "\n".join(lines) + "\n"


def parse_explain(text: str | dict) -> list[dict]:
    """Unit structure recovered from explain JSON."""
    data = json.loads(text) if isinstance(text, str) else text
    out = []
    for u in data["units"]:
        if u["kind"] == "ViewStage":
            out.append({"kind": "ViewStage", "views": [v["name"] for v in u["views"]],
                        "queries": [q["label"] for q in u["queries"]]})
        else:
            out.append({"kind": u["kind"], "queries": list(u["queries"])})
    return out


# --------------------------------------------------------------------------- execution


@dataclass
class PlanRun:
    results: dict[str, Relation]
    unit_seconds: list[tuple[str, float]] = field(default_factory=list)
    unit_counters: list[tuple[str, Counter]] = field(default_factory=list)


def execute_plan(plan: ExtractionPlan, db: Database, counters: Counter | None = None) -> PlanRun:
    """Run every unit; views are written into ``db`` (use a forked catalog)."""
    import time

    counters = db.counters if counters is None else counters
    results: dict[str, Relation] = {}
    timings = []
    per_unit = []
    for kind, u in plan.units():
        t0 = time.perf_counter()
        local: Counter = Counter()
        if kind == "ViewStage":
            views, rewritten = u
            materialize_views(views, db, local)
            for q in rewritten:
                results[q.label] = execute_graph(q.graph, db, local)
            name = "ViewStage"
        elif kind == "MergedUnit":
            r1, r2 = execute_merged(u, db, local)
            results[u.labels[0]], results[u.labels[1]] = r1, r2
            name = f"MergedUnit({u.labels[0]} + {u.labels[1]})"
        else:
            results[u.label] = execute_graph(u.graph, db, local)
            name = f"PlainQuery({u.label})"
        timings.append((name, time.perf_counter() - t0))
        per_unit.append((name, local))
        counters.update(local)
    return PlanRun(results, timings, per_unit)
