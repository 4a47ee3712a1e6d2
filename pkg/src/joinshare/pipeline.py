"""End-to-end extraction: parse, plan, execute, assemble the property graph."""

from __future__ import annotations

import csv
import json
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .cost import CostParams
from .dsl import GraphModelDef, validate_against_catalog
from .errors import CatalogError, ExtractionError
from .executor import execute_graph
from .joingraph import build_join_graph, OutputCol
from .planner import MODES, ExtractionPlan, execute_plan, optimize
from .relational.catalog import Database, write_delimited
from .relational.relation import Column, Schema
from .relational.values import Kind, format_value, row_sort_key, sort_key

FORMATS = ("csv", "jsonl")


@dataclass(frozen=True)
class RunConfig:
    mode: str = "hybrid"
    dedup_edges: bool = True
    output_format: str = "csv"
    params: CostParams = CostParams()
    allow_dangling: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.output_format not in FORMATS:
            raise ValueError(f"unknown output format {self.output_format!r}")


@dataclass
class PropertyGraph:
    """Vertices and edges per label; properties are (name, value) tuples."""

    vertices: dict[str, list[tuple[Any, tuple]]] = field(default_factory=dict)
    edges: dict[str, list[tuple[Any, Any, tuple]]] = field(default_factory=dict)
    vertex_props: dict[str, list[str]] = field(default_factory=dict)
    edge_props: dict[str, list[str]] = field(default_factory=dict)

    def canonical(self) -> "PropertyGraph":
        def vkey(v):
            return (sort_key(v[0]), row_sort_key(tuple(x for _, x in v[1])))

        def ekey(e):
            return (sort_key(e[0]), sort_key(e[1]), row_sort_key(tuple(x for _, x in e[2])))

        return PropertyGraph({k: sorted(v, key=vkey) for k, v in sorted(self.vertices.items())},
                             {k: sorted(v, key=ekey) for k, v in sorted(self.edges.items())},
                             dict(self.vertex_props), dict(self.edge_props))

    def same_as(self, other: "PropertyGraph") -> bool:
        # equal canonical forms iff equal multisets per label; hashing beats sorting
        for mine, theirs in ((self.vertices, other.vertices), (self.edges, other.edges)):
            if mine.keys() != theirs.keys():
                return False
            if any(len(mine[k]) != len(theirs[k]) or Counter(mine[k]) != Counter(theirs[k]) for k in mine):
                return False
        return True

    @property
    def vertex_count(self) -> int:
        return sum(len(v) for v in self.vertices.values())

    @property
    def edge_count(self) -> int:
        return sum(len(e) for e in self.edges.values())


@dataclass
class ExtractionResult:
    graph: PropertyGraph
    plan: ExtractionPlan
    metrics: dict


def extract_vertices(model: GraphModelDef, db: Database, counters: Counter) -> PropertyGraph:
    graph = PropertyGraph()
    for v in model.vertices:
        props = v.properties
        outputs = [OutputCol(v.query.from_[0].alias, v.id_column, "__id")]
        outputs += [OutputCol(s.col.alias, s.col.column, s.name) for s in props]
        rel = execute_graph(build_join_graph(v.query, outputs), db, counters)
        seen = set()
        rows = []
        for row in rel.rows:
            vid = row[0]
            if vid is None:
                continue
            if vid in seen:
                raise ExtractionError(f"vertex {v.label}: duplicate id {vid!r}")
            seen.add(vid)
            rows.append((vid, tuple((s.name, x) for s, x in zip(props, row[1:]))))
        graph.vertices[v.label] = rows
        graph.vertex_props[v.label] = [s.name for s in props]
    return graph


def extract(model: GraphModelDef, db: Database, cfg: RunConfig = RunConfig()) -> ExtractionResult:
    """Run the whole pipeline; ``db`` itself is never modified."""
    diags = validate_against_catalog(model, db)
    if diags:
        raise ExtractionError("model does not match the catalog:\n" +
                              "\n".join(f"  {d.code}: {d.message}" for d in diags))
    work = db.fork()
    t_start = time.perf_counter()
    graph = extract_vertices(model, work, work.counters)
    t_vertices = time.perf_counter()
    plan = optimize(model.edges, work, cfg.params, cfg.mode)
    t_plan = time.perf_counter()
    run = execute_plan(plan, work)
    t_exec = time.perf_counter()

    ids = {label: {vid for vid, _ in rows} for label, rows in graph.vertices.items()}
    dropped = 0
    dangling = 0
    for e in model.edges:
        rel = run.results[e.label]
        names = [s.name for s in e.properties]
        if names:
            rows = [(r[0], r[1], tuple(zip(names, r[2:]))) for r in rel.rows
                    if r[0] is not None and r[1] is not None]
        else:
            rows = [(r[0], r[1], ()) for r in rel.rows if r[0] is not None and r[1] is not None]
        dropped += len(rel.rows) - len(rows)
        if cfg.dedup_edges:
            rows = list(dict.fromkeys(rows))
        src_ids, dst_ids = ids[e.src_label], ids[e.dst_label]
        if not ({r[0] for r in rows} <= src_ids and {r[1] for r in rows} <= dst_ids):
            bad = [r for r in rows if r[0] not in src_ids or r[1] not in dst_ids]
            dangling += len(bad)
            if not cfg.allow_dangling:
                raise ExtractionError(f"edge {e.label}: {len(bad)} edge(s) reference missing vertices, "
                                      f"first ({bad[0][0]!r}, {bad[0][1]!r}); use --allow-dangling "
                                      "to keep them")
        graph.edges[e.label] = rows
        graph.edge_props[e.label] = names
    t_end = time.perf_counter()

    counters = work.counters
    metrics = {
        "mode": cfg.mode,
        "wall_seconds": t_end - t_start,
        "vertex_seconds": t_vertices - t_start,
        "plan_seconds": t_plan - t_vertices,
        "execute_seconds": t_exec - t_plan,
        "unit_seconds": [{"unit": n, "seconds": s} for n, s in run.unit_seconds],
        "unit_join_signatures": [{"unit": n, "joins": {k[5:]: v for k, v in sorted(c.items())
                                                       if k.startswith("join:")}}
                                 for n, c in run.unit_counters],
        "estimated_cost": plan.cost,
        "plan": plan.structure(),
        "rewrites": [s.rewrite for s in plan.provenance],
        "joins": counters.get("joins", 0),
        "join_signatures": {k[5:]: v for k, v in sorted(counters.items()) if k.startswith("join:")},
        "tuples_built": counters.get("tuples_built", 0),
        "tuples_probed": counters.get("tuples_probed", 0),
        "tuples_emitted": counters.get("tuples_emitted", 0),
        "scans": {k[5:]: v for k, v in sorted(counters.items()) if k.startswith("scan:")},
        "materializations": counters.get("materializations", 0),
        "bytes_materialized": counters.get("bytes_materialized", 0),
        "views": {v.name: {"pattern": v.label, "rows": len(work.tables[v.name]),
                           "pages": work.stats[v.name].page_count}
                  for v in plan.views if v.name in work.tables},
        "vertices": graph.vertex_count,
        "edges": graph.edge_count,
        "null_endpoint_rows_dropped": dropped,
        "dangling_edges": dangling,
    }
    return ExtractionResult(graph, plan, metrics)


# --------------------------------------------------------------------------- output


def write_graph(graph: PropertyGraph, outdir: str | Path, fmt: str = "csv") -> list[Path]:
    """Write ``vertices_<label>`` and ``edges_<label>`` files in canonical order."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    g = graph.canonical()
    written = []
    for label, rows in g.vertices.items():
        props = g.vertex_props.get(label, [])
        path = out / f"vertices_{label}.{fmt}"
        with path.open("w", newline="") as fh:
            if fmt == "csv":
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["id"] + props)
                for vid, pv in rows:
                    w.writerow([format_value(vid)] + [format_value(x) for _, x in pv])
            else:
                for vid, pv in rows:
                    fh.write(json.dumps({"id": vid, "properties": dict(pv)}) + "\n")
        written.append(path)
    for label, rows in g.edges.items():
        props = g.edge_props.get(label, [])
        path = out / f"edges_{label}.{fmt}"
        with path.open("w", newline="") as fh:
            if fmt == "csv":
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["src", "dst"] + props)
                for src, dst, pv in rows:
                    w.writerow([format_value(src), format_value(dst)] + [format_value(x) for _, x in pv])
            else:
                for src, dst, pv in rows:
                    fh.write(json.dumps({"src": src, "dst": dst, "properties": dict(pv)}) + "\n")
        written.append(path)
    return written


# --------------------------------------------------------------------------- catalog files


def load_catalog(path: str | Path) -> Database:
    """Load every table listed in a catalog JSON document.

    ``{"page_size": 8192, "delimiter": ",", "tables": [{"name": ..., "path": ...,
    "columns": [{"name": ..., "kind": ...}]}]}``; paths are relative to the file.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CatalogError(f"{path}: invalid JSON ({exc})") from None
    db = Database(int(doc.get("page_size", 8192)))
    delimiter = doc.get("delimiter", ",")
    for t in doc.get("tables", []):
        try:
            name, rel_path, cols = t["name"], t["path"], t["columns"]
            schema = Schema(tuple(Column(c["name"], Kind.parse(c["kind"])) for c in cols))
        except (KeyError, TypeError) as exc:
            raise CatalogError(f"{path}: malformed table entry {t!r} ({exc})") from None
        with (path.parent / rel_path).open(newline="") as fh:
            db.load_table(name, fh, schema, delimiter)
    return db


def save_catalog(db: Database, outdir: str | Path, delimiter: str = ",") -> Path:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    tables = []
    for name in sorted(db.tables):
        if name in db.views:
            continue
        rel = db.tables[name]
        with (out / f"{name}.csv").open("w", newline="") as fh:
            write_delimited(rel, fh, delimiter)
        tables.append({"name": name, "path": f"{name}.csv",
                       "columns": [{"name": c.base_name, "kind": c.kind.value} for c in rel.schema]})
    doc = {"page_size": db.page_size, "delimiter": delimiter, "tables": tables}
    target = out / "catalog.json"
    target.write_text(json.dumps(doc, indent=2) + "\n")
    return target
