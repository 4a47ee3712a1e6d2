"""Command line interface."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .cost import CostParams, calibrate
from .dsl import parse_model, render_model, validate_against_catalog
from .errors import JoinShareError
from .planner import MODES, explain_json, explain_text, optimize
from .pipeline import FORMATS, RunConfig, extract, load_catalog, save_catalog, write_graph
from .relational import kernels
from .synthetic import WORKLOAD_MODEL, SyntheticSpec, checksum, generate_synthetic


def _params(path: str | None) -> CostParams:
    return CostParams.load(path) if path else CostParams()


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(package_name="joinshare")
def main() -> None:
    """Extract property graphs from relational tables with shared joins."""


@main.command()
@click.argument("catalog", type=click.Path(exists=True, dir_okay=False))
def load(catalog: str) -> None:
    """Load a catalog and print table statistics."""
    try:
        db = load_catalog(catalog)
    except (JoinShareError, OSError) as exc:
        _fail(exc)
    for name in sorted(db.tables):
        st = db.stats[name]
        click.echo(f"{name}: {st.cardinality} rows, {st.page_count} pages, "
                   f"distinct {json.dumps(st.distinct, sort_keys=True)}")


@main.command()
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--catalog", type=click.Path(exists=True, dir_okay=False), help="Check names and kinds.")
@click.option("--render", is_flag=True, help="Print the normalized model.")
def parse(model: str, catalog: str | None, render: bool) -> None:
    """Check a graph model definition."""
    try:
        m = parse_model(Path(model).read_text())
    except JoinShareError as exc:
        _fail(exc)
    if catalog:
        try:
            db = load_catalog(catalog)
        except (JoinShareError, OSError) as exc:
            _fail(exc)
        diags = validate_against_catalog(m, db)
        for d in diags:
            click.echo(d.to_json(), err=True)
        if diags:
            sys.exit(1)
    if render:
        click.echo(render_model(m), nl=False)
    else:
        click.echo(f"graph {m.name}: {len(m.vertices)} vertex definition(s), {len(m.edges)} edge definition(s)")


@main.command()
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--catalog", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(MODES), default="hybrid", show_default=True)
@click.option("--params", type=click.Path(exists=True, dir_okay=False), help="Cost constants (JSON).")
@click.option("--json", "as_json", is_flag=True, help="Print the structured report.")
@click.option("--dot", type=click.Path(file_okay=False), help="Write join graphs of all units as dot files.")
def plan(model: str, catalog: str, mode: str, params: str | None, as_json: bool, dot: str | None) -> None:
    """Print the optimized extraction plan."""
    try:
        db = load_catalog(catalog)
        m = parse_model(Path(model).read_text(), db)
        p = _params(params)
        pl = optimize(m.edges, db, p, mode)
    except (JoinShareError, OSError, ValueError) as exc:
        _fail(exc)
    if dot:
        out = Path(dot)
        out.mkdir(parents=True, exist_ok=True)
        for q in pl.queries:
            (out / f"{q.label}.dot").write_text(q.graph.to_dot(q.label))
        for u in pl.merged:
            name = f"{u.labels[0]}+{u.labels[1]}"
            (out / f"{name}.dot").write_text(u.merged_graph.to_dot(name))
        for v in pl.views:
            (out / f"{v.name}.dot").write_text(v.definition.to_dot(v.name))
    if as_json:
        click.echo(json.dumps(explain_json(pl, db, p), indent=2))
    else:
        click.echo(explain_text(pl, db, p), nl=False)


@main.command(name="extract")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--catalog", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "outdir", required=True, type=click.Path(file_okay=False))
@click.option("--mode", type=click.Choice(MODES), default="hybrid", show_default=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True)
@click.option("--no-dedup", is_flag=True, help="Keep duplicate edges (multigraph output).")
@click.option("--allow-dangling", is_flag=True, help="Keep edges whose endpoints have no vertex.")
@click.option("--params", type=click.Path(exists=True, dir_okay=False), help="Cost constants (JSON).")
def extract_cmd(model: str, catalog: str, outdir: str, mode: str, fmt: str, no_dedup: bool,
                allow_dangling: bool, params: str | None) -> None:
    """Extract the graph and write it with a metrics file."""
    try:
        db = load_catalog(catalog)
        m = parse_model(Path(model).read_text(), db)
        cfg = RunConfig(mode, not no_dedup, fmt, _params(params), allow_dangling)
        result = extract(m, db, cfg)
        files = write_graph(result.graph, outdir, fmt)
    except (JoinShareError, OSError, ValueError) as exc:
        _fail(exc)
    metrics_path = Path(outdir) / "metrics.json"
    metrics_path.write_text(json.dumps(result.metrics, indent=2) + "\n")
    click.echo(f"{result.graph.vertex_count} vertices, {result.graph.edge_count} edges in "
               f"{result.metrics['wall_seconds']:.3f}s ({mode}); wrote {len(files)} file(s) and {metrics_path}")


@main.command()
@click.argument("outdir", type=click.Path(file_okay=False))
@click.option("--ss", default=10_000, show_default=True, help="Fact table rows.")
@click.option("--customers", "c", default=500, show_default=True)
@click.option("--items", "i", default=200, show_default=True)
@click.option("--promotions", "p", default=50, show_default=True)
@click.option("--stores", "s", default=20, show_default=True)
@click.option("--skew", default=0.6, show_default=True, help="Zipf exponent of foreign keys.")
@click.option("--seed", default=0, show_default=True)
def gen(outdir: str, ss: int, c: int, i: int, p: int, s: int, skew: float, seed: int) -> None:
    """Generate a synthetic retail database plus a workload model."""
    try:
        db = generate_synthetic(SyntheticSpec(ss, c, i, p, s, skew), seed)
    except ValueError as exc:
        _fail(exc)
    target = save_catalog(db, outdir)
    (Path(outdir) / "workload.gm").write_text(WORKLOAD_MODEL)
    click.echo(f"wrote {target} and {Path(outdir) / 'workload.gm'} (checksum {checksum(db)[:16]})")


@main.command()
@click.option("--catalog", type=click.Path(exists=True, dir_okay=False), help="Defaults to synthetic data.")
@click.option("--model", type=click.Path(exists=True, dir_okay=False), help="Defaults to the retail workload.")
@click.option("--ss", default=20_000, show_default=True, help="Fact rows when generating data.")
@click.option("--seed", default=0, show_default=True)
@click.option("--repeat", default=3, show_default=True, help="Runs per mode; the best time is reported.")
@click.option("--params", type=click.Path(exists=True, dir_okay=False))
def bench(catalog: str | None, model: str | None, ss: int, seed: int, repeat: int, params: str | None) -> None:
    """Compare wall time and estimated cost of the four modes."""
    try:
        if catalog:
            db = load_catalog(catalog)
        else:
            db = generate_synthetic(SyntheticSpec(ss=ss, c=max(1, ss // 10), i=max(1, ss // 10),
                                                  p=max(1, ss // 100), s=max(1, ss // 1000)), seed)
        m = parse_model(Path(model).read_text() if model else WORKLOAD_MODEL, db)
        p = _params(params)
        rows = []
        baseline = None
        for mode in MODES:
            best = None
            for _ in range(max(1, repeat)):
                r = extract(m, db, RunConfig(mode, params=p))
                if best is None or r.metrics["wall_seconds"] < best.metrics["wall_seconds"]:
                    best = r
            if baseline is None:
                baseline = best
            same = best.graph.same_as(baseline.graph)
            rows.append((mode, best.metrics["wall_seconds"], best.plan.cost, " ".join(best.metrics["rewrites"]) or "-",
                         "yes" if same else "NO"))
    except (JoinShareError, OSError, ValueError) as exc:
        _fail(exc)
    click.echo(f"kernels: {kernels.IMPLEMENTATION}")
    click.echo(f"{'mode':<12} {'wall_s':>9} {'est_cost':>14}  {'same_graph':<10} rewrites")
    for mode, wall, cost, rewrites, same in rows:
        click.echo(f"{mode:<12} {wall:>9.3f} {cost:>14.1f}  {same:<10} {rewrites}")
    if any(r[4] == "NO" for r in rows):
        sys.exit(1)


@main.command(name="calibrate")
@click.option("--rows", default=200_000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Write the suggested constants here.")
def calibrate_cmd(rows: int, seed: int, out: str | None) -> None:
    """Measure per-tuple costs and suggest cost constants."""
    p = calibrate(rows, seed)
    text = p.to_json()
    if out:
        Path(out).write_text(text + "\n")
    click.echo(text)


if __name__ == "__main__":
    main()
