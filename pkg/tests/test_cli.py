import json

import pytest
from click.testing import CliRunner

from joinshare import __version__
from joinshare.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    res = CliRunner().invoke(main, ["gen", str(root), "--ss", "800", "--customers", "60", "--items", "30",
                                    "--promotions", "10", "--stores", "4", "--seed", "3"])
    assert res.exit_code == 0, res.output
    return root


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_version():
    res = run("--version")
    assert res.exit_code == 0 and __version__ in res.output


def test_gen_writes_catalog_and_model(workspace):
    assert (workspace / "catalog.json").exists() and (workspace / "workload.gm").exists()
    doc = json.loads((workspace / "catalog.json").read_text())
    assert sorted(t["name"] for t in doc["tables"]) == ["C", "I", "P", "S", "SS"]


def test_load(workspace):
    res = run("load", workspace / "catalog.json")
    assert res.exit_code == 0
    assert "SS" in res.output and "800" in res.output


def test_parse_ok_and_render(workspace):
    res = run("parse", workspace / "workload.gm", "--catalog", workspace / "catalog.json", "--render")
    assert res.exit_code == 0
    assert "CREATE EDGE" in res.output


def test_parse_diagnostics(workspace, tmp_path):
    bad = tmp_path / "bad.gm"
    bad.write_text((workspace / "workload.gm").read_text().replace("SS.s_id = S.s_id", "SS.s_id = S.zz"))
    res = CliRunner().invoke(main, ["parse", str(bad), "--catalog", str(workspace / "catalog.json")])
    assert res.exit_code == 1
    lines = [json.loads(x) for x in res.stderr.splitlines() if x.startswith("{")]
    assert lines and lines[0]["code"] == "unknown-column"


def test_parse_syntax_error(tmp_path):
    bad = tmp_path / "bad.gm"
    bad.write_text("CREATE GRAPH(Graph_Name G);")
    res = run("parse", bad)
    assert res.exit_code == 1 and "error" in res.stderr


def test_plan_text_json_dot(workspace, tmp_path):
    res = run("plan", workspace / "workload.gm", "--catalog", workspace / "catalog.json")
    assert res.exit_code == 0 and res.output.startswith("plan: ")
    res = run("plan", workspace / "workload.gm", "--catalog", workspace / "catalog.json", "--json",
              "--mode", "naive", "--dot", tmp_path / "dot")
    data = json.loads(res.output)
    assert [u["kind"] for u in data["units"]] == ["PlainQuery"] * 4
    assert len(list((tmp_path / "dot").glob("*.dot"))) == 4


def test_extract(workspace, tmp_path):
    out = tmp_path / "g"
    res = run("extract", workspace / "workload.gm", "--catalog", workspace / "catalog.json", "--out", out,
              "--format", "jsonl")
    assert res.exit_code == 0, res.output
    assert (out / "edges_Sell.jsonl").exists() and (out / "vertices_Customer.jsonl").exists()
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["mode"] == "hybrid" and metrics["edges"] > 0


def test_extract_unknown_format(workspace, tmp_path):
    res = run("extract", workspace / "workload.gm", "--catalog", workspace / "catalog.json", "--out",
              tmp_path, "--format", "parquet")
    assert res.exit_code != 0


def test_extract_missing_catalog(workspace, tmp_path):
    res = run("extract", workspace / "workload.gm", "--catalog", tmp_path / "none.json", "--out", tmp_path)
    assert res.exit_code != 0


def test_bench_small(workspace):
    res = run("bench", "--catalog", workspace / "catalog.json", "--model", workspace / "workload.gm",
              "--repeat", "1")
    assert res.exit_code == 0, res.output
    assert "kernels:" in res.output
    for mode in ("naive", "js-oj-only", "js-mv-only", "hybrid"):
        assert mode in res.output


def test_calibrate(tmp_path):
    out = tmp_path / "p.json"
    res = run("calibrate", "--rows", "20000", "--out", out)
    assert res.exit_code == 0
    assert set(json.loads(out.read_text())) >= {"A_D", "c_build", "c_probe", "c_out"}
