import math
import os
import subprocess
import sys
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from joinshare.errors import CatalogError, LoadError, SchemaError
from joinshare.relational import _kernels_py, kernels
from joinshare.relational.catalog import Database, compute_stats, pages_for
from joinshare.relational.operators import (Cmp, distinct, hash_inner_join, hash_left_outer_join,
                                            nested_loop_join, project, select)
from joinshare.relational.relation import Relation, Schema
from joinshare.relational.values import Kind, parse_value, row_sort_key, sort_key

from oracles import holds, nl_anti, nl_join


def rel(names, rows, kind="int"):
    return Relation(Schema.of(*[(n, kind) for n in names]), rows)


keys = st.one_of(st.none(), st.integers(1, 4))
small_rows = st.lists(st.tuples(keys, st.integers(0, 9)), max_size=20)


# --------------------------------------------------------------------------- loading


def test_load_three_rows():
    db = Database()
    r = db.load_table("T", "a,b\nx,1\ny,2\nz,3\n", Schema.of(("a", "text"), ("b", "int")))
    assert len(r) == 3
    assert db.stats["T"].cardinality == 3


def test_load_header_only_has_one_page():
    db = Database()
    db.load_table("T", "a,b\n", Schema.of(("a", "text"), ("b", "int")))
    assert db.stats["T"].cardinality == 0
    assert db.stats["T"].page_count == 1


def test_load_type_violation_reports_line_and_column():
    db = Database()
    with pytest.raises(LoadError) as exc:
        db.load_table("T", "a,b\nx,notanumber\n", Schema.of(("a", "text"), ("b", "int")))
    assert exc.value.line == 2
    assert exc.value.column == "b"
    assert "line 2" in str(exc.value)


def test_load_rejects_duplicate_and_bad_header():
    db = Database()
    db.load_table("T", "a\n1\n", Schema.of(("a", "int")))
    with pytest.raises(CatalogError):
        db.load_table("T", "a\n1\n", Schema.of(("a", "int")))
    with pytest.raises(LoadError):
        db.load_table("U", "b\n1\n", Schema.of(("a", "int")))


def test_unknown_kind():
    with pytest.raises(SchemaError):
        Kind.parse("decimal")


def test_empty_fields_are_null():
    db = Database()
    r = db.load_table("T", "a,b\n,1\nq,\n", Schema.of(("a", "text"), ("b", "int")))
    assert r.rows == [(None, 1), ("q", None)]


def test_parse_values():
    assert parse_value("3", Kind.INT) == 3
    assert parse_value("2.5", Kind.FLOAT) == 2.5
    assert parse_value("true", Kind.BOOL) is True
    with pytest.raises(ValueError):
        parse_value("maybe", Kind.BOOL)


def test_null_sorts_first():
    assert sorted([3, None, 1], key=sort_key) == [None, 1, 3]
    assert row_sort_key((None, 2)) < row_sort_key((0, 1))


# --------------------------------------------------------------------------- joins


def test_inner_join_hand_example():
    r = rel(["R.a"], [(1,), (2,)])
    s = rel(["S.a"], [(2,), (2,), (3,)])
    out = hash_inner_join(r, s, [("R.a", "S.a")])
    assert out.schema.names == ["R.a", "S.a"]
    assert out.rows == [(2, 2), (2, 2)]


def test_inner_join_with_empty_side():
    r = rel(["R.a"], [(1,), (2,)])
    assert len(hash_inner_join(r, rel(["S.a"], []), [("R.a", "S.a")])) == 0


def test_outer_join_hand_example():
    r = rel(["R.a"], [(1,), (2,)])
    s = rel(["S.a"], [(2,)])
    out = hash_left_outer_join(r, s, [("R.a", "S.a")])
    assert Counter(out.rows) == Counter([(1, None), (2, 2)])


def test_outer_join_with_empty_inner_pads_everything():
    r = rel(["R.a", "R.b"], [(1, 5), (None, 6)])
    out = hash_left_outer_join(r, rel(["S.a"], []), [("R.a", "S.a")])
    assert out.rows == [(1, 5, None), (None, 6, None)]


def test_null_keys_never_match():
    r = rel(["R.a"], [(None,), (1,)])
    s = rel(["S.a"], [(None,), (1,)])
    assert hash_inner_join(r, s, [("R.a", "S.a")]).rows == [(1, 1)]


def test_join_errors():
    r = rel(["R.a"], [(1,)])
    s = Relation(Schema.of(("S.a", "text")), [("1",)])
    with pytest.raises(SchemaError):
        hash_inner_join(r, rel(["S.a"], [(1,)]), [("R.zz", "S.a")])
    with pytest.raises(SchemaError):
        hash_inner_join(r, s, [("R.a", "S.a")])


@settings(max_examples=150, deadline=None)
@given(small_rows, small_rows)
def test_inner_join_matches_nested_loop(rrows, srows):
    r = rel(["R.k", "R.v"], rrows)
    s = rel(["S.k", "S.v"], srows)
    out = hash_inner_join(r, s, [("R.k", "S.k")])
    assert Counter(out.rows) == Counter(nl_join(rrows, srows, [(0, 0)]))
    assert len(out) <= len(r) * len(s)


@settings(max_examples=150, deadline=None)
@given(small_rows, small_rows)
def test_inner_join_two_keys(rrows, srows):
    r = rel(["R.k", "R.v"], rrows)
    s = rel(["S.k", "S.v"], srows)
    out = hash_inner_join(r, s, [("R.k", "S.k"), ("R.v", "S.v")])
    assert Counter(out.rows) == Counter(nl_join(rrows, srows, [(0, 0), (1, 1)]))


@settings(max_examples=150, deadline=None)
@given(small_rows, small_rows)
def test_outer_join_splits_into_inner_and_anti(rrows, srows):
    r = rel(["R.k", "R.v"], rrows)
    s = rel(["S.k", "S.v"], srows)
    out = hash_left_outer_join(r, s, [("R.k", "S.k")])
    matched = [row for row in out.rows if row[2:] != (None, None)]
    padded = [row[:2] for row in out.rows if row[2:] == (None, None)]
    assert Counter(matched) == Counter(hash_inner_join(r, s, [("R.k", "S.k")]).rows)
    assert Counter(padded) == Counter(nl_anti(rrows, srows, [(0, 0)]))
    assert {row[:2] for row in out.rows} == set(rrows)


@settings(max_examples=100, deadline=None)
@given(small_rows, small_rows)
def test_join_commutes_up_to_column_order(rrows, srows):
    r = rel(["R.k", "R.v"], rrows)
    s = rel(["S.k", "S.v"], srows)
    rs = hash_inner_join(r, s, [("R.k", "S.k")])
    sr = hash_inner_join(s, r, [("S.k", "R.k")])
    assert Counter(rs.rows) == Counter(row[2:] + row[:2] for row in sr.rows)


@settings(max_examples=100, deadline=None)
@given(small_rows, small_rows, st.sampled_from(["<", "<=", ">", ">=", "<>"]))
def test_nested_loop_join_matches_oracle(rrows, srows, op):
    r = rel(["R.k", "R.v"], rrows)
    s = rel(["S.k", "S.v"], srows)
    out = nested_loop_join(r, s, [Cmp("R.v", op, right="S.v")])
    expect = [a + b for a in rrows for b in srows if holds(a[1], op, b[1])]
    assert Counter(out.rows) == Counter(expect)


@settings(max_examples=100, deadline=None)
@given(small_rows, small_rows)
def test_residual_filters_matches(rrows, srows):
    r = rel(["R.k", "R.v"], rrows)
    s = rel(["S.k", "S.v"], srows)
    out = hash_inner_join(r, s, [("R.k", "S.k")], [Cmp("R.v", "<", right="S.v")])
    expect = [a + b for a in rrows for b in srows if holds(a[0], "=", b[0]) and holds(a[1], "<", b[1])]
    assert Counter(out.rows) == Counter(expect)


# --------------------------------------------------------------------------- select / project


def test_select_constant():
    assert select(rel(["a"], [(5,), (6,)]), [Cmp("a", "=", value=5)]).rows == [(5,)]


def test_select_null_column_comparison_excluded():
    r = rel(["a", "b"], [(None, None), (1, 1)])
    assert select(r, [Cmp("a", "=", right="b")]).rows == [(1, 1)]


@settings(max_examples=100, deadline=None)
@given(small_rows, st.sampled_from(["=", "<", ">", "<>", "<=", ">="]), st.integers(0, 9))
def test_select_matches_row_scan(rows, op, c):
    r = rel(["k", "v"], rows)
    out = select(r, [Cmp("v", op, value=c), Cmp("k", "<=", right="v")])
    assert out.rows == [t for t in rows if holds(t[1], op, c) and holds(t[0], "<=", t[1])]


def test_project_dedup():
    r = Relation(Schema.of(("a", "int"), ("b", "text")), [(1, "x"), (1, "y")])
    assert project(r, ["a"], dedup=True).rows == [(1,)]


def test_project_identity():
    r = rel(["a", "b"], [(1, 2), (1, 2)])
    out = project(r, ["a", "b"])
    assert out.same_multiset(r)


def test_project_unknown_column():
    with pytest.raises(SchemaError):
        project(rel(["a"], [(1,)]), ["zz"])


@settings(max_examples=100, deadline=None)
@given(small_rows, st.booleans())
def test_project_matches_oracle(rows, dedup):
    r = rel(["k", "v"], rows)
    out = project(r, ["v", "k"], dedup=dedup)
    swapped = [(v, k) for k, v in rows]
    if dedup:
        assert sorted(out.rows, key=row_sort_key) == sorted(set(swapped), key=row_sort_key)
    else:
        assert out.rows == swapped


def test_distinct_keeps_first_order():
    assert distinct(rel(["a"], [(2,), (1,), (2,)])).rows == [(2,), (1,)]


# --------------------------------------------------------------------------- materialize


def test_materialize_empty():
    db = Database()
    stats = db.materialize(rel(["x.a"], []), "V")
    assert stats.cardinality == 0 and stats.page_count == 1


def test_materialize_round_trip_and_counters():
    db = Database()
    r = rel(["x.a", "y.b"], [(1, 2), (1, 2), (3, None)])
    db.materialize(r, "V")
    back = db.scan("V")
    assert Counter(back.rows) == Counter(r.rows)
    assert db.counters["materializations"] == 1
    assert db.counters["bytes_materialized"] == db.stats["V"].total_bytes > 0
    with pytest.raises(CatalogError):
        db.materialize(r, "V")


def test_page_count_from_serialized_bytes():
    db = Database(page_size=4096)
    rows = [(i, f"name{i}") for i in range(10_000)]
    stats = db.materialize(Relation(Schema.of(("a", "int"), ("b", "text")), rows), "V")
    # 8-byte ints, text as a 4-byte length prefix plus UTF-8 payload
    nbytes = sum(8 + 4 + len(f"name{i}".encode()) for i in range(10_000))
    assert stats.total_bytes == nbytes
    assert stats.page_count == math.ceil(nbytes / 4096)
    assert pages_for(0, 4096) == 1


def test_stats_distinct_ignores_null():
    stats = compute_stats(rel(["T.a"], [(1,), (1,), (None,), (2,)]))
    assert stats.distinct == {"a": 2}
    assert stats.distinct["a"] <= stats.cardinality


def test_scan_requalifies_and_projects():
    db = Database()
    db.add_rows("T", [("a", "int"), ("b", "int")], [(1, 2)])
    r = db.scan("T", "X", ["b"])
    assert r.schema.names == ["X.b"] and r.rows == [(2,)]
    assert db.counters["scan:T"] == 1


def test_fork_isolated():
    db = Database()
    db.add_rows("T", [("a", "int")], [(1,)])
    f = db.fork()
    f.materialize(db.tables["T"], "V")
    assert "V" not in db and "V" in f


def test_checked_relation_rejects_bad_rows():
    with pytest.raises(SchemaError):
        Relation.checked(Schema.of(("a", "int")), [("x",)])
    with pytest.raises(SchemaError):
        Relation.checked(Schema.of(("a", "int")), [(1, 2)])


# --------------------------------------------------------------------------- kernels


@settings(max_examples=100, deadline=None)
@given(small_rows, small_rows, st.booleans())
def test_compiled_and_python_kernels_agree(rrows, srows, outer):
    if kernels.IMPLEMENTATION != "cython":
        pytest.skip("compiled extension not built")
    from joinshare.relational import _hashjoin

    for key in ((0,), (0, 1)):
        t_py = _kernels_py.build_table(srows, key)
        t_cy = _hashjoin.build_table(srows, key)
        assert t_py == t_cy
        pad = (None, None)
        assert (_kernels_py.probe_table(rrows, key, t_py, outer, pad, None)
                == _hashjoin.probe_table(rrows, key, t_cy, outer, pad, None))
    assert _kernels_py.take(rrows, (1, 0)) == _hashjoin.take(rrows, (1, 0))
    assert _kernels_py.take(rrows, ()) == _hashjoin.take(rrows, ())


def test_pure_python_fallback_selected_by_env():
    code = "from joinshare.relational import kernels; print(kernels.IMPLEMENTATION)"
    env = dict(os.environ, JOINSHARE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
