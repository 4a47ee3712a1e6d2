import random
from collections import Counter

import pytest

from joinshare.cost import CostParams
from joinshare.dsl import parse_query
from joinshare.errors import NoCommonJoinError
from joinshare.executor import execute_graph
from joinshare.joingraph import INNER, OUTER, build_join_graph
from joinshare.jsoj import (execute_merged, execute_merged_naive, merge_candidates, merge_pair,
                            recover_from_naive)
from joinshare.relational.catalog import Database

from oracles import evaluate, random_db, random_query_pair


def graph(sql):
    return build_join_graph(parse_query(sql))


SELL = "SELECT S.s_id AS src, I.i_no AS dst FROM SS, I, S WHERE SS.i_no = I.i_no AND SS.s_id = S.s_id"
BUY = "SELECT C.c_id AS src, I.i_no AS dst, C.name AS who FROM C, SS, I WHERE C.c_id = SS.c_id AND SS.i_no = I.i_no"


def sales_db():
    db = Database()
    db.add_rows("SS", [("c_id", "int"), ("i_no", "int"), ("s_id", "int")],
                [(1, 10, 100), (1, 11, 100), (2, 10, 101), (2, 10, 101), (3, 12, None)])
    db.add_rows("I", [("i_no", "int"), ("name", "text")], [(10, "a"), (11, "b"), (12, "c")])
    db.add_rows("S", [("s_id", "int"), ("name", "text")], [(100, "s1"), (101, "s2")])
    db.add_rows("C", [("c_id", "int"), ("name", "text")], [(1, "ann"), (2, "bo")])
    return db


def branching_pair():
    q1 = graph("SELECT A.b AS x FROM A, B B1, B B2, C, D "
               "WHERE A.b = B1.id AND B1.c = C.id AND B1.d = D.id AND B2.d = D.id")
    q2 = graph("SELECT E.id AS y FROM B, D, E WHERE B.d = D.id AND D.e = E.id")
    return q1, q2


def check_unit_shape(unit):
    for e in unit.merged_graph.edges:
        a, b = e.endpoints
        inside_part = any(a in p.aliases and b in p.aliases for p in unit.parts)
        if (a in unit.shared_aliases and b in unit.shared_aliases) or inside_part:
            assert e.kind == INNER
        else:
            assert e.kind == OUTER and e.preserved in unit.shared_aliases
            assert (a in unit.shared_aliases) != (b in unit.shared_aliases)


# --------------------------------------------------------------------------- structure


def test_sell_buy_structure():
    db = sales_db()
    unit = merge_pair(graph(SELL), graph(BUY), db, CostParams(), ("Sell", "Buy"))
    g = unit.merged_graph
    assert unit.shared_aliases == {"SS", "I"}
    inner = [str(e.cond) for e in g.edges if e.kind == INNER]
    outer = sorted((str(e.cond), e.preserved) for e in g.edges if e.kind == OUTER)
    assert inner == ["I.i_no = SS.i_no"]
    assert outer == [("C.c_id = SS.c_id", "SS"), ("S.s_id = SS.s_id", "SS")]
    check_unit_shape(unit)
    assert [o.name for o in g.outputs] == ["Sell.src", "Sell.dst", "Buy.src", "Buy.dst", "Buy.who"]
    assert unit.recipe()["Sell"]["parts"] == [["S"]]


def test_branching_pair_has_two_merged_candidates():
    q1, q2 = branching_pair()
    units = merge_candidates(q1, q2)
    assert len(units) == 2
    shapes = {}
    for u in units:
        check_unit_shape(u)
        parts = sorted(tuple(sorted(p.aliases)) for p in u.parts)
        shapes[tuple(sorted(u.shared_aliases))] = (parts, len(u.outer_edges))
    # shared B1-D: A, C, B2 and E hang off the core by four outer joins
    assert shapes[("B1", "D")] == ([("A",), ("B2",), ("C",), ("E",)], 4)
    # shared B2-D: {A,B1,C} attaches by one edge, E by another
    assert shapes[("B2", "D")] == ([("A", "B1", "C"), ("E",)], 2)


def test_identical_queries_merge_without_outer_joins():
    q = graph("SELECT A.x AS o FROM A, B WHERE A.x = B.y")
    db = Database()
    db.add_rows("A", [("x", "int")], [(1,), (2,)])
    db.add_rows("B", [("y", "int")], [(2,), (2,)])
    unit = merge_pair(q, q.rename({"A": "P", "B": "Q"}), db)
    assert unit.outer_edges == [] and unit.parts == ()
    assert sorted(unit.merged_graph.aliases) == ["A", "B"]
    r1, r2 = execute_merged(unit, db)
    assert r1.rows == r2.rows == [(2,), (2,)]


def test_no_common_join():
    db = sales_db()
    with pytest.raises(NoCommonJoinError):
        merge_pair(graph("SELECT null FROM S, SS WHERE S.s_id = SS.s_id"),
                   graph("SELECT null FROM C, SS WHERE C.c_id = SS.c_id"), db)


# --------------------------------------------------------------------------- execution


def test_sell_buy_execution_matches_direct():
    db = sales_db()
    sell, buy = graph(SELL), graph(BUY)
    unit = merge_pair(sell, buy, db)
    counters = Counter()
    r1, r2 = execute_merged(unit, db, counters)
    assert r1.multiset() == execute_graph(sell, db).multiset()
    assert r2.multiset() == execute_graph(buy, db).multiset()
    assert r1.schema.names == ["src", "dst"] and r2.schema.names == ["src", "dst", "who"]
    # the shared join ran once
    assert counters["join:I⋈SS"] == 1


def test_empty_part_only_affects_its_origin():
    db = sales_db()
    db.tables.pop("C")
    db.stats.pop("C")
    db.add_rows("C", [("c_id", "int"), ("name", "text")], [])
    unit = merge_pair(graph(SELL), graph(BUY), db)
    r1, r2 = execute_merged(unit, db)
    assert len(r2) == 0
    assert r1.multiset() == execute_graph(graph(SELL), db).multiset()
    assert len(r1) == 4


def test_random_instances_every_decomposition():
    rng = random.Random(1)
    for trial in range(200):
        db = random_db(rng, max_rows=25)
        g1, g2 = random_query_pair(rng)
        e1, e2 = evaluate(g1, db), evaluate(g2, db)
        for unit in merge_candidates(g1, g2):
            check_unit_shape(unit)
            r1, r2 = execute_merged(unit, db)
            assert r1.multiset() == e1, (trial, unit.decomposition.describe())
            assert r2.multiset() == e2, (trial, unit.decomposition.describe())


def test_naive_merged_relation_contains_each_origin():
    rng = random.Random(2)
    for trial in range(80):
        db = random_db(rng, max_rows=20)
        g1, g2 = random_query_pair(rng)
        for unit in merge_candidates(g1, g2)[:3]:
            merged = execute_merged_naive(unit, db)
            for i, g in enumerate((g1, g2)):
                got = recover_from_naive(unit, merged, i)
                assert set(got.rows) == set(evaluate(g, db)), trial
                assert len(got.rows) == len(set(got.rows))


def test_no_interference():
    rng = random.Random(3)
    q1 = graph("SELECT T0.v AS a, T2.k1 AS b FROM T0, T1, T2 WHERE T0.k1 = T1.k1 AND T1.k2 = T2.k2")
    q2 = graph("SELECT T3.v AS c FROM T0, T1, T3 WHERE T0.k1 = T1.k1 AND T1.k3 = T3.k3")
    for _ in range(30):
        db = random_db(rng)
        units = merge_candidates(q1, q2)
        before = [execute_merged(u, db)[0].multiset() for u in units]
        mutated = random_db(rng, tables=("T3",), max_rows=50)
        db.tables["T3"], db.stats["T3"] = mutated.tables["T3"], mutated.stats["T3"]
        after = [execute_merged(u, db)[0].multiset() for u in units]
        assert before == after
        assert [execute_merged(u, db)[1].multiset() for u in units] == [evaluate(q2, db)] * len(units)
