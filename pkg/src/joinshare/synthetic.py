"""Seeded star-schema generator for a retail sales channel.

Fact table ``SS(c_id, i_no, p_no, s_id)`` references customers ``C``, items
``I``, promotions ``P`` and stores ``S``.  Foreign keys follow a bounded Zipf
law over a shuffled key order; most sales carry no promotion.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .relational.catalog import DEFAULT_PAGE_SIZE, Database

WORKLOAD_MODEL = """\
CREATE GRAPH(Graph_Name: Retail);
CREATE VERTEX(Graph_Name: Retail, Label: Customer, ID_Column: c_id, Query: SELECT name FROM C);
CREATE VERTEX(Graph_Name: Retail, Label: Item, ID_Column: i_no, Query: SELECT name, price FROM I);
CREATE VERTEX(Graph_Name: Retail, Label: Store, ID_Column: s_id, Query: SELECT name FROM S);
CREATE EDGE(Graph_Name: Retail, Label: Sell, Src_Label: Store, Dst_Label: Item,
  Query: SELECT null FROM SS, I, S WHERE SS.i_no = I.i_no AND SS.s_id = S.s_id);
CREATE EDGE(Graph_Name: Retail, Label: Buy, Src_Label: Customer, Dst_Label: Item,
  Query: SELECT null FROM C, SS, I WHERE C.c_id = SS.c_id AND SS.i_no = I.i_no);
CREATE EDGE(Graph_Name: Retail, Label: CoPur, Src_Label: Customer, Dst_Label: Customer,
  Query: SELECT null FROM C1, SS1, I, SS2, C2
  WHERE C1.c_id = SS1.c_id AND SS1.i_no = I.i_no AND I.i_no = SS2.i_no AND SS2.c_id = C2.c_id);
CREATE EDGE(Graph_Name: Retail, Label: SamePro, Src_Label: Customer, Dst_Label: Customer,
  Query: SELECT null FROM C1, SS1, P, SS2, C2
  WHERE C1.c_id = SS1.c_id AND SS1.p_no = P.p_no AND P.p_no = SS2.p_no AND SS2.c_id = C2.c_id);
"""


@dataclass(frozen=True)
class SyntheticSpec:
    ss: int = 10_000
    c: int = 500
    i: int = 200
    p: int = 50
    s: int = 20
    skew: float = 0.6
    promo_fraction: float = 0.2

    def __post_init__(self):
        for name in ("c", "i", "p", "s"):
            if getattr(self, name) < 1:
                raise ValueError(f"table size {name} must be positive")
        if self.ss < 0:
            raise ValueError("fact table size must be non-negative")
        if self.skew < 0:
            raise ValueError("skew must be non-negative")
        if not 0.0 <= self.promo_fraction <= 1.0:
            raise ValueError("promo_fraction must lie in [0, 1]")


def _zipf_keys(rng: np.random.Generator, n: int, size: int, skew: float) -> np.ndarray:
    """Keys 1..n drawn with probability proportional to rank**-skew over a random ranking."""
    weights = 1.0 / np.arange(1, n + 1, dtype=float) ** skew
    probs = weights / weights.sum()
    ranked = rng.permutation(n) + 1
    return ranked[rng.choice(n, size=size, p=probs)]


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec(), seed: int = 0,
                       page_size: int = DEFAULT_PAGE_SIZE) -> Database:
    rng = np.random.default_rng(seed)
    db = Database(page_size)
    db.add_rows("C", [("c_id", "int"), ("name", "text")],
                [(k, f"customer{k}") for k in range(1, spec.c + 1)])
    prices = np.round(rng.uniform(1.0, 100.0, size=spec.i), 2)
    db.add_rows("I", [("i_no", "int"), ("name", "text"), ("price", "float")],
                [(k, f"item{k}", float(prices[k - 1])) for k in range(1, spec.i + 1)])
    promo_items = rng.integers(1, spec.i + 1, size=spec.p)
    db.add_rows("P", [("p_no", "int"), ("i_no", "int"), ("name", "text")],
                [(k, int(promo_items[k - 1]), f"promo{k}") for k in range(1, spec.p + 1)])
    db.add_rows("S", [("s_id", "int"), ("name", "text")],
                [(k, f"store{k}") for k in range(1, spec.s + 1)])

    n = spec.ss
    c_ids = _zipf_keys(rng, spec.c, n, spec.skew)
    i_nos = _zipf_keys(rng, spec.i, n, spec.skew)
    s_ids = _zipf_keys(rng, spec.s, n, spec.skew)
    p_nos = _zipf_keys(rng, spec.p, n, spec.skew)
    promoted = rng.random(n) < spec.promo_fraction
    # half of the promoted sales buy the promoted item itself
    on_item = promoted & (rng.random(n) < 0.5)
    i_nos = np.where(on_item, promo_items[p_nos - 1], i_nos)
    rows = [(int(c), int(i), int(p) if pr else None, int(s))
            for c, i, p, pr, s in zip(c_ids, i_nos, p_nos, promoted, s_ids)]
    db.add_rows("SS", [("c_id", "int"), ("i_no", "int"), ("p_no", "int"), ("s_id", "int")], rows)
    return db


def checksum(db: Database) -> str:
    """Content hash over all tables in name order."""
    h = hashlib.sha256()
    for name in sorted(db.tables):
        rel = db.tables[name]
        h.update(name.encode())
        h.update(repr(rel.schema.names).encode())
        for row in rel.rows:
            h.update(repr(row).encode())
    return h.hexdigest()
