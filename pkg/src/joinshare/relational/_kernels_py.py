"""Pure-Python hash-join kernels.

Reference implementation of the functions in ``_hashjoin.pyx``; used when the
compiled extension is unavailable or ``JOINSHARE_PURE_PYTHON`` is set.
"""

from __future__ import annotations

from operator import itemgetter


def build_table(rows, key_idx):
    """Hash ``rows`` on the columns in ``key_idx``, skipping null keys."""
    table = {}
    if len(key_idx) == 1:
        k0 = key_idx[0]
        for row in rows:
            key = row[k0]
            if key is None:
                continue
            bucket = table.get(key)
            if bucket is None:
                table[key] = [row]
            else:
                bucket.append(row)
        return table
    for row in rows:
        key = tuple([row[i] for i in key_idx])
        if None in key:
            continue
        bucket = table.get(key)
        if bucket is None:
            table[key] = [row]
        else:
            bucket.append(row)
    return table


def probe_table(rows, key_idx, table, outer, pad, residual):
    """Probe ``table`` with each row; emit ``row + match`` per match.

    Unmatched rows are emitted as ``row + pad`` when ``outer`` is set.
    ``residual`` is an optional predicate over (row, match) for non-equality
    conjuncts.
    """
    out = []
    append = out.append
    single = len(key_idx) == 1
    k0 = key_idx[0]
    for row in rows:
        if single:
            key = row[k0]
            matches = None if key is None else table.get(key)
        else:
            key = tuple([row[i] for i in key_idx])
            matches = None if None in key else table.get(key)
        if matches is not None and residual is not None:
            matches = [m for m in matches if residual(row, m)]
        if matches:
            for m in matches:
                append(row + m)
        elif outer:
            append(row + pad)
    return out


def take(rows, idx):
    """Project every row onto the column positions ``idx``."""
    if len(idx) == 0:
        return [() for _ in rows]
    if len(idx) == 1:
        i = idx[0]
        return [(r[i],) for r in rows]
    getter = itemgetter(*idx)
    return [getter(r) for r in rows]
