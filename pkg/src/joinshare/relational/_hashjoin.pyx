# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hash-join kernels; same contract as ``_kernels_py``."""


def build_table(list rows, tuple key_idx):
    cdef dict table = {}
    cdef tuple row
    cdef list bucket
    cdef Py_ssize_t k0, i, n = len(key_idx)
    cdef object key
    if n == 1:
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
    cdef list parts
    for row in rows:
        parts = [row[i] for i in key_idx]
        if None in parts:
            continue
        key = tuple(parts)
        bucket = table.get(key)
        if bucket is None:
            table[key] = [row]
        else:
            bucket.append(row)
    return table


def probe_table(list rows, tuple key_idx, dict table, bint outer, tuple pad, object residual):
    cdef list out = []
    cdef tuple row, m
    cdef list matches, kept, parts
    cdef object key, hit
    cdef Py_ssize_t k0 = key_idx[0], i
    cdef bint single = len(key_idx) == 1
    for row in rows:
        if single:
            key = row[k0]
            hit = None if key is None else table.get(key)
        else:
            parts = [row[i] for i in key_idx]
            hit = None if None in parts else table.get(tuple(parts))
        if hit is not None:
            matches = <list>hit
            if residual is not None:
                kept = []
                for m in matches:
                    if residual(row, m):
                        kept.append(m)
                matches = kept
            if matches:
                for m in matches:
                    out.append(row + m)
                continue
        if outer:
            out.append(row + pad)
    return out


def take(list rows, tuple idx):
    cdef Py_ssize_t n = len(idx), i, j
    cdef tuple row
    cdef list out = []
    if n == 0:
        return [() for row in rows]
    if n == 1:
        i = idx[0]
        for row in rows:
            out.append((row[i],))
        return out
    if n == 2:
        i = idx[0]
        j = idx[1]
        for row in rows:
            out.append((row[i], row[j]))
        return out
    for row in rows:
        out.append(tuple([row[i] for i in idx]))
    return out
