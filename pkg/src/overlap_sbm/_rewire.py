"""Degree- and block-preserving double-edge swaps (numba kernels).

A multigraph is held twice: as an edge list ``(eu, ev)`` and as fixed-length
neighbour rows ``adj[ptr[x]:ptr[x+1]]`` (a loop puts ``x`` twice in row x).
Swapping edges (a, b), (c, d) into (a, d), (c, b) keeps every degree, and
keeps every block-pair edge count when ``block[b] == block[d]``.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _count(adj, ptr, x, y):
    n = 0
    for p in range(ptr[x], ptr[x + 1]):
        if adj[p] == y:
            n += 1
    return n


@njit(cache=True)
def _replace(adj, ptr, x, old, new):
    for p in range(ptr[x], ptr[x + 1]):
        if adj[p] == old:
            adj[p] = new
            return


@njit(cache=True)
def _defect(adj, ptr, x, y):
    """Loops on x (if x == y), else the excess multiplicity of {x, y}."""
    if x == y:
        return _count(adj, ptr, x, x) // 2
    k = _count(adj, ptr, x, y)
    return k - 1 if k > 1 else 0


@njit(cache=True)
def _apply(adj, ptr, a, b, c, d):
    _replace(adj, ptr, a, b, d)
    _replace(adj, ptr, b, a, c)
    _replace(adj, ptr, c, d, b)
    _replace(adj, ptr, d, c, a)


@njit(cache=True)
def _local_defects(adj, ptr, a, b, c, d):
    # distinct unordered pairs among {a,b}, {c,d}, {a,d}, {c,b}
    xs = np.empty(4, dtype=np.int64)
    ys = np.empty(4, dtype=np.int64)
    pairs = ((a, b), (c, d), (a, d), (c, b))
    n = 0
    total = 0
    for k in range(4):
        x, y = pairs[k]
        if x > y:
            x, y = y, x
        seen = False
        for j in range(n):
            if xs[j] == x and ys[j] == y:
                seen = True
        if not seen:
            xs[n] = x
            ys[n] = y
            n += 1
            total += _defect(adj, ptr, x, y)
    return total


@njit(cache=True)
def count_defects(adj, ptr):
    """Loops plus excess parallel edges over the whole multigraph."""
    total = 0
    n = len(ptr) - 1
    for x in range(n):
        row = np.sort(adj[ptr[x] : ptr[x + 1]])
        k = 0
        while k < len(row):
            j = k
            while j < len(row) and row[j] == row[k]:
                j += 1
            y = row[k]
            if y == x:
                total += (j - k) // 2
            elif y > x:
                total += j - k - 1
            k = j
    return total


@njit(cache=True)
def swap_pass(eu, ev, adj, ptr, block, i1s, i2s, flips, strict, defects):
    """Run proposals until they are exhausted (or, if not strict, defects hit 0).

    ``strict`` accepts only swaps that leave the graph simple; otherwise a
    swap is accepted when it does not increase the defect count.
    Returns (accepted, defects, proposals_used).
    """
    accepted = 0
    used = 0
    for s in range(len(i1s)):
        if not strict and defects == 0:
            break
        used += 1
        i, j = i1s[s], i2s[s]
        if i == j:
            continue
        a, b = eu[i], ev[i]
        if flips[s] & 1:
            a, b = b, a
        c, d = eu[j], ev[j]
        if flips[s] & 2:
            c, d = d, c
        if block[b] != block[d] or b == d or a == c:
            continue
        if strict and (a == d or c == b):
            continue
        before = _local_defects(adj, ptr, a, b, c, d)
        _apply(adj, ptr, a, b, c, d)
        after = _local_defects(adj, ptr, a, b, c, d)
        ok = after == 0 if strict else after <= before
        if ok:
            eu[i], ev[i] = a, d
            eu[j], ev[j] = c, b
            defects += after - before
            accepted += 1
        else:
            _apply(adj, ptr, a, d, c, b)
    return accepted, defects, used
