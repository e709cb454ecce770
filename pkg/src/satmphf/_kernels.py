"""Compiled inner loops.  Pure-Python references live next to each caller."""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64


# -- hashing ---------------------------------------------------------------

@njit(cache=True)
def _mix64(z):
    z = z ^ (z >> U64(30))
    z = z * U64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> U64(27))
    z = z * U64(0x94D049BB133111EB)
    z = z ^ (z >> U64(31))
    return z


@njit(cache=True)
def _mulhi64(a, b):
    mask = U64(0xFFFFFFFF)
    a_lo = a & mask
    a_hi = a >> U64(32)
    b_lo = b & mask
    b_hi = b >> U64(32)
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    hi_hi = a_hi * b_hi
    cross = (lo_lo >> U64(32)) + (hi_lo & mask) + lo_hi
    return hi_hi + (hi_lo >> U64(32)) + (cross >> U64(32))


@njit(cache=True)
def _fnv1a(buf, start, stop, prefix, use_prefix):
    h = U64(0xCBF29CE484222325)
    if use_prefix:
        h = (h ^ U64(prefix)) * U64(0x100000001B3)
    for t in range(start, stop):
        h = (h ^ U64(buf[t])) * U64(0x100000001B3)
    return h


@njit(cache=True)
def _hash_index(fp, i, range_, seed, tweak):
    z = _mix64(seed ^ _mix64(U64(i) ^ tweak) ^ fp)
    return np.int64(_mulhi64(z, U64(range_))) + 1


@njit(cache=True)
def fingerprints(buf, offsets):
    n = len(offsets) - 1
    out = np.empty(n, dtype=np.uint64)
    for r in range(n):
        out[r] = _fnv1a(buf, offsets[r], offsets[r + 1], 0, False)
    return out


@njit(cache=True)
def hash_table(fps, k, range_, seed, tweak):
    """(n, k) table of hash_index values, 1-based."""
    n = len(fps)
    out = np.empty((n, k), dtype=np.int64)
    for r in range(n):
        for i in range(k):
            out[r, i] = _hash_index(fps[r], i + 1, range_, seed, tweak)
    return out


@njit(cache=True)
def matching_query_batch(buf, offsets, n, k, match_seed, match_tweak,
                         n_blocks, split_seed, split_tweak, block_seeds,
                         block_slots, block_start, bits, k_f, slot_tweak):
    """Probe-until-1 queries for many keys; returns -1 where no probe fires."""
    m = len(offsets) - 1
    out = np.empty(m, dtype=np.int64)
    for r in range(m):
        found = -1
        for i in range(1, k + 1):
            fp = _fnv1a(buf, offsets[r], offsets[r + 1], i, True)
            b = 0
            if n_blocks > 1:
                b = _hash_index(fp, 1, n_blocks, split_seed, split_tweak) - 1
            parity = 0
            if block_slots[b] == 0:
                continue
            for j in range(k_f):
                p = _hash_index(fp, j + 1, block_slots[b], block_seeds[b], slot_tweak) - 1
                parity ^= bits[block_start[b] + p]
            if parity == 1:
                found = i
                break
        if found < 0:
            out[r] = -1
        else:
            kfp = _fnv1a(buf, offsets[r], offsets[r + 1], 0, False)
            out[r] = _hash_index(kfp, found, n, match_seed, match_tweak)
    return out


# -- minimum-weight perfect matching -----------------------------------------

@njit(cache=True)
def hungarian(n, indptr, indices, weights, default):
    """Shortest-augmenting-path Hungarian algorithm on an n x n cost matrix.

    Row r has explicit entries ``indices[indptr[r]:indptr[r+1]]`` (0-based
    columns) with ``weights``; every other entry costs ``default``.  Rows
    are augmented in increasing order.  Each Dijkstra step scans all
    unreached columns; on equal distance an unmatched column wins, and
    otherwise the first one in scan order.  Returns ``col_of_row``.
    """
    INF = np.int64(1) << np.int64(62)
    u = np.zeros(n, dtype=np.int64)
    v = np.zeros(n, dtype=np.int64)
    col4row = np.full(n, -1, dtype=np.int64)
    row4col = np.full(n, -1, dtype=np.int64)
    path = np.full(n, -1, dtype=np.int64)
    dist = np.empty(n, dtype=np.int64)
    remaining = np.empty(n, dtype=np.int64)
    rows_seen = np.empty(n, dtype=np.int64)
    cols_seen = np.empty(n, dtype=np.int64)
    rowcost = np.full(n, default, dtype=np.int64)
    for cur in range(n):
        for t in range(n):
            remaining[t] = t
        nrem = n
        dist[:] = INF
        nsr = 0
        nsc = 0
        minval = np.int64(0)
        i = cur
        sink = -1
        while sink == -1:
            rows_seen[nsr] = i
            nsr += 1
            for t in range(indptr[i], indptr[i + 1]):
                rowcost[indices[t]] = weights[t]
            base = minval - u[i]
            lowest = INF
            index = -1
            index_free = False
            for t in range(nrem):
                j = remaining[t]
                r = base + rowcost[j] - v[j]
                if r < dist[j]:
                    path[j] = i
                    dist[j] = r
                d = dist[j]
                if d < lowest or (d == lowest and not index_free and row4col[j] == -1):
                    lowest = d
                    index = t
                    index_free = row4col[j] == -1
            for t in range(indptr[i], indptr[i + 1]):
                rowcost[indices[t]] = default
            minval = lowest
            j = remaining[index]
            if row4col[j] == -1:
                sink = j
            else:
                i = row4col[j]
            cols_seen[nsc] = j
            nsc += 1
            nrem -= 1
            remaining[index] = remaining[nrem]
        u[cur] += minval
        for t in range(nsr):
            r = rows_seen[t]
            if r != cur:
                u[r] += minval - dist[col4row[r]]
        for t in range(nsc):
            j = cols_seen[t]
            v[j] -= minval - dist[j]
        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            tmp = col4row[i]
            col4row[i] = j
            j = tmp
            if i == cur:
                break
    return col4row


# -- GF(2) elimination -------------------------------------------------------

@njit(cache=True)
def gf2_solve(rows, rhs, nvars):
    """Gaussian elimination on packed rows (uint64 words, bit c = variable c).

    ``rows`` and ``rhs`` are modified in place.  Returns (consistent,
    solution) with free variables set to 0.
    """
    nrows, nwords = rows.shape
    pivot_col = np.full(nrows, -1, dtype=np.int64)
    r = 0
    for c in range(nvars):
        if r == nrows:
            break
        w = c >> 6
        bit = U64(1) << U64(c & 63)
        piv = -1
        for t in range(r, nrows):
            if rows[t, w] & bit:
                piv = t
                break
        if piv < 0:
            continue
        if piv != r:
            for q in range(w, nwords):
                tmp = rows[r, q]
                rows[r, q] = rows[piv, q]
                rows[piv, q] = tmp
            tb = rhs[r]
            rhs[r] = rhs[piv]
            rhs[piv] = tb
        for t in range(r + 1, nrows):
            if rows[t, w] & bit:
                for q in range(w, nwords):
                    rows[t, q] ^= rows[r, q]
                rhs[t] ^= rhs[r]
        pivot_col[r] = c
        r += 1
    for t in range(r, nrows):
        if rhs[t]:
            return False, np.zeros(nvars, dtype=np.uint8)
    x = np.zeros(nvars, dtype=np.uint8)
    for t in range(r - 1, -1, -1):
        c = pivot_col[t]
        acc = rhs[t]
        # row t has no bits left of its pivot column
        for c2 in range(c + 1, nvars):
            if x[c2] and (rows[t, c2 >> 6] >> U64(c2 & 63)) & U64(1):
                acc ^= 1
        x[c] = acc
    return True, x
