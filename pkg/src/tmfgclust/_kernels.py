"""numba kernels for the compute-heavy inner loops.

Every parallel loop writes disjoint output slices, so results do not
depend on the number of numba threads.
"""

from __future__ import annotations

import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def pearson_kernel(xc, inv_norm, out):
    """Correlation of centered rows; rows with zero norm correlate as 0."""
    n = xc.shape[0]
    L = xc.shape[1]
    for i in prange(n):
        out[i, i] = 1.0
        for j in range(i + 1, n):
            if inv_norm[i] == 0.0 or inv_norm[j] == 0.0:
                r = 0.0
            else:
                s = 0.0
                for k in range(L):
                    s += xc[i, k] * xc[j, k]
                r = s * inv_norm[i] * inv_norm[j]
                if r > 1.0:
                    r = 1.0
                elif r < -1.0:
                    r = -1.0
            out[i, j] = r
            out[j, i] = r


@njit(cache=True)
def _dijkstra_into(indptr, nbr, wt, src, dist):
    """Single-source Dijkstra over a CSR graph, binary heap, lazy deletion."""
    n = indptr.shape[0] - 1
    for i in range(n):
        dist[i] = np.inf
    done = np.zeros(n, dtype=np.uint8)
    cap = indptr[n] + 1
    hd = np.empty(cap, dtype=np.float64)
    hv = np.empty(cap, dtype=np.int64)
    hd[0] = 0.0
    hv[0] = src
    size = 1
    dist[src] = 0.0
    while size > 0:
        d = hd[0]
        v = hv[0]
        size -= 1
        hd[0] = hd[size]
        hv[0] = hv[size]
        i = 0
        while True:
            left = 2 * i + 1
            right = left + 1
            m = i
            if left < size and hd[left] < hd[m]:
                m = left
            if right < size and hd[right] < hd[m]:
                m = right
            if m == i:
                break
            hd[i], hd[m] = hd[m], hd[i]
            hv[i], hv[m] = hv[m], hv[i]
            i = m
        if done[v]:
            continue
        done[v] = 1
        for e in range(indptr[v], indptr[v + 1]):
            u = nbr[e]
            nd = d + wt[e]
            if nd < dist[u]:
                dist[u] = nd
                j = size
                hd[j] = nd
                hv[j] = u
                size += 1
                while j > 0:
                    p = (j - 1) >> 1
                    if hd[p] <= hd[j]:
                        break
                    hd[p], hd[j] = hd[j], hd[p]
                    hv[p], hv[j] = hv[j], hv[p]
                    j = p


@njit(cache=True, parallel=True)
def dijkstra_rows(indptr, nbr, wt, sources, out):
    """One Dijkstra per source, each writing its own output row."""
    for s in prange(sources.shape[0]):
        _dijkstra_into(indptr, nbr, wt, sources[s], out[s])


@njit(cache=True)
def _truncated_into(indptr, nbr, wt, src, radius, ids, dists, base):
    """Dijkstra truncated at `radius`; record settled vertices from `base`.

    Returns the entry count. With ids/dists of length 0 it only counts.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    done = np.zeros(n, dtype=np.uint8)
    cap = indptr[n] + 1
    hd = np.empty(cap, dtype=np.float64)
    hv = np.empty(cap, dtype=np.int64)
    hd[0] = 0.0
    hv[0] = src
    size = 1
    dist[src] = 0.0
    cnt = 0
    record = ids.shape[0] > 0
    while size > 0:
        d = hd[0]
        v = hv[0]
        size -= 1
        hd[0] = hd[size]
        hv[0] = hv[size]
        i = 0
        while True:
            left = 2 * i + 1
            right = left + 1
            m = i
            if left < size and hd[left] < hd[m]:
                m = left
            if right < size and hd[right] < hd[m]:
                m = right
            if m == i:
                break
            hd[i], hd[m] = hd[m], hd[i]
            hv[i], hv[m] = hv[m], hv[i]
            i = m
        if d > radius:
            break
        if done[v]:
            continue
        done[v] = 1
        if record:
            ids[base + cnt] = v
            dists[base + cnt] = d
        cnt += 1
        for e in range(indptr[v], indptr[v + 1]):
            u = nbr[e]
            nd = d + wt[e]
            if nd <= radius and nd < dist[u]:
                dist[u] = nd
                j = size
                hd[j] = nd
                hv[j] = u
                size += 1
                while j > 0:
                    p = (j - 1) >> 1
                    if hd[p] <= hd[j]:
                        break
                    hd[p], hd[j] = hd[j], hd[p]
                    hv[p], hv[j] = hv[j], hv[p]
                    j = p
    return cnt


@njit(cache=True, parallel=True)
def truncated_counts(indptr, nbr, wt, radii, counts):
    n = indptr.shape[0] - 1
    empty_i = np.empty(0, dtype=np.int64)
    empty_d = np.empty(0, dtype=np.float64)
    for v in prange(n):
        counts[v] = _truncated_into(indptr, nbr, wt, v, radii[v], empty_i, empty_d, 0)


@njit(cache=True, parallel=True)
def truncated_fill(indptr, nbr, wt, radii, offsets, ids, dists):
    n = indptr.shape[0] - 1
    for v in prange(n):
        _truncated_into(indptr, nbr, wt, v, radii[v], ids, dists, offsets[v])


@njit(cache=True, parallel=True)
def segment_pair_max(D, perm, starts, out):
    """out[i, j] = max of D over segment i x segment j of the permutation."""
    m = starts.shape[0] - 1
    for idx in prange(m * m):
        i = idx // m
        j = idx % m
        if j < i:
            continue
        best = 0.0 if i == j else -np.inf
        for a in range(starts[i], starts[i + 1]):
            pa = perm[a]
            for b in range(starts[j], starts[j + 1]):
                d = D[pa, perm[b]]
                if d > best:
                    best = d
        out[i, j] = best
        out[j, i] = best
