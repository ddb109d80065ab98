"""Shortest-path distances over the TMFG: exact APSP and a hub approximation.

Edge lengths are sqrt(2 * (1 - similarity)), the usual correlation-to-
metric transform, so higher similarity means shorter edges. The exact
oracle runs one Dijkstra per vertex. The hub oracle runs Dijkstra only
from a small hub set plus a truncated search around every vertex; queries
are exact inside the truncated neighborhoods and otherwise routed through
the best hub, which never underestimates the true distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, _parallel
from .simmatrix import write_matrix_binary
from .tmfg import TmfgGraph


@dataclass
class WeightedTmfg:
    """CSR adjacency of a TMFG with nonnegative edge lengths.

    strength[v] is the sum of similarity weights incident to v, used for
    hub selection.
    """

    n: int
    indptr: np.ndarray
    neighbors: np.ndarray
    lengths: np.ndarray
    strength: np.ndarray


@dataclass
class ApspParams:
    """Hub-oracle knobs: hub_count defaults to ceil(sqrt(n)) at build time."""

    hub_count: int | None = None
    radius_factor: float = 2.0

    def __post_init__(self):
        if self.hub_count is not None and self.hub_count < 1:
            raise ValueError("hub_count must be >= 1")
        if self.radius_factor <= 0:
            raise ValueError("radius_factor must be positive")


def to_weighted(graph: TmfgGraph, S: np.ndarray) -> WeightedTmfg:
    """Attach lengths sqrt(2(1 - S[i,j])) to every TMFG edge."""
    n = graph.n
    e = graph.edges
    sims = S[e[:, 0], e[:, 1]]
    lengths = np.sqrt(np.maximum(2.0 * (1.0 - sims), 0.0))
    deg = np.zeros(n, dtype=np.int64)
    np.add.at(deg, e[:, 0], 1)
    np.add.at(deg, e[:, 1], 1)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    neighbors = np.empty(indptr[-1], dtype=np.int64)
    lens = np.empty(indptr[-1], dtype=np.float64)
    cursor = indptr[:-1].copy()
    for (i, j), w in zip(e, lengths):
        neighbors[cursor[i]] = j
        lens[cursor[i]] = w
        cursor[i] += 1
        neighbors[cursor[j]] = i
        lens[cursor[j]] = w
        cursor[j] += 1
    strength = np.zeros(n)
    np.add.at(strength, e[:, 0], sims)
    np.add.at(strength, e[:, 1], sims)
    return WeightedTmfg(n=n, indptr=indptr, neighbors=neighbors,
                        lengths=lens, strength=strength)


class ExactOracle:
    """Full n x n shortest-path distance matrix."""

    mode = "exact"

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self.n = matrix.shape[0]

    def query(self, u: int, v: int) -> float:
        return float(self.matrix[u, v])

    def block(self, rows, cols) -> np.ndarray:
        """Dense distance block for the given vertex index arrays."""
        return self.matrix[np.ix_(np.asarray(rows), np.asarray(cols))]


class HubOracle:
    """Hub rows plus per-vertex exact neighborhoods.

    query(u, v) is the recorded exact distance when either endpoint lies
    in the other's truncated-search table, else min over hubs h of
    d(u,h) + d(h,v). Never below the true distance.
    """

    mode = "hub"

    def __init__(self, hubs, hub_dist, nearest_hub, nearest_dist, radii,
                 near_indptr, near_ids, near_dist):
        self.hubs = hubs
        self.hub_dist = hub_dist
        self.nearest_hub = nearest_hub
        self.nearest_dist = nearest_dist
        self.radii = radii
        self.near_indptr = near_indptr
        self.near_ids = near_ids
        self.near_dist = near_dist
        self.n = nearest_hub.shape[0]

    def _near_lookup(self, u: int, v: int):
        lo, hi = self.near_indptr[u], self.near_indptr[u + 1]
        ids = self.near_ids[lo:hi]
        k = np.searchsorted(ids, v)
        if k < ids.shape[0] and ids[k] == v:
            return float(self.near_dist[lo + k])
        return None

    def query(self, u: int, v: int) -> float:
        if u == v:
            return 0.0
        u, v = (u, v) if u < v else (v, u)
        d = self._near_lookup(u, v)
        if d is None:
            d = self._near_lookup(v, u)
        if d is not None:
            return d
        return float(np.min(self.hub_dist[:, u] + self.hub_dist[:, v]))

    def block(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        est = np.full((rows.shape[0], cols.shape[0]), np.inf)
        for h in range(self.hub_dist.shape[0]):
            np.minimum(est, self.hub_dist[h, rows][:, None] + self.hub_dist[h, cols][None, :], out=est)
        col_pos = np.full(self.n, -1, dtype=np.int64)
        col_pos[cols] = np.arange(cols.shape[0])
        for i, u in enumerate(rows):
            lo, hi = self.near_indptr[u], self.near_indptr[u + 1]
            pos = col_pos[self.near_ids[lo:hi]]
            hit = pos >= 0
            est[i, pos[hit]] = self.near_dist[lo:hi][hit]
        row_pos = np.full(self.n, -1, dtype=np.int64)
        row_pos[rows] = np.arange(rows.shape[0])
        for j, v in enumerate(cols):
            lo, hi = self.near_indptr[v], self.near_indptr[v + 1]
            pos = row_pos[self.near_ids[lo:hi]]
            hit = pos >= 0
            est[pos[hit], j] = self.near_dist[lo:hi][hit]
        return est


DistanceOracle = ExactOracle | HubOracle


def apsp_exact(g: WeightedTmfg, workers: int | None = None) -> ExactOracle:
    """One Dijkstra per vertex; rows are independent and run in parallel."""
    workers = _parallel.resolve_workers(workers)
    _parallel.set_numba_threads(workers)
    out = np.empty((g.n, g.n))
    sources = np.arange(g.n, dtype=np.int64)
    _kernels.dijkstra_rows(g.indptr, g.neighbors, g.lengths, sources, out)
    return ExactOracle(out)


def default_hub_count(n: int) -> int:
    return min(n, math.ceil(math.sqrt(n)))


def select_hubs(g: WeightedTmfg, hub_count: int) -> np.ndarray:
    """The hub_count vertices of highest similarity-weighted degree.

    Ordered by (strength desc, id asc); the order is fixed, so a larger
    hub_count extends the smaller hub set.
    """
    ids = np.arange(g.n)
    ranked = ids[np.lexsort((ids, -g.strength))]
    return ranked[:hub_count].astype(np.int64)


def apsp_hub(
    g: WeightedTmfg,
    params: ApspParams | None = None,
    workers: int | None = None,
) -> HubOracle:
    """Hub rows, nearest-hub radii, and per-vertex truncated searches."""
    params = params or ApspParams()
    hub_count = params.hub_count or default_hub_count(g.n)
    if hub_count > g.n:
        raise ValueError(f"hub_count {hub_count} exceeds vertex count {g.n}")
    workers = _parallel.resolve_workers(workers)
    _parallel.set_numba_threads(workers)

    hubs = select_hubs(g, hub_count)
    hub_dist = np.empty((hub_count, g.n))
    _kernels.dijkstra_rows(g.indptr, g.neighbors, g.lengths, hubs, hub_dist)

    nearest_idx = np.argmin(hub_dist, axis=0)
    nearest_dist = hub_dist[nearest_idx, np.arange(g.n)]
    nearest_hub = hubs[nearest_idx]
    radii = params.radius_factor * nearest_dist

    counts = np.zeros(g.n, dtype=np.int64)
    _kernels.truncated_counts(g.indptr, g.neighbors, g.lengths, radii, counts)
    offsets = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    ids = np.empty(offsets[-1], dtype=np.int64)
    dists = np.empty(offsets[-1], dtype=np.float64)
    _kernels.truncated_fill(g.indptr, g.neighbors, g.lengths, radii, offsets[:-1].copy(), ids, dists)
    # sort every per-vertex segment by neighbor id for binary-search lookups
    seg = np.repeat(np.arange(g.n), counts)
    perm = np.lexsort((ids, seg))
    return HubOracle(
        hubs=hubs,
        hub_dist=hub_dist,
        nearest_hub=nearest_hub,
        nearest_dist=nearest_dist,
        radii=radii,
        near_indptr=offsets,
        near_ids=ids[perm],
        near_dist=dists[perm],
    )


def query(oracle: DistanceOracle, u: int, v: int) -> float:
    """Distance between u and v through the given oracle."""
    return oracle.query(int(u), int(v))


def dump_distance_matrix(oracle: ExactOracle, path) -> None:
    """Write the exact oracle's matrix in the binary matrix format."""
    if oracle.mode != "exact":
        raise ValueError("only the exact oracle has a full matrix to dump")
    write_matrix_binary(path, oracle.matrix)
