"""Complete-linkage agglomerative clustering and dendrogram cutting."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class Dendrogram:
    """Binary merge tree over n_leaves items.

    Cluster ids: 0..n_leaves-1 are singletons, n_leaves+t is the t-th
    merge. Merges are stored in height-nondecreasing order.
    """

    n_leaves: int
    lefts: np.ndarray
    rights: np.ndarray
    heights: np.ndarray
    sizes: np.ndarray

    @property
    def n_merges(self) -> int:
        return self.lefts.shape[0]

    def validate(self) -> None:
        n = self.n_leaves
        if self.n_merges != n - 1:
            raise ValueError(f"expected {n - 1} merges, found {self.n_merges}")
        if self.n_merges and np.any(np.diff(self.heights) < 0):
            raise ValueError("merge heights must be nondecreasing")
        used = set()
        sizes = {}
        for t in range(self.n_merges):
            for child in (int(self.lefts[t]), int(self.rights[t])):
                if child in used:
                    raise ValueError(f"cluster {child} merged twice")
                if child >= n + t:
                    raise ValueError(f"merge {t} references later cluster {child}")
                used.add(child)
            size = sum(sizes.get(ch, 1) for ch in (int(self.lefts[t]), int(self.rights[t])))
            if size != int(self.sizes[t]):
                raise ValueError(f"merge {t} size {self.sizes[t]} != {size}")
            sizes[n + t] = size


def _nn_chain(D: np.ndarray) -> list[tuple[int, int, float]]:
    """Nearest-neighbor-chain complete linkage over a distance matrix.

    Returns merges in discovery order as (cluster_id, cluster_id, height)
    with ids 0..m-1 for the input items and m+t for the t-th merge.
    Inter-cluster distance is the running pairwise maximum; ties prefer
    the lower slot id.
    """
    m = D.shape[0]
    if m < 2:
        return []
    W = D.astype(np.float64, copy=True)
    np.fill_diagonal(W, np.inf)
    active = np.ones(m, dtype=bool)
    slot_cluster = list(range(m))
    merges: list[tuple[int, int, float]] = []
    next_id = m
    chain: list[int] = []
    remaining = m
    while remaining > 1:
        if not chain:
            chain.append(int(np.flatnonzero(active)[0]))
        x = chain[-1]
        row = np.where(active, W[x], np.inf)
        row[x] = np.inf
        y = int(np.argmin(row))
        if len(chain) > 1 and row[chain[-2]] == row[y]:
            y = chain[-2]
        if len(chain) > 1 and y == chain[-2]:
            chain.pop()
            chain.pop()
            height = float(W[x, y])
            lo, hi = (x, y) if x < y else (y, x)
            merges.append((slot_cluster[x], slot_cluster[y], height))
            merged = np.maximum(W[lo], W[hi])
            W[lo] = merged
            W[:, lo] = merged
            W[lo, lo] = np.inf
            active[hi] = False
            slot_cluster[lo] = next_id
            next_id += 1
            remaining -= 1
        else:
            chain.append(y)
    return merges


def nn_chain_merges(D: np.ndarray) -> list[tuple[int, int, float]]:
    """Complete-linkage merges of a distance matrix, canonicalized.

    Output is stably sorted by height and renumbered so the t-th row has
    id m+t; children always appear before their parent, and each row is
    (left, right, height) with left < right.
    """
    m = D.shape[0]
    raw = _nn_chain(D)
    order = sorted(range(len(raw)), key=lambda t: raw[t][2])
    remap = {}
    for rank, t in enumerate(order):
        remap[m + t] = m + rank
    rows = []
    for rank, t in enumerate(order):
        a, b, h = raw[t]
        a = remap.get(a, a)
        b = remap.get(b, b)
        rows.append((min(a, b), max(a, b), h))
    return rows


def complete_linkage(items, dist) -> Dendrogram:
    """Complete-linkage HAC over the given items.

    dist(a, b) must be a symmetric nonnegative callable over item ids.
    Leaves of the result are item positions 0..len(items)-1.
    """
    items = list(items)
    m = len(items)
    if m < 1:
        raise ValueError("need at least one item")
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            D[i, j] = D[j, i] = float(dist(items[i], items[j]))
    return dendrogram_from_merges(m, nn_chain_merges(D))


def dendrogram_from_merges(n_leaves: int, merges) -> Dendrogram:
    """Assemble a Dendrogram from canonical (left, right, height) rows."""
    lefts = np.array([r[0] for r in merges], dtype=np.int64)
    rights = np.array([r[1] for r in merges], dtype=np.int64)
    heights = np.array([r[2] for r in merges], dtype=np.float64)
    sizes = np.empty(len(merges), dtype=np.int64)
    size_of = {}
    for t, (a, b, _) in enumerate(merges):
        s = size_of.get(a, 1) + size_of.get(b, 1)
        size_of[n_leaves + t] = s
        sizes[t] = s
    return Dendrogram(n_leaves=n_leaves, lefts=lefts, rights=rights,
                      heights=heights, sizes=sizes)


def cut(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Flat labels from undoing the last k-1 merges.

    Labels are 0..k-1 assigned by ascending smallest member id.
    """
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"cluster count k={k} out of range 1..{n}")
    parent = list(range(2 * n - 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in range(n - k):
        node = n + t
        for child in (int(dendrogram.lefts[t]), int(dendrogram.rights[t])):
            parent[find(child)] = node
    roots: dict[int, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for leaf in range(n):
        root = find(leaf)
        if root not in roots:
            roots[root] = len(roots)
        labels[leaf] = roots[root]
    return labels


def serialize_dendrogram(d: Dendrogram) -> str:
    """Text rows "left right height size", one merge per line."""
    lines = []
    for t in range(d.n_merges):
        lines.append(f"{int(d.lefts[t])} {int(d.rights[t])} "
                     f"{d.heights[t]:.17g} {int(d.sizes[t])}")
    return "\n".join(lines) + ("\n" if lines else "")


def save_dendrogram(d: Dendrogram, path) -> None:
    Path(path).write_text(serialize_dendrogram(d))


def load_dendrogram(path) -> Dendrogram:
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        left, right, height, size = line.split()
        rows.append((int(left), int(right), float(height), int(size)))
    n_leaves = len(rows) + 1
    return Dendrogram(
        n_leaves=n_leaves,
        lefts=np.array([r[0] for r in rows], dtype=np.int64),
        rights=np.array([r[1] for r in rows], dtype=np.int64),
        heights=np.array([r[2] for r in rows], dtype=np.float64),
        sizes=np.array([r[3] for r in rows], dtype=np.int64),
    )
