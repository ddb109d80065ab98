"""Shared helpers: matrix generators and independent reference oracles."""

from __future__ import annotations

import numpy as np

from tmfgclust import pearson_similarity
from tmfgclust.datasets import generate_class_dataset


def uniform_matrix(n: int, seed: int) -> np.ndarray:
    """Symmetric matrix with iid uniform [0,1) off-diagonal entries."""
    rng = np.random.default_rng(seed)
    A = rng.random((n, n))
    S = (A + A.T) / 2.0
    np.fill_diagonal(S, 1.0)
    return S


def quantized_matrix(n: int, seed: int, levels: int = 4) -> np.ndarray:
    """Low-entropy similarity matrix that forces heavy tie-breaking."""
    rng = np.random.default_rng(seed)
    A = rng.integers(0, levels, size=(n, n)) / levels
    S = np.minimum(A, A.T).astype(np.float64)
    np.fill_diagonal(S, 1.0)
    return S


def structured_matrix(n: int, seed: int, classes: int = 5, length: int = 128,
                      signal: float = 1.0) -> np.ndarray:
    """Pearson matrix of a clustered synthetic dataset (the realistic regime)."""
    data = generate_class_dataset(n, length, classes, seed=seed, signal=signal)
    return pearson_similarity(data, workers=1)


def floyd_warshall(n: int, edges, lengths) -> np.ndarray:
    """Dense all-pairs shortest paths; independent of the Dijkstra path."""
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0.0)
    for (i, j), w in zip(edges, lengths):
        D[i, j] = min(D[i, j], w)
        D[j, i] = min(D[j, i], w)
    for k in range(n):
        np.minimum(D, D[:, k][:, None] + D[k, :][None, :], out=D)
    return D


def naive_complete_linkage(D: np.ndarray):
    """Greedy O(n^3) complete linkage: repeatedly merge the pair of
    clusters with the smallest max pairwise distance; ties by lowest
    cluster ids. Returns (frozenset members, height) per merge."""
    n = D.shape[0]
    clusters: dict[int, frozenset] = {i: frozenset([i]) for i in range(n)}
    next_id = n
    merges = []
    while len(clusters) > 1:
        best = None
        ids = sorted(clusters)
        for ai in range(len(ids)):
            for bi in range(ai + 1, len(ids)):
                a, b = ids[ai], ids[bi]
                d = max(D[x, y] for x in clusters[a] for y in clusters[b])
                if best is None or d < best[0]:
                    best = (d, a, b)
        d, a, b = best
        merged = clusters.pop(a) | clusters.pop(b)
        clusters[next_id] = merged
        merges.append((merged, d))
        next_id += 1
    return merges


def pair_counting_ari(truth, pred) -> float:
    """ARI from direct pair enumeration: no contingency table involved."""
    truth = list(truth)
    pred = list(pred)
    n = len(truth)
    both = truth_only = pred_only = 0
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            t = truth[i] == truth[j]
            p = pred[i] == pred[j]
            both += t and p
            truth_only += t
            pred_only += p
            total += 1
    expected = truth_only * pred_only / total
    denom = 0.5 * (truth_only + pred_only) - expected
    if denom == 0.0:
        return 1.0 if all((truth[i] == truth[j]) == (pred[i] == pred[j])
                          for i in range(n) for j in range(i + 1, n)) else 0.0
    return (both - expected) / denom


def set_partitions(items):
    """All set partitions of the given sequence (restricted growth)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def partition_to_labels(part, n: int) -> list[int]:
    labels = [0] * n
    for cid, block in enumerate(part):
        for x in block:
            labels[x] = cid
    return labels


def exhaustive_round_check(S: np.ndarray, graph) -> None:
    """Replay a prefix-1 exact build, checking every insertion against
    brute-force (face, vertex) gain maximization with the tie rule
    (gain desc, face id asc, vertex id asc)."""
    n = S.shape[0]
    a, b, c, d = (int(x) for x in graph.initial_clique)
    faces = [(a, b, c), (a, b, d), (a, c, d), (b, c, d)]
    alive = [True] * 4
    inserted = np.zeros(n, dtype=bool)
    inserted[[a, b, c, d]] = True
    for row in graph.trace:
        v, x, y, z = (int(t) for t in row)
        host = tuple(sorted((x, y, z)))
        rem = np.flatnonzero(~inserted)
        best = None
        for fid, face in enumerate(faces):
            if not alive[fid]:
                continue
            fa, fb, fc = face
            for u in rem:
                g = S[fa, u] + S[fb, u] + S[fc, u]
                if best is None or g > best[0]:
                    best = (g, fid, int(u))
        g_best, fid_best, u_best = best
        assert faces[fid_best] == host, (
            f"inserted into {host} but exhaustive max is face {faces[fid_best]}")
        assert u_best == v, f"inserted {v} but exhaustive max vertex is {u_best}"
        alive[fid_best] = False
        inserted[v] = True
        fa, fb, fc = host
        faces.append(tuple(sorted((v, fa, fb))))
        faces.append(tuple(sorted((v, fa, fc))))
        faces.append(tuple(sorted((v, fb, fc))))
        alive.extend([True, True, True])
