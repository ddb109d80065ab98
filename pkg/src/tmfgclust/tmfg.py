"""TMFG construction.

Three builders produce the same graph representation:

* ``build_tmfg_exact``  -- per round, every live face knows its true best
  uninserted vertex (argmax over all remaining vertices); the top prefix
  of face-vertex pairs by gain is inserted.
* ``build_tmfg_corr``   -- candidates come from per-vertex sorted neighbor
  lists: each face considers only the best uninserted neighbor of its
  three vertices, and affected faces are refreshed eagerly every round.
* ``build_tmfg_heap``   -- same candidate rule, but face-vertex pairs sit
  in a max-heap by gain and a face is refreshed lazily, only when it is
  popped with an already-inserted vertex.

All builders insert a vertex by connecting it to the three vertices of a
live triangular face, which keeps the graph planar with 3n-6 edges and
2n-4 triangular faces. The insertion trace (vertex, host face) is kept
for the bubble-tree stage.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .simmatrix import SortedNeighborLists, validate_similarity

GAIN_EPS = 1e-12


@dataclass
class BuildConfig:
    """Builder selection: variant in {exact, corr, heap}, prefix_size >= 1."""

    variant: str = "heap"
    prefix_size: int = 1

    def __post_init__(self):
        if self.variant not in ("exact", "corr", "heap"):
            raise ValueError(f"unknown TMFG variant {self.variant!r}")
        if self.prefix_size < 1:
            raise ValueError(f"prefix_size must be >= 1, got {self.prefix_size}")


@dataclass
class TmfgGraph:
    """A built TMFG: weighted edge list plus the insertion trace.

    edges are (i, j) rows with i < j in creation order; trace rows are
    (v, a, b, c) meaning v was connected to live face {a, b, c}; faces
    are the 2n-4 triangles alive at the end of construction.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    initial_clique: np.ndarray
    trace: np.ndarray
    faces: np.ndarray
    variant: str = ""
    debug_stats: dict | None = field(default=None, repr=False)


class TraceError(ValueError):
    """An insertion trace references a face that was never live."""


def select_initial_clique(S: np.ndarray) -> tuple[int, int, int, int]:
    """The 4 vertices with the largest off-diagonal row sums, id-ascending.

    Ties go to the lower vertex id.
    """
    sums = S.sum(axis=1) - np.diag(S)
    top = np.argsort(-sums, kind="stable")[:4]
    a, b, c, d = sorted(int(v) for v in top)
    return a, b, c, d


def gain(face, v: int, S: np.ndarray) -> float:
    """Sum of similarities from vertex v to the three face vertices."""
    a, b, c = sorted(int(x) for x in face)
    return float(S[a, v] + S[b, v] + S[c, v])


def edge_sum(graph: TmfgGraph, S: np.ndarray) -> float:
    """Total similarity over the graph's 3n-6 edges."""
    e = graph.edges
    return float(S[e[:, 0], e[:, 1]].sum())


class _GraphAccum:
    """Face/edge/trace bookkeeping shared by all builders.

    Faces get dense ids in creation order; a subdivided face is marked
    dead. Children of face (a, b, c) with host vertex v are created in
    the fixed order (a,b)+v, (a,c)+v, (b,c)+v, so face ids are identical
    across builders that make the same insertions.
    """

    def __init__(self, n: int, clique: tuple[int, int, int, int]):
        self.n = n
        self.clique = clique
        self.face_vertices: list[tuple[int, int, int]] = []
        self.alive: list[bool] = []
        a, b, c, d = clique
        self.edges: list[tuple[int, int]] = [
            (a, b), (a, c), (a, d), (b, c), (b, d), (c, d)]
        self.trace: list[tuple[int, int, int, int]] = []
        for t in ((a, b, c), (a, b, d), (a, c, d), (b, c, d)):
            self.add_face(t)

    def add_face(self, triple) -> int:
        fid = len(self.face_vertices)
        self.face_vertices.append(tuple(triple))
        self.alive.append(True)
        return fid

    def insert(self, v: int, fid: int) -> tuple[int, int, int]:
        """Connect v to face fid; returns the ids of the 3 new faces."""
        a, b, c = self.face_vertices[fid]
        self.trace.append((v, a, b, c))
        for w in (a, b, c):
            self.edges.append((w, v) if w < v else (v, w))
        self.alive[fid] = False
        f1 = self.add_face(tuple(sorted((v, a, b))))
        f2 = self.add_face(tuple(sorted((v, a, c))))
        f3 = self.add_face(tuple(sorted((v, b, c))))
        return f1, f2, f3

    def finalize(self, S: np.ndarray, variant: str) -> TmfgGraph:
        edges = np.array(self.edges, dtype=np.int32)
        faces = [t for t, ok in zip(self.face_vertices, self.alive) if ok]
        return TmfgGraph(
            n=self.n,
            edges=edges,
            weights=S[edges[:, 0], edges[:, 1]].astype(np.float64),
            initial_clique=np.array(self.clique, dtype=np.int32),
            trace=np.array(self.trace, dtype=np.int32).reshape(-1, 4),
            faces=np.array(faces, dtype=np.int32).reshape(-1, 3),
            variant=variant,
        )


class TmfgState:
    """Scan state for the list-based builders.

    Tracks which vertices are inserted, the per-vertex cursor into the
    sorted neighbor list, and the cached best uninserted neighbor
    (max_corrs). Cursors only move forward.
    """

    def __init__(self, S: np.ndarray, lists: SortedNeighborLists):
        self.S = S
        self.n = S.shape[0]
        self.order = lists.order
        self.cursors = [0] * self.n
        self.inserted = bytearray(self.n)
        self.max_corrs = [-1] * self.n
        self.rem_count = self.n

    def mark_inserted(self, v: int) -> None:
        self.inserted[v] = 1
        self.rem_count -= 1


def refresh_max_corr(state: TmfgState, v: int) -> int:
    """Advance v's cursor past inserted vertices; cache and return the hit.

    Requires at least one uninserted vertex other than v.
    """
    row = state.order[v]
    cur = state.cursors[v]
    ins = state.inserted
    while ins[row[cur]]:
        cur += 1
    state.cursors[v] = cur
    u = int(row[cur])
    state.max_corrs[v] = u
    return u


def _select_round(face_gain, face_vertex, alive, nf: int, p: int, rem_count: int):
    """Top face-vertex pairs for one round: gain desc, face id asc, with
    vertex conflicts resolved by keeping the max-gain pair."""
    if p == 1:
        masked = np.where(alive[:nf], face_gain[:nf], -np.inf)
        fid = int(np.argmax(masked))
        return [(fid, int(face_vertex[fid]))]
    live = np.flatnonzero(alive[:nf])
    ranked = live[np.lexsort((live, -face_gain[live]))]
    want = min(p, rem_count)
    chosen = []
    seen: set[int] = set()
    for fid in ranked:
        v = int(face_vertex[fid])
        if v in seen:
            continue
        seen.add(v)
        chosen.append((int(fid), v))
        if len(chosen) == want:
            break
    return chosen


def build_tmfg_exact(S: np.ndarray, config: BuildConfig | None = None) -> TmfgGraph:
    """Prefix-based baseline: every live face tracks its true best vertex.

    A face's cached best stays the argmax over the remaining vertices
    until that vertex is inserted (candidate gains never change and the
    pool only shrinks), so only faces whose best was just inserted and
    newly created faces are rescanned. The per-round choices are exactly
    those of a full rescan.
    """
    config = config or BuildConfig(variant="exact")
    S = validate_similarity(S)
    n = S.shape[0]
    clique = select_initial_clique(S)
    accum = _GraphAccum(n, clique)
    inserted = np.zeros(n, dtype=bool)
    inserted[list(clique)] = True
    rem = np.flatnonzero(~inserted)
    cap = 3 * n
    face_gain = np.full(cap, -np.inf)
    face_vertex = np.full(cap, -1, dtype=np.int64)
    alive = np.zeros(cap, dtype=bool)

    def scan(fid: int) -> None:
        a, b, c = accum.face_vertices[fid]
        g = S[a, rem] + S[b, rem] + S[c, rem]
        i = int(np.argmax(g))
        face_gain[fid] = g[i]
        face_vertex[fid] = rem[i]

    for fid in range(4):
        alive[fid] = True
        if rem.size:
            scan(fid)

    while rem.size:
        nf = len(accum.face_vertices)
        pairs = _select_round(face_gain, face_vertex, alive, nf, config.prefix_size, rem.size)
        new_faces: list[int] = []
        batch = []
        for fid, v in pairs:
            new_faces.extend(accum.insert(v, fid))
            alive[fid] = False
            inserted[v] = True
            batch.append(v)
        rem = rem[~np.isin(rem, batch)] if len(batch) > 1 else rem[rem != batch[0]]
        for fid in new_faces:
            alive[fid] = True
        if rem.size == 0:
            break
        nf = len(accum.face_vertices)
        stale = np.flatnonzero(alive[:nf] & np.isin(face_vertex[:nf], batch))
        for fid in stale:
            scan(int(fid))
        for fid in new_faces:
            scan(fid)
    return accum.finalize(S, "exact")


def _best_candidate(state: TmfgState, a: int, b: int, c: int) -> tuple[float, int]:
    """Best of the face's three max-corr candidates: gain desc, vertex asc."""
    S = state.S
    mc = state.max_corrs
    best_g = -np.inf
    best_v = -1
    for u in (mc[a], mc[b], mc[c]):
        g = S[a, u] + S[b, u] + S[c, u]
        if g > best_g or (g == best_g and u < best_v):
            best_g = g
            best_v = u
    return float(best_g), best_v


def build_tmfg_corr(
    S: np.ndarray,
    lists: SortedNeighborLists,
    config: BuildConfig | None = None,
) -> TmfgGraph:
    """Correlation-based builder with eager per-round refresh.

    Rounds select the top prefix of face gains, insert those vertices,
    then refresh max_corrs and gains for every face whose chosen
    candidate was just inserted plus the newly created faces.
    """
    config = config or BuildConfig(variant="corr")
    S = validate_similarity(S)
    n = S.shape[0]
    clique = select_initial_clique(S)
    accum = _GraphAccum(n, clique)
    state = TmfgState(S, lists)
    for v in clique:
        state.mark_inserted(v)
    cap = 3 * n
    face_gain = np.full(cap, -np.inf)
    face_vertex = np.full(cap, -1, dtype=np.int64)
    face_candidates = np.full((cap, 3), -1, dtype=np.int64)
    alive = np.zeros(cap, dtype=bool)

    def set_gain(fid: int) -> None:
        a, b, c = accum.face_vertices[fid]
        face_candidates[fid] = (state.max_corrs[a], state.max_corrs[b], state.max_corrs[c])
        face_gain[fid], face_vertex[fid] = _best_candidate(state, a, b, c)

    if state.rem_count:
        for v in clique:
            refresh_max_corr(state, v)
    for fid in range(4):
        alive[fid] = True
        if state.rem_count:
            set_gain(fid)

    while state.rem_count:
        nf = len(accum.face_vertices)
        pairs = _select_round(face_gain, face_vertex, alive, nf, config.prefix_size, state.rem_count)
        new_faces: list[int] = []
        batch: set[int] = set()
        for fid, v in pairs:
            new_faces.extend(accum.insert(v, fid))
            alive[fid] = False
            state.mark_inserted(v)
            batch.add(v)
        for fid in new_faces:
            alive[fid] = True
        if state.rem_count == 0:
            break
        nf = len(accum.face_vertices)
        stale = [int(f) for f in np.flatnonzero(alive[:nf])
                 if int(face_vertex[f]) in batch]
        faces_update = stale + new_faces
        verts_update = sorted({w for f in faces_update for w in accum.face_vertices[f]})
        for w in verts_update:
            refresh_max_corr(state, w)
        for fid in faces_update:
            set_gain(fid)
    return accum.finalize(S, "corr")


def build_tmfg_heap(
    S: np.ndarray,
    lists: SortedNeighborLists,
    config: BuildConfig | None = None,
    check_invariants: bool = False,
) -> TmfgGraph:
    """Heap-based builder: lazy refresh of stale face-vertex pairs.

    Face-vertex pairs live in a max-heap keyed by (gain desc, face id
    asc). Popping a pair whose vertex is still uninserted inserts it and
    pushes entries for the 3 new faces (only the 4 pair vertices get
    their max_corrs updated); popping a stale pair refreshes that one
    face's candidate and pushes it back. One vertex per iteration.

    check_invariants additionally verifies, per refresh, that a pair
    whose pushed gain was the true face optimum never gains from the
    refresh, and that every candidate used is the true best uninserted
    neighbor of its list owner; counters land in ``debug_stats``.
    """
    config = config or BuildConfig(variant="heap")
    S = validate_similarity(S)
    n = S.shape[0]
    clique = select_initial_clique(S)
    accum = _GraphAccum(n, clique)
    state = TmfgState(S, lists)
    for v in clique:
        state.mark_inserted(v)
    if state.rem_count:
        for v in clique:
            refresh_max_corr(state, v)

    stats = {"pops": 0, "refreshes": 0, "gain_increases": 0} if check_invariants else None
    entry_was_optimal: dict[int, bool] = {}

    def true_best_gain(a: int, b: int, c: int) -> float:
        rem = [u for u in range(n) if not state.inserted[u]]
        g = S[a, rem] + S[b, rem] + S[c, rem]
        return float(g.max())

    def check_candidates(a: int, b: int, c: int) -> None:
        ins_mask = np.frombuffer(bytes(state.inserted), dtype=np.uint8).astype(bool)
        for w in (a, b, c):
            u = state.max_corrs[w]
            row = S[w].copy()
            row[ins_mask] = -np.inf
            row[w] = -np.inf
            best = int(np.argmax(row))
            assert u == best, f"max_corrs[{w}]={u} but brute-force argmax is {best}"

    def make_entry(fid: int):
        a, b, c = accum.face_vertices[fid]
        g, u = _best_candidate(state, a, b, c)
        if stats is not None:
            check_candidates(a, b, c)
            entry_was_optimal[fid] = g >= true_best_gain(a, b, c) - GAIN_EPS
        return (-g, fid, u)

    heap: list[tuple[float, int, int]] = []
    for fid in range(4):
        if state.rem_count:
            heap.append(make_entry(fid))
    heapq.heapify(heap)

    while state.rem_count:
        neg_g, fid, v = heapq.heappop(heap)
        if stats is not None:
            stats["pops"] += 1
        a, b, c = accum.face_vertices[fid]
        if not state.inserted[v]:
            new_faces = accum.insert(v, fid)
            state.mark_inserted(v)
            if state.rem_count == 0:
                break
            for w in (v, a, b, c):
                refresh_max_corr(state, w)
            for nfid in new_faces:
                heapq.heappush(heap, make_entry(nfid))
        else:
            for w in (a, b, c):
                refresh_max_corr(state, w)
            entry = make_entry(fid)
            if stats is not None:
                stats["refreshes"] += 1
                if -entry[0] > -neg_g + GAIN_EPS:
                    stats["gain_increases"] += 1
                    assert not entry_was_optimal.get(fid, False), (
                        f"face {fid}: gain rose from {-neg_g} to {-entry[0]} "
                        "after a refresh of a previously optimal pair")
            heapq.heappush(heap, entry)

    graph = accum.finalize(S, "heap")
    graph.debug_stats = stats
    return graph


def build_tmfg(
    S: np.ndarray,
    lists: SortedNeighborLists | None,
    config: BuildConfig,
) -> TmfgGraph:
    """Dispatch to the configured builder; the exact variant ignores lists."""
    if config.variant == "exact":
        return build_tmfg_exact(S, config)
    if lists is None:
        raise ValueError(f"the {config.variant} builder needs sorted neighbor lists")
    if config.variant == "corr":
        return build_tmfg_corr(S, lists, config)
    return build_tmfg_heap(S, lists, config)


def replay_trace(graph: TmfgGraph) -> tuple[set, set]:
    """Re-run the insertion trace; returns (edge set, final face set).

    Raises TraceError if an insertion references a face that is not live
    at that point.
    """
    a, b, c, d = (int(x) for x in graph.initial_clique)
    edges = {(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)}
    live = {(a, b, c), (a, b, d), (a, c, d), (b, c, d)}
    for row in graph.trace:
        v, x, y, z = (int(t) for t in row)
        host = tuple(sorted((x, y, z)))
        if host not in live:
            raise TraceError(f"trace inserts {v} into non-live face {host}")
        live.remove(host)
        for w in host:
            edges.add((w, v) if w < v else (v, w))
        live.add(tuple(sorted((v, x, y))))
        live.add(tuple(sorted((v, x, z))))
        live.add(tuple(sorted((v, y, z))))
    return edges, live


def save_tmfg(graph: TmfgGraph, edges_path, trace_path) -> None:
    """Write the edge list ("i j weight" per line, i<j) and the trace file.

    The trace file starts with the initial clique ("a b c d"), then one
    "v a b c" line per insertion.
    """
    with open(edges_path, "w") as fh:
        for (i, j), w in zip(graph.edges, graph.weights):
            fh.write(f"{i} {j} {w:.17g}\n")
    with open(trace_path, "w") as fh:
        fh.write(" ".join(str(int(v)) for v in graph.initial_clique) + "\n")
        for row in graph.trace:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def load_tmfg(edges_path, trace_path) -> TmfgGraph:
    """Rebuild a TmfgGraph from the edge-list and trace files."""
    edges = []
    weights = []
    for line in Path(edges_path).read_text().splitlines():
        if not line.strip():
            continue
        i, j, w = line.split()
        edges.append((int(i), int(j)))
        weights.append(float(w))
    lines = [ln for ln in Path(trace_path).read_text().splitlines() if ln.strip()]
    clique = tuple(int(x) for x in lines[0].split())
    trace = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
    n = 4 + len(trace)
    graph = TmfgGraph(
        n=n,
        edges=np.array(edges, dtype=np.int32),
        weights=np.array(weights, dtype=np.float64),
        initial_clique=np.array(clique, dtype=np.int32),
        trace=np.array(trace, dtype=np.int32).reshape(-1, 4),
        faces=np.zeros((0, 3), dtype=np.int32),
    )
    _, live = replay_trace(graph)
    graph.faces = np.array(sorted(live), dtype=np.int32).reshape(-1, 3)
    return graph
