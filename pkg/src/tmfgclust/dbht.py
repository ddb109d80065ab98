"""Directed bubble hierarchy tree clustering over a built TMFG.

The bubble tree has one node per 4-clique of the TMFG (the initial clique
plus one bubble per inserted vertex); bubbles sharing a triangular face
are linked. Each link is directed toward the side whose apex vertex has
the stronger total similarity (gain) to the shared face. Bubbles with no
outgoing links are converging bubbles and seed the coarsest cluster
layer. Vertices are assigned to the containing bubble with the smallest
mean shortest-path distance, and the final dendrogram is assembled by
complete linkage inside bubble groups, then inside converging groups,
then across converging groups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _parallel
from .apsp import DistanceOracle
from .linkage import Dendrogram, dendrogram_from_merges, nn_chain_merges
from .tmfg import TmfgGraph, TraceError, gain

HEIGHT_BUMP = 1e-12


@dataclass
class BubbleTree:
    """Bubbles (4-cliques) of a TMFG linked through shared faces."""

    n: int
    bubbles: np.ndarray      # (m, 4) member vertices, sorted, creation order
    links: np.ndarray        # (m-1, 2) (earlier bubble, later bubble)
    link_faces: np.ndarray   # (m-1, 3) shared face triple

    @property
    def num_bubbles(self) -> int:
        return self.bubbles.shape[0]


@dataclass
class DirectedBubbleTree:
    tree: BubbleTree
    sources: np.ndarray
    targets: np.ndarray

    @property
    def num_bubbles(self) -> int:
        return self.tree.num_bubbles

    def out_degrees(self) -> np.ndarray:
        out = np.zeros(self.num_bubbles, dtype=np.int64)
        np.add.at(out, self.sources, 1)
        return out


@dataclass
class BubbleAssignment:
    vertex_bubble: np.ndarray
    vertex_converging: np.ndarray


def build_bubble_tree(graph: TmfgGraph) -> BubbleTree:
    """One bubble per 4-clique of the insertion trace, linked via host faces."""
    a, b, c, d = (int(x) for x in graph.initial_clique)
    bubbles = [(a, b, c, d)]
    face_owner = {
        (a, b, c): 0, (a, b, d): 0, (a, c, d): 0, (b, c, d): 0}
    links = []
    link_faces = []
    for row in graph.trace:
        v, x, y, z = (int(t) for t in row)
        host = tuple(sorted((x, y, z)))
        owner = face_owner.pop(host, None)
        if owner is None:
            raise TraceError(f"trace inserts {v} into non-live face {host}")
        bid = len(bubbles)
        bubbles.append(tuple(sorted((v, x, y, z))))
        links.append((owner, bid))
        link_faces.append(host)
        for fc in ((v, x, y), (v, x, z), (v, y, z)):
            face_owner[tuple(sorted(fc))] = bid
    return BubbleTree(
        n=graph.n,
        bubbles=np.array(bubbles, dtype=np.int32),
        links=np.array(links, dtype=np.int32).reshape(-1, 2),
        link_faces=np.array(link_faces, dtype=np.int32).reshape(-1, 3),
    )


def _apex(bubble, face) -> int:
    face = set(face)
    for w in bubble:
        if int(w) not in face:
            return int(w)
    raise ValueError("bubble does not extend the face")


def orient_edges(tree: BubbleTree, S: np.ndarray) -> DirectedBubbleTree:
    """Direct every link toward the bubble whose apex gains more on the
    shared face; ties go toward the lower creation index."""
    sources = np.empty(tree.links.shape[0], dtype=np.int64)
    targets = np.empty(tree.links.shape[0], dtype=np.int64)
    for i, ((b1, b2), face) in enumerate(zip(tree.links, tree.link_faces)):
        b1, b2 = int(b1), int(b2)
        g1 = gain(face, _apex(tree.bubbles[b1], face), S)
        g2 = gain(face, _apex(tree.bubbles[b2], face), S)
        if g2 > g1:
            src, dst = b1, b2
        elif g1 > g2:
            src, dst = b2, b1
        else:
            src, dst = (b1, b2) if b2 < b1 else (b2, b1)
        sources[i] = src
        targets[i] = dst
    return DirectedBubbleTree(tree=tree, sources=sources, targets=targets)


def converging_bubbles(dtree: DirectedBubbleTree) -> list[int]:
    """Bubbles with no outgoing links, ascending by creation index."""
    return [int(b) for b in np.flatnonzero(dtree.out_degrees() == 0)]


def _edge_weights(graph: TmfgGraph) -> dict[tuple[int, int], float]:
    return {(int(i), int(j)): float(w)
            for (i, j), w in zip(graph.edges, graph.weights)}


def _edge_gain(face, apex: int, weights: dict[tuple[int, int], float]) -> float:
    """Gain of an apex against a face, read off the TMFG edge weights.

    Apex-face pairs of adjacent bubbles are edges of the 4-cliques, so
    the similarities are always present.
    """
    total = 0.0
    for w in sorted(int(x) for x in face):
        key = (w, apex) if w < apex else (apex, w)
        total += weights[key]
    return total


def _next_hops(dtree: DirectedBubbleTree, weights: dict) -> np.ndarray:
    """Per bubble, the outgoing link to follow toward its converging sink:
    the target whose apex has the largest gain on the shared face, ties to
    the lower target index; -1 at sinks."""
    tree = dtree.tree
    best_gain = np.full(tree.num_bubbles, -np.inf)
    hops = np.full(tree.num_bubbles, -1, dtype=np.int64)
    for i in range(dtree.sources.shape[0]):
        src = int(dtree.sources[i])
        dst = int(dtree.targets[i])
        face = dtree.tree.link_faces[i]
        g = _edge_gain(face, _apex(tree.bubbles[dst], face), weights)
        if g > best_gain[src] or (g == best_gain[src] and dst < hops[src]):
            best_gain[src] = g
            hops[src] = dst
    return hops


def bubble_sinks(dtree: DirectedBubbleTree, graph: TmfgGraph) -> np.ndarray:
    """The converging bubble each bubble's outgoing path ends at."""
    hops = _next_hops(dtree, _edge_weights(graph))
    sinks = np.full(dtree.num_bubbles, -1, dtype=np.int64)
    for b in range(dtree.num_bubbles):
        path = []
        cur = b
        while sinks[cur] < 0 and hops[cur] >= 0:
            path.append(cur)
            cur = int(hops[cur])
        sink = cur if sinks[cur] < 0 else int(sinks[cur])
        sinks[cur] = sink
        for node in path:
            sinks[node] = sink
    return sinks


def assign_vertices(
    graph: TmfgGraph,
    dtree: DirectedBubbleTree,
    oracle: DistanceOracle,
) -> BubbleAssignment:
    """Assign each vertex to its closest containing bubble.

    Closeness is the mean oracle distance from the vertex to the bubble's
    4 members (0 to itself); ties go to the earliest-created bubble. The
    converging bubble is the sink of the assigned bubble's outgoing path.
    """
    tree = dtree.tree
    n = tree.n
    containing: list[list[int]] = [[] for _ in range(n)]
    for bid in range(tree.num_bubbles):
        for w in tree.bubbles[bid]:
            containing[int(w)].append(bid)
    sinks = bubble_sinks(dtree, graph)
    vertex_bubble = np.empty(n, dtype=np.int64)
    vertex_converging = np.empty(n, dtype=np.int64)
    for v in range(n):
        best_bid = -1
        best_mean = np.inf
        for bid in containing[v]:
            members = tree.bubbles[bid]
            total = 0.0
            for w in members:
                w = int(w)
                total += 0.0 if w == v else oracle.query(v, w)
            mean = total / 4.0
            if mean < best_mean:
                best_mean = mean
                best_bid = bid
        vertex_bubble[v] = best_bid
        vertex_converging[v] = sinks[best_bid]
    return BubbleAssignment(vertex_bubble=vertex_bubble,
                            vertex_converging=vertex_converging)


def _cluster_max_matrix(oracle: DistanceOracle, member_lists) -> np.ndarray:
    """Pairwise max oracle distance between vertex groups."""
    concat = np.concatenate([np.asarray(m, dtype=np.int64) for m in member_lists])
    starts = np.zeros(len(member_lists) + 1, dtype=np.int64)
    np.cumsum([len(m) for m in member_lists], out=starts[1:])
    if oracle.mode == "exact":
        from ._kernels import segment_pair_max

        out = np.empty((len(member_lists), len(member_lists)))
        segment_pair_max(oracle.matrix, concat, starts, out)
        return out
    block = oracle.block(concat, concat)
    chunk = np.maximum.reduceat(block, starts[:-1], axis=1)
    return np.maximum.reduceat(chunk, starts[:-1], axis=0)


def build_hierarchy(
    assignment: BubbleAssignment,
    dtree: DirectedBubbleTree,
    oracle: DistanceOracle,
    workers: int | None = None,
) -> Dendrogram:
    """Assemble the full dendrogram in three complete-linkage layers.

    (1) vertices within each bubble group, (2) bubble clusters within
    each converging group, (3) converging clusters; inter-cluster
    distance is always the max pairwise vertex distance. Later-layer
    heights are raised just above any earlier height when needed, so the
    merge sequence is height-nondecreasing and cutting at the number of
    converging groups recovers exactly the converging partition.
    """
    workers = _parallel.resolve_workers(workers)
    n = assignment.vertex_bubble.shape[0]
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(int(assignment.vertex_bubble[v]), []).append(v)
    bubble_ids = sorted(groups)

    records: list[tuple[int, int, float]] = []

    def new_record(left: int, right: int, height: float) -> int:
        records.append((left, right, height))
        return n + len(records) - 1

    def run_linkage(handles: list[int], D: np.ndarray) -> tuple[int, list[tuple[int, float]]]:
        """Complete linkage over pre-built clusters; returns (root, rows)."""
        local = dict(enumerate(handles))
        rows = []
        root = handles[0]
        for t, (li, ri, h) in enumerate(nn_chain_merges(D)):
            rec = new_record(local[li], local[ri], h)
            local[len(handles) + t] = rec
            rows.append((rec, h))
            root = rec
        return root, rows

    # layer 1: vertices inside each bubble group (independent, parallelizable)
    def layer1_job(bid: int):
        mem = groups[bid]
        if len(mem) == 1:
            return bid, mem[0], []
        D = oracle.block(np.asarray(mem), np.asarray(mem))
        local = nn_chain_merges(D)
        return bid, None, (mem, local)

    layer1_rows: list[tuple[int, float]] = []
    group_root: dict[int, int] = {}
    for bid, leaf, payload in _parallel.run_tasks(layer1_job, bubble_ids, workers):
        if leaf is not None:
            group_root[bid] = leaf
            continue
        mem, local = payload
        handle = dict(enumerate(mem))
        for t, (li, ri, h) in enumerate(local):
            rec = new_record(handle[li], handle[ri], h)
            handle[len(mem) + t] = rec
            layer1_rows.append((rec, h))
        group_root[bid] = rec
    layer1_rows.sort(key=lambda rh: rh[1])

    # layer 2: bubble clusters inside each converging group
    conv_groups: dict[int, list[int]] = {}
    for bid in bubble_ids:
        conv = int(assignment.vertex_converging[groups[bid][0]])
        conv_groups.setdefault(conv, []).append(bid)
    conv_ids = sorted(conv_groups)

    layer2_rows: list[tuple[int, float]] = []
    conv_root: dict[int, int] = {}
    for conv in conv_ids:
        bids = conv_groups[conv]
        if len(bids) == 1:
            conv_root[conv] = group_root[bids[0]]
            continue
        M = _cluster_max_matrix(oracle, [groups[b] for b in bids])
        root, rows = run_linkage([group_root[b] for b in bids], M)
        conv_root[conv] = root
        layer2_rows.extend(rows)
    layer2_rows.sort(key=lambda rh: rh[1])

    # layer 3: converging groups against each other
    layer3_rows: list[tuple[int, float]] = []
    if len(conv_ids) > 1:
        members = [sorted(v for b in conv_groups[c] for v in groups[b]) for c in conv_ids]
        M = _cluster_max_matrix(oracle, members)
        _, layer3_rows = run_linkage([conv_root[c] for c in conv_ids], M)
        layer3_rows.sort(key=lambda rh: rh[1])

    # emit with a running height floor so later layers never dip below
    final_rows: list[tuple[int, int, float]] = []
    final_id: dict[int, int] = {}
    floor = -np.inf
    for rows in (layer1_rows, layer2_rows, layer3_rows):
        for rec_handle, _ in rows:
            left, right, h = records[rec_handle - n]
            if h < floor:
                h = floor + HEIGHT_BUMP
            floor = h
            li = final_id.get(left, left)
            ri = final_id.get(right, right)
            final_id[rec_handle] = n + len(final_rows)
            final_rows.append((min(li, ri), max(li, ri), h))
    return dendrogram_from_merges(n, final_rows)
