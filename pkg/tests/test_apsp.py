import numpy as np
import pytest

from conftest import floyd_warshall, structured_matrix, uniform_matrix
from tmfgclust import (
    ApspParams,
    WeightedTmfg,
    apsp_exact,
    apsp_hub,
    build_tmfg_heap,
    query,
    sort_neighbor_lists,
    to_weighted,
)
from tmfgclust.apsp import dump_distance_matrix, select_hubs
from tmfgclust.simmatrix import read_matrix_binary
from tmfgclust.tmfg import build_tmfg_exact


def make_graph(n, seed, structured=False):
    S = structured_matrix(n, seed=seed) if structured else uniform_matrix(n, seed=seed)
    lists = sort_neighbor_lists(S, workers=1)
    graph = build_tmfg_heap(S, lists)
    return S, graph, to_weighted(graph, S)


def path_graph(lengths):
    """Hand-built CSR chain 0-1-2-... for unit tests off the TMFG path."""
    n = len(lengths) + 1
    indptr = [0]
    nbr = []
    wt = []
    for v in range(n):
        if v > 0:
            nbr.append(v - 1)
            wt.append(lengths[v - 1])
        if v < n - 1:
            nbr.append(v + 1)
            wt.append(lengths[v])
        indptr.append(len(nbr))
    return WeightedTmfg(
        n=n,
        indptr=np.array(indptr, dtype=np.int64),
        neighbors=np.array(nbr, dtype=np.int64),
        lengths=np.array(wt, dtype=np.float64),
        strength=np.zeros(n),
    )


class TestToWeighted:
    def test_length_transform(self):
        S = np.full((4, 4), 0.5)
        np.fill_diagonal(S, 1.0)
        S[0, 1] = S[1, 0] = 1.0
        S[0, 2] = S[2, 0] = -1.0
        g = build_tmfg_exact(S)
        w = to_weighted(g, S)
        lookup = {}
        for (i, j), d in zip(g.edges, np.sqrt(2 * (1 - S[g.edges[:, 0], g.edges[:, 1]]))):
            lookup[(int(i), int(j))] = d
        for v, ptr in enumerate(w.indptr[:-1]):
            for e in range(ptr, w.indptr[v + 1]):
                u = int(w.neighbors[e])
                key = (min(u, v), max(u, v))
                assert w.lengths[e] == pytest.approx(lookup[key])
        assert min(lookup.values()) == 0.0          # similarity 1
        assert max(lookup.values()) == pytest.approx(2.0)  # similarity -1

    def test_unit_half_similarity(self):
        S = np.full((4, 4), 0.5)
        np.fill_diagonal(S, 1.0)
        g = build_tmfg_exact(S)
        w = to_weighted(g, S)
        assert np.allclose(w.lengths, 1.0)


class TestExactApsp:
    def test_path_graph(self):
        oracle = apsp_exact(path_graph([1.0, 1.0]), workers=1)
        assert oracle.query(0, 2) == pytest.approx(2.0)

    def test_zero_diagonal(self):
        _, _, w = make_graph(12, seed=0)
        oracle = apsp_exact(w, workers=1)
        assert np.all(np.diag(oracle.matrix) == 0.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_floyd_warshall(self, seed):
        S, graph, w = make_graph(30, seed=seed)
        oracle = apsp_exact(w, workers=1)
        lengths = np.sqrt(2 * (1 - S[graph.edges[:, 0], graph.edges[:, 1]]))
        ref = floyd_warshall(30, graph.edges.tolist(), lengths)
        assert np.abs(oracle.matrix - ref).max() < 1e-9

    def test_symmetric_and_triangle(self):
        _, _, w = make_graph(25, seed=5)
        D = apsp_exact(w, workers=1).matrix
        assert np.abs(D - D.T).max() < 1e-12
        rng = np.random.default_rng(0)
        for _ in range(200):
            u, v, x = rng.integers(0, 25, size=3)
            assert D[u, x] <= D[u, v] + D[v, x] + 1e-12

    def test_worker_count_invariance(self):
        _, _, w = make_graph(20, seed=6)
        a = apsp_exact(w, workers=1).matrix
        b = apsp_exact(w, workers=4).matrix
        assert np.array_equal(a, b)


class TestHubApsp:
    def test_all_hubs_is_exact(self):
        _, _, w = make_graph(30, seed=1)
        exact = apsp_exact(w, workers=1)
        hub = apsp_hub(w, ApspParams(hub_count=30), workers=1)
        for u in range(30):
            for v in range(30):
                assert hub.query(u, v) == pytest.approx(exact.matrix[u, v], abs=1e-9)

    @pytest.mark.parametrize("hub_count", [1, 3, 5])
    def test_never_underestimates(self, hub_count):
        _, _, w = make_graph(30, seed=2)
        exact = apsp_exact(w, workers=1)
        hub = apsp_hub(w, ApspParams(hub_count=hub_count), workers=1)
        for u in range(30):
            for v in range(30):
                assert hub.query(u, v) >= exact.matrix[u, v] - 1e-12

    def test_exact_inside_radius(self):
        _, _, w = make_graph(40, seed=3)
        exact = apsp_exact(w, workers=1)
        hub = apsp_hub(w, ApspParams(hub_count=6), workers=1)
        for u in range(40):
            lo, hi = hub.near_indptr[u], hub.near_indptr[u + 1]
            for v, d in zip(hub.near_ids[lo:hi], hub.near_dist[lo:hi]):
                assert d == pytest.approx(exact.matrix[u, v], abs=1e-12)
                assert hub.query(u, int(v)) == pytest.approx(exact.matrix[u, v], abs=1e-12)

    def test_beyond_radius_uses_best_hub(self):
        _, _, w = make_graph(30, seed=4)
        hub = apsp_hub(w, ApspParams(hub_count=5), workers=1)
        checked = 0
        for u in range(30):
            for v in range(30):
                if u == v:
                    continue
                if hub._near_lookup(u, v) is None and hub._near_lookup(v, u) is None:
                    expect = np.min(hub.hub_dist[:, u] + hub.hub_dist[:, v])
                    assert hub.query(u, v) == pytest.approx(expect, rel=1e-15)
                    checked += 1
        assert checked > 0

    def test_query_basics(self):
        _, _, w = make_graph(25, seed=5)
        exact = apsp_exact(w, workers=1)
        hub = apsp_hub(w, workers=1)
        for u in range(25):
            assert hub.query(u, u) == 0.0
        h0, h1 = int(hub.hubs[0]), int(hub.hubs[1])
        assert hub.query(h0, h1) == pytest.approx(exact.matrix[h0, h1], abs=1e-12)
        for u, v in [(0, 7), (3, 19), (11, 24)]:
            assert hub.query(u, v) == hub.query(v, u)
            assert query(hub, u, v) == hub.query(u, v)

    def test_hub_route_monotone_in_hub_count(self):
        _, _, w = make_graph(40, seed=6)
        small = apsp_hub(w, ApspParams(hub_count=4), workers=1)
        large = apsp_hub(w, ApspParams(hub_count=9), workers=1)
        assert small.hubs.tolist() == large.hubs[:4].tolist()
        # the hub-routed estimate only improves as the hub set grows
        for u in range(40):
            for v in range(u + 1, 40):
                est_small = np.min(small.hub_dist[:, u] + small.hub_dist[:, v])
                est_large = np.min(large.hub_dist[:, u] + large.hub_dist[:, v])
                assert est_large <= est_small + 1e-12

    def test_block_matches_query(self):
        _, _, w = make_graph(30, seed=7)
        hub = apsp_hub(w, ApspParams(hub_count=5), workers=1)
        rows = np.array([0, 3, 7, 29])
        cols = np.array([1, 3, 15])
        block = hub.block(rows, cols)
        for i, u in enumerate(rows):
            for j, v in enumerate(cols):
                assert block[i, j] == pytest.approx(hub.query(int(u), int(v)), rel=1e-15)

    def test_exact_block_matches_matrix(self):
        _, _, w = make_graph(20, seed=8)
        exact = apsp_exact(w, workers=1)
        rows = np.array([3, 1, 19])
        cols = np.array([4, 4, 0])
        assert np.array_equal(exact.block(rows, cols),
                              exact.matrix[np.ix_(rows, cols)])

    def test_hub_selection_by_strength(self):
        _, _, w = make_graph(30, seed=9)
        hubs = select_hubs(w, 5)
        order = np.lexsort((np.arange(30), -w.strength))
        assert hubs.tolist() == order[:5].tolist()

    def test_hub_count_validation(self):
        _, _, w = make_graph(10, seed=10)
        with pytest.raises(ValueError):
            apsp_hub(w, ApspParams(hub_count=11), workers=1)
        with pytest.raises(ValueError):
            ApspParams(hub_count=0)
        with pytest.raises(ValueError):
            ApspParams(radius_factor=0.0)


class TestDump:
    def test_round_trip(self, tmp_path):
        _, _, w = make_graph(12, seed=11)
        oracle = apsp_exact(w, workers=1)
        p = tmp_path / "dist.bin"
        dump_distance_matrix(oracle, p)
        assert np.array_equal(read_matrix_binary(p), oracle.matrix)

    def test_hub_oracle_rejected(self, tmp_path):
        _, _, w = make_graph(12, seed=12)
        hub = apsp_hub(w, workers=1)
        with pytest.raises(ValueError):
            dump_distance_matrix(hub, tmp_path / "x.bin")
