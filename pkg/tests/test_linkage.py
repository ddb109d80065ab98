import numpy as np
import pytest

from conftest import naive_complete_linkage
from tmfgclust import Dendrogram, complete_linkage, cut, load_dendrogram, save_dendrogram
from tmfgclust.linkage import dendrogram_from_merges, nn_chain_merges, serialize_dendrogram


def members_and_heights(d: Dendrogram):
    """Merged member sets with heights, for comparison against the oracle."""
    sets = {i: frozenset([i]) for i in range(d.n_leaves)}
    out = []
    for t in range(d.n_merges):
        merged = sets[int(d.lefts[t])] | sets[int(d.rights[t])]
        sets[d.n_leaves + t] = merged
        out.append((merged, d.heights[t]))
    return out


def random_distance_matrix(m, rng):
    D = rng.random((m, m)) + 0.01
    D = (D + D.T) / 2
    np.fill_diagonal(D, 0.0)
    return D


class TestCompleteLinkage:
    def test_two_items(self):
        d = complete_linkage([0, 1], lambda a, b: 0.7)
        assert d.n_merges == 1
        assert d.heights[0] == pytest.approx(0.7)
        assert d.sizes[0] == 2

    def test_three_items_hand_case(self):
        dist = {(0, 1): 1.0, (0, 2): 5.0, (1, 2): 4.0}

        def d(a, b):
            return dist[tuple(sorted((a, b)))]

        dg = complete_linkage([0, 1, 2], d)
        assert dg.heights.tolist() == [1.0, 5.0]
        assert {int(dg.lefts[0]), int(dg.rights[0])} == {0, 1}
        assert {int(dg.lefts[1]), int(dg.rights[1])} == {2, 3}

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_naive_oracle_12_items(self, seed):
        rng = np.random.default_rng(seed)
        D = random_distance_matrix(12, rng)
        dg = complete_linkage(range(12), lambda a, b: D[a, b])
        expected = naive_complete_linkage(D)
        got = members_and_heights(dg)
        assert [m for m, _ in got] == [m for m, _ in expected]
        for (_, h1), (_, h2) in zip(got, expected):
            assert h1 == pytest.approx(h2, abs=1e-12)

    def test_single_item(self):
        d = complete_linkage([0], lambda a, b: 0.0)
        assert d.n_merges == 0
        cutd = cut(d, 1)
        assert cutd.tolist() == [0]

    def test_heights_nondecreasing_and_valid(self):
        rng = np.random.default_rng(42)
        D = random_distance_matrix(30, rng)
        dg = complete_linkage(range(30), lambda a, b: D[a, b])
        dg.validate()
        assert np.all(np.diff(dg.heights) >= 0)


class TestCut:
    def build(self, m, seed=0):
        rng = np.random.default_rng(seed)
        D = random_distance_matrix(m, rng)
        return complete_linkage(range(m), lambda a, b: D[a, b])

    def test_all_singletons(self):
        d = self.build(9)
        assert cut(d, 9).tolist() == list(range(9))

    def test_one_cluster(self):
        d = self.build(9)
        assert cut(d, 1).tolist() == [0] * 9

    def test_three_item_hand_case(self):
        dist = {(0, 1): 1.0, (0, 2): 5.0, (1, 2): 4.0}
        d = complete_linkage([0, 1, 2], lambda a, b: dist[tuple(sorted((a, b)))])
        assert cut(d, 2).tolist() == [0, 0, 1]

    def test_out_of_range(self):
        d = self.build(5)
        with pytest.raises(ValueError):
            cut(d, 0)
        with pytest.raises(ValueError):
            cut(d, 6)

    @pytest.mark.parametrize("k", range(1, 14))
    def test_exactly_k_clusters(self, k):
        d = self.build(13, seed=k)
        labels = cut(d, k)
        assert len(set(labels.tolist())) == k

    def test_cut_refines_previous(self):
        d = self.build(16, seed=3)
        for k in range(2, 17):
            fine = cut(d, k)
            coarse = cut(d, k - 1)
            # every fine cluster maps into exactly one coarse cluster
            mapping = {}
            for f, c in zip(fine.tolist(), coarse.tolist()):
                assert mapping.setdefault(f, c) == c

    def test_labels_by_smallest_member(self):
        d = self.build(10, seed=9)
        labels = cut(d, 4)
        firsts = {}
        for v, lab in enumerate(labels.tolist()):
            firsts.setdefault(lab, v)
        assert sorted(firsts) == list(range(4))
        assert [firsts[lab] for lab in sorted(firsts)] == sorted(firsts.values())


class TestSerialization:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        D = random_distance_matrix(11, rng)
        d = complete_linkage(range(11), lambda a, b: D[a, b])
        p = tmp_path / "dendro.txt"
        save_dendrogram(d, p)
        back = load_dendrogram(p)
        assert back.n_leaves == d.n_leaves
        assert np.array_equal(back.lefts, d.lefts)
        assert np.array_equal(back.rights, d.rights)
        assert np.array_equal(back.heights, d.heights)
        assert np.array_equal(back.sizes, d.sizes)

    def test_text_format(self):
        merges = [(0, 1, 0.5), (2, 3, 1.25)]
        d = dendrogram_from_merges(3, merges)
        text = serialize_dendrogram(d)
        assert text.splitlines() == ["0 1 0.5 2", "2 3 1.25 3"]


class TestTies:
    def test_equal_distances_deterministic(self):
        D = np.full((6, 6), 0.5)
        np.fill_diagonal(D, 0.0)
        a = nn_chain_merges(D)
        b = nn_chain_merges(D)
        assert a == b
        d = dendrogram_from_merges(6, a)
        d.validate()
