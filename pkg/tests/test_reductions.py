import itertools
from fractions import Fraction

import numpy as np
import pytest

from dualwall.errors import (
    DegenerateQ,
    DimensionMismatch,
    GuestLargerThanHost,
    LeftLargerThanRight,
    NonSquare,
    TooFewNodes,
)
from dualwall.ppp import PPPInstance, ppp_value
from dualwall.reductions import (
    WeightedGraph,
    auto_big,
    bipartite_matching_to_ppp,
    complete_graph,
    density,
    graph_tour_length,
    matching_to_ppp,
    matching_weight,
    qap_to_ppp,
    qap_value,
    random_bipartite,
    random_graph,
    random_qap,
    random_regular_graph,
    random_tsp,
    subgraph_iso_to_ppp,
    tour_length,
    tsp_graph_to_ppp,
    tsp_to_ppp,
)
from dualwall.solvers import permutation_oracle


def triangle(w=(1, 2, 3)):
    return WeightedGraph(3, ((0, 1, w[0]), (0, 2, w[1]), (1, 2, w[2])))


def cycle(n):
    return WeightedGraph(n, tuple((i, (i + 1) % n, 1) for i in range(n)))


def path(n):
    return WeightedGraph(n, tuple((i, i + 1, 1) for i in range(n - 1)))


def canonical_and_inside(inst: PPPInstance) -> bool:
    for i, j, ip, jp in inst.interactions:
        if not (0 <= i < ip < inst.m and 0 <= j < inst.n and 0 <= jp < inst.n and j != jp):
            return False
    return True


def literal_qap(f, d, p):
    n = len(p)
    return sum(int(f[i][k]) * int(d[p[i]][p[k]]) for i in range(n) for k in range(n))


def literal_tour(d, p):
    n = len(p)
    return sum(int(d[p[i]][p[(i + 1) % n]]) for i in range(n))


class TestGraph:
    def test_normalizes_edges(self):
        g = WeightedGraph(3, ((2, 0, 5), (1, 0)))
        assert g.edges == ((0, 1, 1), (0, 2, 5))

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            WeightedGraph(2, ((1, 1, 1),))

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError):
            WeightedGraph(3, ((0, 1, 1), (1, 0, 2)))

    def test_networkx_round_trip(self):
        g = random_graph(10, 20, seed=3)
        assert WeightedGraph.from_networkx(g.to_networkx()) == g

    def test_generators(self):
        g = random_graph(40, 104, seed=1)
        assert g.num_nodes == 40 and g.num_edges == 104
        assert all(1 <= w <= 100 for _, _, w in g.edges)
        r = random_regular_graph(3, 10, seed=2)
        assert r.num_edges == 15
        assert complete_graph(6).num_edges == 15
        assert random_graph(40, 104, seed=1) == g


class TestQAP:
    def test_two_facility_example(self):
        inst = qap_to_ppp([[0, 1], [0, 0]], [[0, 3], [2, 0]])
        assert inst.interactions == {(0, 0, 1, 1): 3, (0, 1, 1, 0): 2}
        assert ppp_value(inst, [0, 1]) == 3 == qap_value([[0, 1], [0, 0]], [[0, 3], [2, 0]], [0, 1])
        assert ppp_value(inst, [1, 0]) == 2 == qap_value([[0, 1], [0, 0]], [[0, 3], [2, 0]], [1, 0])

    def test_zero_flows(self):
        inst = qap_to_ppp(np.zeros((3, 3), int), random_tsp(3, seed=0))
        assert inst.num_interactions == 0 and inst.num_potentials == 0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            qap_to_ppp(np.zeros((2, 2)), np.zeros((3, 3)))

    def test_non_square(self):
        with pytest.raises(NonSquare):
            qap_to_ppp(np.zeros((2, 3)), np.zeros((2, 3)))

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_equivalence_exhaustive(self, n):
        rng = np.random.default_rng(n)
        f = rng.integers(-5, 10, size=(n, n))
        d = rng.integers(-5, 10, size=(n, n))
        inst = qap_to_ppp(f, d)
        assert canonical_and_inside(inst)
        for p in itertools.permutations(range(n)):
            assert ppp_value(inst, p) == literal_qap(f, d, p) == qap_value(f, d, p)

    @pytest.mark.parametrize("n", [4, 6])
    def test_interaction_count(self, n):
        rng = np.random.default_rng(0)
        f = rng.integers(1, 10, size=(n, n)) * (rng.random((n, n)) < 0.4)
        np.fill_diagonal(f, 0)
        d = random_tsp(n, seed=1)
        k = int(((f != 0) | (f.T != 0))[np.triu_indices(n, 1)].sum())
        # k counts unordered facility pairs; each pair contributes n(n-1) quartets
        assert qap_to_ppp(f, d).num_interactions == n * (n - 1) * k
        # the printed form half n^2 k' - half n k' uses ordered pairs k' = 2k
        assert n * (n - 1) * k == (n * n * 2 * k - n * 2 * k) // 2
        assert n * (n - 1) * k <= (n**4 - 2 * n**3 + n * n) // 2

    def test_dense_n50(self):
        inst = qap_to_ppp(*random_qap(50, seed=0))
        assert inst.num_interactions == 3_001_250
        assert density(inst) == 1


class TestTSP:
    def test_triangle_all_tours_equal(self):
        d = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]])
        inst = tsp_to_ppp(d)
        assert {ppp_value(inst, p) for p in itertools.permutations(range(3))} == {6}

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_equivalence_exhaustive(self, n):
        d = random_tsp(n, seed=n)
        inst = tsp_to_ppp(d)
        assert canonical_and_inside(inst)
        assert inst.num_interactions == n**3 - n**2
        for p in itertools.permutations(range(n)):
            assert ppp_value(inst, p) == literal_tour(d, p) == tour_length(d, p)

    def test_asymmetric(self):
        rng = np.random.default_rng(5)
        d = rng.integers(1, 50, size=(4, 4))
        np.fill_diagonal(d, 0)
        inst = tsp_to_ppp(d)
        for p in itertools.permutations(range(4)):
            assert ppp_value(inst, p) == literal_tour(d, p)

    def test_non_square(self):
        with pytest.raises(NonSquare):
            tsp_to_ppp(np.zeros((2, 3)))

    def test_dense_n100(self):
        inst = tsp_to_ppp(random_tsp(100, seed=0))
        assert inst.num_interactions == 990_000
        assert density(inst) == Fraction(990_000, 49_005_000)
        assert round(float(density(inst)), 3) == 0.020


class TestGraphTSP:
    def test_triangle(self):
        g = triangle()
        inst, shift = tsp_graph_to_ppp(g, big=10)
        assert inst.num_interactions == 18 and shift == 30
        for p in itertools.permutations(range(3)):
            assert ppp_value(inst, p) + shift == 6

    def test_star_has_no_tour(self):
        star = WeightedGraph(4, ((0, 1, 1), (0, 2, 1), (0, 3, 1)))
        big = auto_big(star)
        inst, shift = tsp_graph_to_ppp(star)
        for p in itertools.permutations(range(4)):
            assert ppp_value(inst, p) + shift >= big

    @pytest.mark.parametrize("n", [4, 5])
    def test_equivalence_exhaustive(self, n):
        g = random_graph(n, n + 1, seed=n)
        big = auto_big(g)
        assert big == n * g.max_abs_weight + 1
        inst, shift = tsp_graph_to_ppp(g)
        assert canonical_and_inside(inst)
        assert inst.num_interactions == 2 * g.num_edges * n
        for p in itertools.permutations(range(n)):
            assert ppp_value(inst, p) + shift == graph_tour_length(g, p, big)

    def test_too_few_nodes(self):
        with pytest.raises(TooFewNodes):
            tsp_graph_to_ppp(WeightedGraph(2, ((0, 1, 1),)))

    def test_forty_node_count(self):
        inst, _ = tsp_graph_to_ppp(random_graph(40, 104, seed=0))
        assert inst.num_interactions == 8320


class TestSubgraphIso:
    def test_triangle_into_k4(self):
        inst = subgraph_iso_to_ppp(triangle(), complete_graph(4))
        assert inst.num_interactions == 36
        assert permutation_oracle(inst).value == -3

    def test_edge_into_empty_host(self):
        inst = subgraph_iso_to_ppp(WeightedGraph(2, ((0, 1, 1),)), WeightedGraph(3, ()))
        assert permutation_oracle(inst).value == 0

    def test_path_into_cycle(self):
        inst = subgraph_iso_to_ppp(path(3), cycle(4))
        assert permutation_oracle(inst).value == -2

    def test_guest_too_large(self):
        with pytest.raises(GuestLargerThanHost):
            subgraph_iso_to_ppp(complete_graph(4), complete_graph(3))

    @pytest.mark.parametrize("seed", range(4))
    def test_embedding_iff_minimum(self, seed):
        from networkx.algorithms import isomorphism

        guest = random_graph(3, 2 + seed % 2, seed=seed)
        host = random_graph(5, 4 + seed, seed=seed + 10)
        inst = subgraph_iso_to_ppp(guest, host)
        assert inst.num_interactions == 2 * guest.num_edges * host.num_edges
        matcher = isomorphism.GraphMatcher(host.to_networkx(), guest.to_networkx())
        embeds = any(True for _ in matcher.subgraph_monomorphisms_iter())
        assert (permutation_oracle(inst).value == -guest.num_edges) == embeds


class TestMatching:
    def test_path(self):
        g = WeightedGraph(3, ((0, 1, 5), (1, 2, 7)))
        assert permutation_oracle(matching_to_ppp(g)).value == -7

    def test_edgeless(self):
        inst = matching_to_ppp(WeightedGraph(3, ()))
        assert {ppp_value(inst, p) for p in itertools.permutations(range(3))} == {0}

    def test_triangle(self):
        assert permutation_oracle(matching_to_ppp(triangle((5, 7, 9)))).value == -9

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_networkx(self, seed):
        import networkx as nx

        g = random_graph(5, 7, seed=seed)
        inst = matching_to_ppp(g)
        assert inst.num_interactions == g.num_edges
        best = nx.max_weight_matching(g.to_networkx())
        weight = sum(g.weights()[(min(u, v), max(u, v))] for u, v in best)
        oracle = permutation_oracle(inst)
        assert -oracle.value == weight
        assert matching_weight(g, oracle.argmin) == weight

    def test_bipartite_2x2(self):
        inst = bipartite_matching_to_ppp(2, 2, [(0, 0, 1), (0, 1, 2), (1, 0, 3), (1, 1, 5)])
        res = permutation_oracle(inst)
        assert res.value == -6 and tuple(res.argmin) == (0, 1)

    def test_bipartite_single_edge(self):
        inst = bipartite_matching_to_ppp(1, 2, [(0, 0, 4)])
        assert permutation_oracle(inst).value == -4

    def test_bipartite_left_too_large(self):
        with pytest.raises(LeftLargerThanRight):
            bipartite_matching_to_ppp(3, 2, [])

    def test_bipartite_300(self):
        inst = bipartite_matching_to_ppp(300, 300, random_bipartite(300, 300, seed=0))
        assert inst.num_potentials == 90_000 and inst.num_interactions == 0
        assert density(inst) == 0

    @pytest.mark.parametrize("seed", range(3))
    def test_bipartite_matches_scipy(self, seed):
        from scipy.optimize import linear_sum_assignment

        edges = random_bipartite(3, 5, seed=seed)
        w = np.zeros((3, 5), dtype=np.int64)
        for u, v, x in edges:
            w[u, v] = x
        rows, cols = linear_sum_assignment(w, maximize=True)
        inst = bipartite_matching_to_ppp(3, 5, edges)
        assert -permutation_oracle(inst).value == w[rows, cols].sum()


class TestDensity:
    def test_empty(self):
        assert density(PPPInstance(3, 3)) == 0

    def test_degenerate(self):
        with pytest.raises(DegenerateQ):
            density(PPPInstance(1, 5))
