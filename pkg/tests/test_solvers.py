import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualwall.bqm import Kind, QuadraticModel, convert
from dualwall.encodings import Scheme, build_vector_model
from dualwall.errors import TooLarge
from dualwall.kernels import Technique, build_kernel
from dualwall.ppp import AUTO, PPPInstance, compose
from dualwall.reductions import WeightedGraph, matching_to_ppp
from dualwall.solvers import (
    SAParams,
    brute_force,
    eliminate_minimum,
    exact_minimum,
    expected_minimizers,
    permutation_oracle,
    restart_seeds,
    simulated_annealing,
    verify_kernel,
)

from oracles import injections, naive_energy, ppp_reference
from test_bqm import random_models


def states(n, kind):
    bits = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8).reshape(2**n, n)
    return bits if kind is Kind.QUBO else 2 * bits - 1


class TestBruteForce:
    def test_one_hot_k3(self):
        res = brute_force(build_vector_model(Scheme.ONE_HOT, 3, Kind.QUBO)[0])
        assert res.minimum == 0 and res.count == 3
        assert res.minimizers.tolist() == [[0, 0, 1], [0, 1, 0], [1, 0, 0]]

    def test_dual_matrix_n3(self):
        res = brute_force(build_kernel(Technique.DUAL_MATRIX, 3, 3, Kind.QUBO).model)
        assert res.minimum == 3 and res.count == 6

    def test_empty(self):
        res = brute_force(QuadraticModel(Kind.QUBO, 0, offset=Fraction(5, 2)))
        assert res.minimum == Fraction(5, 2) and res.count == 1
        assert res.minimizers.shape == (1, 0)

    def test_cap(self):
        with pytest.raises(TooLarge):
            brute_force(QuadraticModel(Kind.QUBO, 27))
        with pytest.raises(TooLarge):
            brute_force(QuadraticModel(Kind.QUBO, 5), cap=4)

    def test_overflow_flag(self):
        res = brute_force(QuadraticModel(Kind.QUBO, 10), max_minimizers=100)
        assert res.overflow and res.count == 100

    def test_zero_model_all_minimizers(self):
        res = brute_force(QuadraticModel(Kind.ISING, 3))
        assert res.count == 8 and res.minimizers[0].tolist() == [-1, -1, -1]

    def test_high_block_path(self):
        # 20 variables exercises the split enumeration
        rng = np.random.default_rng(3)
        n = 20
        quad = {(i, j): int(rng.integers(-5, 6)) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.15}
        lin = {i: int(rng.integers(-5, 6)) for i in range(n)}
        model = QuadraticModel(Kind.QUBO, n, lin, quad)
        res = brute_force(model)
        for x in res.minimizers:
            assert naive_energy(model, x) == res.minimum
        sample = rng.integers(0, 2, size=(2000, n))
        assert (model.variable_energies(sample) + model.offset >= res.minimum).all()

    @settings(max_examples=40)
    @given(random_models(max_vars=10))
    def test_matches_exhaustive_naive(self, model):
        res = brute_force(model)
        xs = states(model.num_vars, model.kind)
        energies = [naive_energy(model, x) for x in xs]
        low = min(energies)
        assert res.minimum == low
        expected = sorted(tuple(int(v) for v in x) for x, e in zip(xs, energies) if e == low)
        assert [tuple(r) for r in res.minimizers.tolist()] == expected

    @settings(max_examples=40)
    @given(random_models(max_vars=10))
    def test_conversion_preserves_argmin(self, model):
        target, _, _ = convert(model)
        src = brute_force(model).minimizers
        dst = brute_force(target).minimizers
        mapped = 2 * src - 1 if model.kind is Kind.QUBO else (src + 1) // 2
        assert sorted(map(tuple, mapped.tolist())) == sorted(map(tuple, dst.tolist()))


class TestElimination:
    @settings(max_examples=60)
    @given(random_models(max_vars=12))
    def test_matches_brute_force(self, model):
        res = eliminate_minimum(model)
        assert res.minimum == brute_force(model).minimum
        assert model.energy(res.assignment) == res.minimum
        assert res.enumerated + res.eliminated == model.num_vars

    @pytest.mark.parametrize("technique", list(Technique))
    @pytest.mark.parametrize("kind", list(Kind))
    def test_kernels(self, technique, kind):
        h = build_kernel(technique, 3, 4, kind) if technique is not Technique.ALL_DIFFERENT else build_kernel(technique, 4, 4, kind)
        if h.model.num_vars > 24:
            pytest.skip("beyond the exhaustive budget")
        assert eliminate_minimum(h.model).minimum == h.optimal_value

    def test_dense_graph_enumerates_almost_everything(self):
        quad = {(i, j): 1 for i in range(6) for j in range(i + 1, 6)}
        res = eliminate_minimum(QuadraticModel(Kind.ISING, 6, {}, quad))
        assert res.eliminated == 2 and res.minimum == -3

    def test_forty_variable_dual_matrix(self):
        g = WeightedGraph(5, tuple((i, j, 1 + (3 * i + j) % 7) for i in range(5) for j in range(i + 1, 5)))
        inst = matching_to_ppp(g)
        enc = compose(inst, Technique.DUAL_MATRIX, Kind.QUBO, AUTO)
        assert enc.model.num_vars == 40
        res = eliminate_minimum(enc.model)
        sol = enc.decode(res.assignment)
        assert sol.feasible and sol.objective == permutation_oracle(inst).value
        assert exact_minimum(enc.model) == res.minimum

    def test_cap(self):
        quad = {(i, j): 1 for i in range(8) for j in range(i + 1, 8)}
        with pytest.raises(TooLarge):
            eliminate_minimum(QuadraticModel(Kind.QUBO, 8, {}, quad), cap=4)


class TestOracle:
    def test_two_particles(self):
        inst = PPPInstance(2, 2, {(0, 1): 1, (1, 0): 2}, {(0, 1, 1, 0): -3, (0, 0, 1, 1): 5})
        res = permutation_oracle(inst)
        assert (res.value, res.argmin, res.count) == (0, (1, 0), 1)

    def test_empty(self):
        res = permutation_oracle(PPPInstance(2, 3))
        assert res.value == 0 and res.count == 6 and res.argmin == (0, 1)

    def test_triangle_matching(self):
        g = WeightedGraph(3, ((0, 1, 5), (0, 2, 7), (1, 2, 9)))
        assert permutation_oracle(matching_to_ppp(g)).value == -9

    def test_limit(self):
        with pytest.raises(TooLarge):
            permutation_oracle(PPPInstance(11, 11))

    def test_lexicographic_tie_break(self):
        inst = PPPInstance(2, 3, {(0, 2): -1, (1, 0): -1, (1, 1): -1})
        assert permutation_oracle(inst).argmin == (2, 0)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_reference(self, seed):
        rng = np.random.default_rng(seed)
        m, n = 3, 5
        pot = {(i, j): int(rng.integers(-9, 10)) for i in range(m) for j in range(n)}
        inter = {
            (i, j, ip, jp): int(rng.integers(-9, 10))
            for i, ip in itertools.combinations(range(m), 2)
            for j in range(n)
            for jp in range(n)
            if j != jp and rng.random() < 0.5
        }
        inst = PPPInstance(m, n, pot, inter)
        values = {p: ppp_reference(m, inst.potentials, inst.interactions, p) for p in injections(m, n)}
        best = min(values.values())
        res = permutation_oracle(inst)
        assert res.value == best
        assert res.count == sum(v == best for v in values.values())
        assert res.argmin == min(p for p, v in values.items() if v == best)


class TestComposedAgreement:
    @pytest.mark.parametrize("technique", list(Technique))
    @pytest.mark.parametrize("kind", list(Kind))
    @pytest.mark.parametrize("m,n", [(2, 3), (3, 3), (2, 4)])
    def test_brute_force_equals_oracle(self, technique, kind, m, n):
        if technique is Technique.ALL_DIFFERENT and m != n:
            pytest.skip("full permutations only")
        rng = np.random.default_rng(m * 10 + n)
        pot = {(i, j): int(rng.integers(-5, 6)) for i in range(m) for j in range(n)}
        inter = {
            (i, j, ip, jp): int(rng.integers(-5, 6))
            for i, ip in itertools.combinations(range(m), 2)
            for j in range(n)
            for jp in range(n)
            if j != jp
        }
        inst = PPPInstance(m, n, pot, inter)
        enc = compose(inst, technique, kind, AUTO)
        if enc.model.num_vars > 24:
            pytest.skip("beyond the exhaustive budget")
        res = brute_force(enc.model)
        oracle = permutation_oracle(inst)
        assert res.minimum == enc.lam * enc.kernel.optimal_value + enc.c * oracle.value + enc.d


class TestAnnealing:
    def test_one_hot_k4(self):
        model = build_vector_model(Scheme.ONE_HOT, 4, Kind.QUBO)[0]
        sol = simulated_annealing(model, SAParams(seed=1, sweeps=100))
        assert sol.energy == 0
        assert sol.energy == model.energy(sol.assignment)

    def test_zero_model(self):
        model = QuadraticModel(Kind.ISING, 5, offset=3)
        sol = simulated_annealing(model, SAParams(seed=0, sweeps=10))
        assert sol.energy == 3

    def test_deterministic(self):
        model = build_kernel(Technique.DUAL_MATRIX, 4, 4, Kind.ISING).model
        params = SAParams(seed=42, sweeps=50, restarts=4)
        a = simulated_annealing(model, params)
        b = simulated_annealing(model, params)
        assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())

    def test_threads_do_not_change_result(self):
        model = build_kernel(Technique.DUAL_MATRIX, 4, 4, Kind.QUBO).model
        serial = simulated_annealing(model, SAParams(seed=3, sweeps=30, restarts=6))
        parallel = simulated_annealing(model, SAParams(seed=3, sweeps=30, restarts=6, threads=3))
        assert serial.to_dict() == parallel.to_dict()
        assert serial.meta["restart_energies"] == parallel.meta["restart_energies"]

    def test_restart_seeds_distinct(self):
        seeds = restart_seeds(0, 50)
        assert len(set(seeds)) == 50 and restart_seeds(0, 50) == seeds

    @pytest.mark.parametrize("technique", list(Technique))
    @pytest.mark.parametrize("kind", list(Kind))
    def test_never_below_brute_force(self, technique, kind):
        h = build_kernel(technique, 3, 3, kind)
        floor = brute_force(h.model).minimum
        sol = simulated_annealing(h.model, SAParams(seed=5, sweeps=200, restarts=3))
        assert sol.energy >= floor
        assert all(e >= floor for e in sol.meta["restart_energies"])
        assert sol.energy == h.model.energy(sol.assignment)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            SAParams(sweeps=0)
        with pytest.raises(ValueError):
            SAParams(ratio=1.5)
        with pytest.raises(ValueError):
            SAParams(t_final=0)
        with pytest.raises(ValueError):
            simulated_annealing(QuadraticModel(Kind.QUBO, 0))

    def test_explicit_ratio(self):
        model = build_vector_model(Scheme.DOMAIN_WALL, 6, Kind.ISING)[0]
        sol = simulated_annealing(model, SAParams(seed=2, sweeps=200, t_initial=3.0, ratio=0.97))
        assert sol.energy == 2

    def test_solution_json_shape(self):
        model = build_vector_model(Scheme.ONE_HOT, 3, Kind.QUBO)[0]
        d = simulated_annealing(model, SAParams(seed=9, sweeps=20)).to_dict()
        assert set(d) == {"energy", "assignment", "feasible", "permutation", "solver", "seed"}
        assert d["solver"] == "sa" and d["seed"] == 9


class TestVerifyKernel:
    def test_dual_matrix_ising(self):
        r = verify_kernel(Technique.DUAL_MATRIX, 3, 3, Kind.ISING)
        assert r.ok and r.minimum == 12 and r.minimizer_count == 6
        assert r.summary() == "minimum 12, minimizers 6, decode 100%, coverage 100%"

    def test_one_hot_partial(self):
        r = verify_kernel(Technique.ONE_HOT, 2, 3, Kind.QUBO)
        assert r.ok and r.minimum == 0 and r.minimizer_count == 6

    def test_extended_partial(self):
        r = verify_kernel(Technique.EXTENDED, 2, 3, Kind.QUBO)
        assert r.ok and r.minimum == Fraction(5, 2)
        assert r.summary().startswith("minimum 2.5,")

    def test_boundary_errata_reported(self):
        r = verify_kernel(Technique.DUAL_MATRIX, 2, 3, Kind.QUBO)
        assert r.ok
        assert r.table_diff == {"diameter": (2, 3)}
        assert r.errata == {"diameter": 3}

    def test_expected_minimizers(self):
        assert expected_minimizers(Technique.ONE_HOT, 2, 4) == 12
        assert expected_minimizers(Technique.DUAL_MATRIX, 2, 4) == 12 * 4
        assert expected_minimizers(Technique.EXTENDED, 3, 4) == 24 * 3

    def test_too_large(self):
        with pytest.raises(TooLarge):
            verify_kernel(Technique.EXTENDED, 4, 4, Kind.QUBO)
