from fractions import Fraction
from math import ceil, log, sqrt

import numpy as np
import pytest

from factories import poly
from models.polynomial import Assignment, FieldTag, Monomial, PolySystem
from models.reduction import ZeroSolutionSentinel
from services.polysys_service import brute_force_solutions, is_solution, planted_system, random_quadratic_system
from services.reduce_service import (
    constant_pivot, isolation_schedule, lift_f2_to_c, normalize_constants, schedule_length_bound,
    slack_bit_count, vv_augment,
)


class TestLift:
    @pytest.mark.parametrize("sparsity,bits", [(1, 0), (2, 1), (3, 1), (4, 2), (7, 2), (8, 3)])
    def test_slack_bit_count(self, sparsity, bits):
        n = 4
        p = poly([(Monomial.from_mask(m, n), 1) for m in range(sparsity)], n, FieldTag.F2)
        assert slack_bit_count(p) == bits

    def test_layout(self):
        f = poly([((1, 1), 1), ((1, 0), 1), ((0, 0), 1)], 2, FieldTag.F2)
        lift = lift_f2_to_c(PolySystem((f,), 2, FieldTag.F2))
        assert lift.num_vars == 3
        assert lift.num_eqs == 4
        assert [v.name for v in lift.var_map] == ["x1", "x2", "y1_1"]
        lifted = lift.system[0]
        assert lifted.coefficient(lifted.monomials[0]) == 1  # constant term kept
        assert lift.system.includes_field_equations

    @pytest.mark.parametrize("seed", range(8))
    def test_solution_bijection(self, seed):
        sys_f2 = random_quadratic_system(3, 2, seed, FieldTag.F2)
        lift = lift_f2_to_c(sys_f2)
        f2_solutions = brute_force_solutions(sys_f2)
        lifted_solutions = brute_force_solutions(lift.system)
        assert len(lifted_solutions) == len(f2_solutions)
        assert sorted(lift.project(s).bits for s in lifted_solutions) == sorted(s.bits for s in f2_solutions)
        for s in f2_solutions:
            assert is_solution(lift.system, lift.extend_solution(s))

    def test_extend_rejects_non_solution(self, two_solution_f2):
        lift = lift_f2_to_c(two_solution_f2)
        with pytest.raises(ValueError):
            lift.extend_solution(Assignment((0, 0)))

    def test_rejects_empty_polynomial(self):
        with pytest.raises(ValueError):
            lift_f2_to_c(PolySystem((poly([], 2, FieldTag.F2),), 2, FieldTag.F2))

    def test_rejects_c_input(self, unique_c_system):
        with pytest.raises(ValueError):
            lift_f2_to_c(unique_c_system)


class TestIsolation:
    def test_same_seed_same_rows(self, two_solution_f2):
        lift = lift_f2_to_c(two_solution_f2)
        first = vv_augment(lift.system, 1, seed=5, x_vars=2)
        second = vv_augment(lift.system, 1, seed=5, x_vars=2)
        assert first.affine_rows == second.affine_rows
        assert first.combined == second.combined
        assert len(first.affine_rows) == 3

    def test_k_out_of_range(self, two_solution_f2):
        lift = lift_f2_to_c(two_solution_f2)
        with pytest.raises(ValueError):
            vv_augment(lift.system, 3, seed=0, x_vars=2)
        with pytest.raises(ValueError):
            vv_augment(lift.system, -1, seed=0, x_vars=2)

    @pytest.mark.parametrize("seed", range(6))
    def test_surviving_matches_brute_force(self, seed):
        sys_f2 = random_quadratic_system(3, 2, seed, FieldTag.F2, max_terms=3)
        lift = lift_f2_to_c(sys_f2)
        attempt = vv_augment(lift.system, 1, seed=100 + seed, x_vars=3)
        expected = sorted(s.bits for s in attempt.surviving(brute_force_solutions(sys_f2)))
        found = sorted(s.bits[:3] for s in brute_force_solutions(attempt.combined))
        assert found == expected

    def test_combined_keeps_field_equations(self, two_solution_f2):
        lift = lift_f2_to_c(two_solution_f2)
        attempt = vv_augment(lift.system, 0, seed=1, x_vars=2)
        assert attempt.combined.includes_field_equations
        assert attempt.combined.num_vars == lift.num_vars + sum(attempt.lifted.slack_bits)

    def test_schedule_base_case(self):
        assert isolation_schedule(0, 0.5) == [(0, 6)]

    def test_schedule_shape(self):
        schedule = isolation_schedule(4, 0.1)
        assert [k for k, _ in schedule] == [0, 1, 2, 3, 4]
        assert all(trials == ceil(8 * log(5 / 0.1)) for _, trials in schedule)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_schedule_length_bound(self, n):
        total = sum(trials for _, trials in isolation_schedule(n, 0.1))
        assert total <= schedule_length_bound(n, 0.1)

    @pytest.mark.parametrize("eps", [0, 1, -0.5, 2])
    def test_schedule_rejects_eps(self, eps):
        with pytest.raises(ValueError):
            isolation_schedule(3, eps)


class TestNormalize:
    def test_pivot_and_constants(self, unique_c_system):
        normalized = normalize_constants(unique_c_system)
        assert normalized[0].constant_term == -1
        assert all(p.constant_term == 0 for p in normalized.polys[1:])
        assert brute_force_solutions(normalized) == brute_force_solutions(unique_c_system)

    def test_pivot_is_sparsest_then_lowest_index(self):
        system = PolySystem((
            poly([((1, 0), 1), ((0, 1), 1), ((0, 0), 1)], 2),
            poly([((1, 0), 1), ((0, 0), 2)], 2),
            poly([((0, 1), 1), ((0, 0), 3)], 2),
        ), 2)
        assert constant_pivot(system) == 1
        normalized = normalize_constants(system)
        assert normalized[0] == system[1].scale(Fraction(-1, 2))

    def test_no_constants_gives_sentinel(self):
        system = PolySystem((poly([((1, 1), 1), ((1, 0), -1)], 2),), 2)
        result = normalize_constants(system)
        assert isinstance(result, ZeroSolutionSentinel)
        assert result.solution == Assignment((0, 0))
        assert is_solution(system, result.solution)

    def test_rejects_f2(self, two_solution_f2):
        with pytest.raises(ValueError):
            normalize_constants(two_solution_f2)

    @pytest.mark.parametrize("seed", range(24))
    def test_preserves_solutions_and_sparsity(self, seed):
        n = 2 + seed % 7
        rng = np.random.default_rng(seed)
        if seed % 2:
            a = Assignment(tuple(int(b) for b in rng.integers(0, 2, size=n)))
            system = planted_system(a, n + 1, seed)
        else:
            system = random_quadratic_system(n, n + 1, seed)
        result = normalize_constants(system)
        if isinstance(result, ZeroSolutionSentinel):
            assert all(p.constant_term == 0 for p in system)
            return
        assert brute_force_solutions(result) == brute_force_solutions(system)
        assert [p.constant_term for p in result] == [-1] + [0] * (len(system) - 1)
        assert sum(p.sparsity for p in result) <= 2 * sum(p.sparsity for p in system)
        pivot = constant_pivot(system)
        others = [p for i, p in enumerate(system) if i != pivot]
        for before, after in zip(others, result.polys[1:]):
            assert after.sparsity <= 2 * before.sparsity


def _free_variable_system(n, fixed):
    """x_i + 1 for i < fixed over F2: 2^(n - fixed) solutions"""
    polys = tuple(poly([(Monomial.variable(i, n), 1), (Monomial.one(n), 1)], n, FieldTag.F2) for i in range(fixed))
    return PolySystem(polys, n, FieldTag.F2)


def _isolation_rate(n, fixed, trials):
    sys_f2 = _free_variable_system(n, fixed)
    solutions = brute_force_solutions(sys_f2)
    k = len(solutions).bit_length() - 1
    lift = lift_f2_to_c(sys_f2)
    isolated = sum(len(vv_augment(lift.system, k, seed, x_vars=n).surviving(solutions)) == 1
                   for seed in range(trials))
    return len(solutions), isolated / trials


class TestIsolationRate:
    @pytest.mark.parametrize("n,fixed,count", [(3, 2, 2), (3, 1, 4), (4, 1, 8)])
    def test_isolates_with_constant_probability(self, n, fixed, count):
        trials = 300
        found, rate = _isolation_rate(n, fixed, trials)
        assert found == count
        assert rate >= 1 / 8 - 3 * sqrt(7 / 64 / trials)

    @pytest.mark.slow
    @pytest.mark.parametrize("n,fixed", [(3, 2), (4, 2), (5, 2), (6, 3)])
    def test_isolation_rate_full(self, n, fixed):
        trials = 1000
        _, rate = _isolation_rate(n, fixed, trials)
        assert rate >= 1 / 8 - 3 * sqrt(7 / 64 / trials)
