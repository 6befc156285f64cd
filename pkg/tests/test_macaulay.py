from fractions import Fraction
from itertools import product

import pytest

from errors import CapacityExceededError, OracleRangeError
from factories import guarded_unique_system, poly
from models.matrix import DegreeKind, Flavor, MacaulayDescriptor, RowLabel, multilinear_monomials
from models.polynomial import Monomial, Polynomial, PolySystem
from models.reports import ReportHeader
from services.macaulay_service import (
    block_reduce_check, boolean_solution_vector, build_augmented_boolean_macaulay, build_boolean_macaulay,
    build_macaulay, entry_col_oracle, entry_row_oracle, entry_value_oracle, format_matrix, multilinearize,
    solution_correspondence_check,
)
from services.polysys_service import brute_force_solutions, random_quadratic_system
from services.reduce_service import normalize_constants


class TestDegreeKind:
    def test_column_counts(self):
        assert DegreeKind.max(3).column_count(2) == 15
        assert len(DegreeKind.max(3).monomials(2)) == 16
        assert DegreeKind.total(2).column_count(2) == 5
        assert len(DegreeKind.total(2).monomials(2)) == 6

    def test_canonical_order_starts_with_constant(self):
        monos = DegreeKind.max(2).monomials(2)
        assert monos[0].is_constant
        assert [m.degree for m in monos] == sorted(m.degree for m in monos)

    def test_multilinear_monomials(self):
        monos = multilinear_monomials(3, 2)
        assert len(monos) == 6
        assert all(m.is_multilinear and 1 <= m.degree <= 2 for m in monos)

    def test_rejects_zero_degree(self):
        with pytest.raises(ValueError):
            DegreeKind.max(0)


class TestPlainMacaulay:
    def test_shape_and_b(self, unique_c_system):
        ms = build_macaulay(unique_c_system.with_field_equations(), DegreeKind.max(3))
        assert ms.shape[1] == 15
        assert ms.b  # the constant terms move to the right-hand side
        assert all(not m.is_constant for m in ms.matrix.col_labels)

    @pytest.mark.parametrize("kind", [DegreeKind.max(3), DegreeKind.max(4), DegreeKind.total(4)])
    def test_solution_vectors_solve_every_row(self, unique_c_system, kind):
        system = unique_c_system.with_field_equations()
        ms = build_macaulay(system, kind)
        for a in brute_force_solutions(system):
            assert ms.is_solution(boolean_solution_vector(a, ms.matrix.col_labels))

    def test_degree_too_high(self):
        system = PolySystem((poly([((4, 0), 1)], 2),), 2)
        with pytest.raises(ValueError):
            build_macaulay(system, DegreeKind.max(3))

    def test_capacity(self, unique_c_system):
        with pytest.raises(CapacityExceededError):
            build_macaulay(unique_c_system, DegreeKind.max(3), cap=10)


class TestBooleanMacaulay:
    def test_multilinearize(self):
        p = poly([((3, 1), 1), ((1, 1), -1), ((2, 0), 1)], 2)
        assert multilinearize(p) == poly([((1, 0), 1)], 2)

    def test_multilinearize_is_idempotent_and_linear(self):
        p = poly([((2, 1, 0), 3), ((1, 1, 0), -1), ((0, 3, 1), 2), ((0, 0, 0), 1)], 3)
        q = poly([((1, 2, 2), 1), ((0, 1, 1), 4), ((1, 0, 0), -2)], 3)
        assert multilinearize(multilinearize(p)) == multilinearize(p)
        combined = Polynomial.linear_combination([p, q], [2, Fraction(-1, 3)])
        assert multilinearize(combined) == Polynomial.linear_combination(
            [multilinearize(p), multilinearize(q)], [2, Fraction(-1, 3)])

    def test_multilinearize_keeps_boolean_values(self):
        p = poly([((2, 1, 0), 3), ((1, 1, 0), -1), ((0, 3, 1), 2), ((0, 0, 0), 1)], 3)
        for bits in product((0, 1), repeat=3):
            assert _value(multilinearize(p), bits) == _value(p, bits)

    def test_field_equations_are_dropped(self, unique_c_system):
        with_fields = build_boolean_macaulay(unique_c_system.with_field_equations())
        without = build_boolean_macaulay(unique_c_system)
        assert with_fields.shape == without.shape

    def test_shape(self, unique_c_system):
        ms = build_boolean_macaulay(unique_c_system)
        # 3 polynomials times 4 multilinear multipliers, 3 non-constant columns
        assert ms.shape == (12, 3)

    def test_dedup_drops_zero_rows(self, unique_c_system):
        plain = build_boolean_macaulay(unique_c_system)
        dedup = build_boolean_macaulay(unique_c_system, dedup=True)
        assert dedup.shape[0] < plain.shape[0]

    def test_capacity(self):
        with pytest.raises(CapacityExceededError):
            build_boolean_macaulay(PolySystem((), 15))

    @pytest.mark.parametrize("seed", range(10))
    def test_sparsity_bounds(self, seed):
        n = 3 + seed % 4
        system = random_quadratic_system(n, 3, seed)
        aug = build_augmented_boolean_macaulay(system)
        t = system.sparsity
        assert aug.max_row_sparsity <= t
        assert aug.max_column_sparsity <= 4 * len(system) * t

    @pytest.mark.parametrize("bits,seed", [((1, 0, 1), 0), ((0, 1, 1, 0), 1), ((1, 1, 0, 1, 0), 2)])
    def test_unique_solution_correspondence(self, bits, seed):
        system, a = guarded_unique_system(bits, seed)
        verdict = solution_correspondence_check(system)
        assert verdict.status == "unique"
        assert verdict.ok
        assert verdict.recovered == str(a)
        assert verdict.recovered_weight == 2 ** a.weight - 1

    def test_rank_deficient_correspondence(self):
        system = PolySystem((poly([((1, 0), 1), ((0, 1), -1)], 2),), 2)
        verdict = solution_correspondence_check(system)
        assert verdict.status == "rank_deficient"
        assert verdict.backward_ok

    def test_inconsistent_correspondence(self):
        system = PolySystem((poly([((1, 0), 1), ((0, 0), 1)], 2),), 2)
        verdict = solution_correspondence_check(system)
        assert verdict.brute_force == []
        assert verdict.status == "inconsistent"
        assert verdict.ok

    def test_normalized_system_has_unit_b(self):
        system, _ = guarded_unique_system((1, 0, 1), 3)
        ms = build_boolean_macaulay(normalize_constants(system))
        assert ms.b_norm_squared() == 1


def _value(p, bits):
    return sum(c * m.evaluate(bits) for m, c in p.terms)


def _row_residuals(ms, bits):
    """M y(a) - b, row by row"""
    b = ms.b_dense()
    values = [m.evaluate(bits) for m in ms.matrix.col_labels]
    return [sum((v * values[c] for c, v in row), Fraction(0)) - b[r] for r, row in enumerate(ms.matrix.rows)]


class TestConstructionIdentity:
    @pytest.mark.parametrize("seed", range(6))
    def test_boolean_rows_evaluate_products(self, seed):
        system = random_quadratic_system(3, 3, seed).with_field_equations()
        ms = build_boolean_macaulay(system)
        core = ms.descriptor.system
        for bits in product((0, 1), repeat=3):
            residuals = _row_residuals(ms, bits)
            for label, residual in zip(ms.matrix.row_labels, residuals):
                product_poly = multilinearize(core[label.poly_index].mul_monomial(label.multiplier))
                assert residual == _value(product_poly, bits)

    @pytest.mark.parametrize("seed", range(4))
    def test_plain_rows_evaluate_products(self, seed):
        system = random_quadratic_system(2, 2, seed).with_field_equations()
        ms = build_macaulay(system, DegreeKind.max(3))
        for bits in product((0, 1), repeat=2):
            residuals = _row_residuals(ms, bits)
            for label, residual in zip(ms.matrix.row_labels, residuals):
                assert residual == _value(system[label.poly_index].mul_monomial(label.multiplier), bits)


class TestBlockReduction:
    @pytest.mark.parametrize("n,d", [(1, 3), (2, 4), (3, 5)])
    def test_empty_system_identity_block(self, n, d):
        verdict = block_reduce_check(PolySystem((), n), d)
        assert verdict.identity_dim == (d + 1) ** n - 2 ** n
        assert verdict.row_space_equal

    @pytest.mark.parametrize("seed", range(10))
    def test_row_space_equal(self, seed):
        n = 1 + seed % 3
        verdict = block_reduce_check(random_quadratic_system(n, 2, seed), n + 2)
        assert verdict.row_space_equal

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(100))
    def test_row_space_equal_sweep(self, seed):
        n = 1 + seed % 3
        verdict = block_reduce_check(random_quadratic_system(n, 1 + seed % 3, seed), n + 2)
        assert verdict.row_space_equal

    def test_requires_field_degree(self):
        with pytest.raises(ValueError):
            block_reduce_check(PolySystem((), 2), 1)


def _oracle_agrees(ms):
    matrix = ms.matrix
    desc = ms.descriptor
    for r, label in enumerate(matrix.row_labels):
        row = matrix.rows[r]
        for k, (c, v) in enumerate(row):
            assert entry_col_oracle(desc, label, k) == matrix.col_labels[c]
        with pytest.raises(OracleRangeError):
            entry_col_oracle(desc, label, len(row))
        for c, col in enumerate(matrix.col_labels):
            assert entry_value_oracle(desc, label, col) == matrix.entry(r, c)
    for c, col in enumerate(matrix.col_labels):
        hits = matrix.columns[c]
        for k, (r, _) in enumerate(hits):
            assert entry_row_oracle(desc, col, k) == matrix.row_labels[r]
        with pytest.raises(OracleRangeError):
            entry_row_oracle(desc, col, len(hits))


class TestOracles:
    @pytest.mark.parametrize("seed", range(4))
    def test_boolean_oracles_match_matrix(self, seed):
        system = random_quadratic_system(3, 2, seed)
        _oracle_agrees(build_boolean_macaulay(system))

    @pytest.mark.parametrize("seed", range(3))
    def test_boolean_oracles_lower_degree(self, seed):
        system = random_quadratic_system(4, 2, seed)
        _oracle_agrees(build_boolean_macaulay(system, d=2))

    @pytest.mark.parametrize("kind", [DegreeKind.max(3), DegreeKind.total(3)])
    def test_plain_oracles_match_matrix(self, kind):
        system = random_quadratic_system(2, 2, 5).with_field_equations()
        _oracle_agrees(build_macaulay(system, kind))

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [5, 6])
    def test_boolean_oracles_full_scale(self, n):
        _oracle_agrees(build_boolean_macaulay(random_quadratic_system(n, 2, n)))

    def test_value_oracle_example(self):
        system = PolySystem((poly([((1, 0), 1), ((0, 1), 1), ((0, 0), -1)], 2),), 2)
        desc = MacaulayDescriptor(system, Flavor.BOOLEAN, DegreeKind.total(2))
        x1 = Monomial((1, 0))
        # psi(x1 * (x1 + x2 - 1)) = x1*x2
        assert entry_value_oracle(desc, RowLabel(x1, 0), x1) == 0
        assert entry_value_oracle(desc, RowLabel(x1, 0), Monomial((1, 1))) == 1
        assert entry_row_oracle(desc, x1, 0) == RowLabel(Monomial.one(2), 0)

    def test_constant_column_is_rejected(self, unique_c_system):
        desc = MacaulayDescriptor(unique_c_system, Flavor.BOOLEAN, DegreeKind.total(2))
        with pytest.raises(ValueError):
            entry_value_oracle(desc, RowLabel(Monomial.one(2), 0), Monomial.one(2))

    def test_boolean_descriptor_needs_total_degree(self, unique_c_system):
        with pytest.raises(ValueError):
            MacaulayDescriptor(unique_c_system, Flavor.BOOLEAN, DegreeKind.max(2))


class TestMatrixFile:
    def test_format(self, unique_c_system):
        ms = build_boolean_macaulay(unique_c_system)
        text = format_matrix(ms, ReportHeader(seed=3))
        lines = text.splitlines()
        assert lines[0] == "# boolean-macaulay-toolkit 1.0.0"
        assert "flavor boolean" in lines
        assert "dims 12 3" in lines
        entries = [line for line in lines if line.startswith("entry ")]
        assert len(entries) == ms.matrix.nnz
        b_lines = [line.split() for line in lines if line.startswith("b ")]
        assert [(int(r), Fraction(int(p), int(q))) for _, r, p, q in b_lines] == list(ms.b)
