"""
Macaulay and Boolean Macaulay linear systems.

Rows are labeled (multiplier, polynomial index) and ordered by polynomial index,
then multiplier in the canonical monomial order. Columns are the monomials admitted
by the degree bound in the same order. The constant column is split off as
b = -constant coefficient.
"""

import logging
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from config import Config
from errors import (
    CapacityExceededError, InconsistentSystemError, NonUniqueSolutionError, OracleRangeError,
)
from models.matrix import (
    DegreeKind, DegreeMode, Flavor, LabeledSparseMatrix, MacaulayDescriptor, MacaulaySystem,
    RowLabel, multilinear_monomials,
)
from models.polynomial import Assignment, FieldTag, Monomial, Polynomial, PolySystem
from models.reports import BlockReduceVerdict, CorrespondenceVerdict, ReportHeader, fraction_str
from services.exact_linalg import exact_least_squares, rank_sparse
from services.polysys_service import brute_force_solutions

logger = logging.getLogger(__name__)


def multilinearize(p: Polynomial) -> Polynomial:
    """psi: clamp exponents to 1, summing colliding coefficients"""
    return p.map_monomials(Monomial.multilinear)


def _check_columns(columns: int, cap: Optional[int]) -> None:
    limit = Config.capacity_cap("columns", cap)
    if columns > limit:
        raise CapacityExceededError("Macaulay matrix columns", columns, limit)


def _check_boolean_vars(num_vars: int) -> None:
    limit = Config.capacity_cap("boolean_vars")
    if num_vars > limit:
        raise CapacityExceededError("Boolean Macaulay matrix variables", num_vars, limit)


# -- plain Macaulay -----------------------------------------------------------

def plain_multipliers(p: Polynomial, kind: DegreeKind) -> List[Monomial]:
    """Multipliers m with deg(m p) <= d under kind, canonical order"""
    n = p.num_vars
    if kind.mode is DegreeMode.MAX:
        var_degrees = p.variable_degrees()
        ranges = [range(kind.d - var_degrees[i] + 1) for i in range(n)]
        monos = [Monomial(e) for e in product(*ranges)]
        monos.sort(key=lambda m: m.sort_key)
        return monos
    budget = kind.d - p.total_degree
    if budget < 0:
        return []
    return DegreeKind.total(budget).monomials(n) if budget >= 1 else [Monomial.one(n)]


def _check_admitted(system: PolySystem, kind: DegreeKind) -> None:
    for i, p in enumerate(system):
        if kind.degree_of_poly(p) > kind.d:
            raise ValueError(f"Polynomial {i} has {kind.mode.value} degree {kind.degree_of_poly(p)} > d = {kind.d}")


def build_augmented_macaulay(system: PolySystem, kind: DegreeKind,
                             cap: Optional[int] = None) -> LabeledSparseMatrix:
    """Macaulay matrix with the constant column kept (it is the first column)"""
    if system.field is not FieldTag.C:
        raise ValueError("Macaulay matrices are built from C-tagged systems")
    _check_admitted(system, kind)
    _check_columns(kind.column_count(system.num_vars), cap)

    columns = kind.monomials(system.num_vars)
    index = {m: j for j, m in enumerate(columns)}
    labels: List[RowLabel] = []
    rows: List[Tuple[Tuple[int, Fraction], ...]] = []
    for i, p in enumerate(system):
        for m in plain_multipliers(p, kind):
            labels.append(RowLabel(m, i))
            rows.append(tuple(sorted((index[m * t], c) for t, c in p.terms)))

    logger.info("Plain Macaulay matrix %s: %d rows x %d columns", kind, len(rows), len(columns))
    return LabeledSparseMatrix(tuple(labels), tuple(columns), tuple(rows))


def split_augmented(augmented: LabeledSparseMatrix, descriptor: MacaulayDescriptor) -> MacaulaySystem:
    """Move the constant column to the right-hand side as b = -column"""
    const = next((j for j, m in enumerate(augmented.col_labels) if m.is_constant), None)
    if const is None:
        raise ValueError("Augmented matrix has no constant column")

    def shift(c: int) -> int:
        return c - 1 if c > const else c

    rows = []
    b = []
    for r, row in enumerate(augmented.rows):
        kept = []
        for c, v in row:
            if c == const:
                b.append((r, -v))
            else:
                kept.append((shift(c), v))
        rows.append(tuple(kept))
    cols = augmented.col_labels[:const] + augmented.col_labels[const + 1:]
    matrix = LabeledSparseMatrix(augmented.row_labels, cols, tuple(rows))
    return MacaulaySystem(matrix=matrix, b=tuple(b), descriptor=descriptor)


def build_macaulay(system: PolySystem, kind: DegreeKind, cap: Optional[int] = None) -> MacaulaySystem:
    augmented = build_augmented_macaulay(system, kind, cap)
    return split_augmented(augmented, MacaulayDescriptor(system, Flavor.PLAIN, kind))


# -- Boolean Macaulay ---------------------------------------------------------

def _mask_terms(p: Polynomial) -> List[Tuple[int, Fraction]]:
    return [(t.multilinear().mask, c) for t, c in p.terms]


def _boolean_row(terms: Sequence[Tuple[int, Fraction]], multiplier_mask: int) -> Dict[int, Fraction]:
    """psi(m f) as mask -> coefficient, zeros dropped"""
    acc: Dict[int, Fraction] = {}
    for mask, c in terms:
        key = mask | multiplier_mask
        acc[key] = acc.get(key, Fraction(0)) + c
    return {k: v for k, v in acc.items() if v}


def _row_degree(row: Dict[int, Fraction]) -> int:
    return max((bin(k).count("1") for k in row), default=0)


def build_augmented_boolean_macaulay(system: PolySystem, d: Optional[int] = None,
                                     cap: Optional[int] = None, dedup: bool = False) -> LabeledSparseMatrix:
    """
    Boolean Macaulay matrix with the constant column kept.

    Rows run over every multilinear multiplier m with deg psi(m f) <= d; zero and
    duplicate rows are kept unless dedup is set.
    """
    if system.field is not FieldTag.C:
        raise ValueError("Boolean Macaulay matrices are built from C-tagged systems")
    n = system.num_vars
    d = n if d is None else d
    _check_boolean_vars(n)
    columns = multilinear_monomials(n, d, with_constant=True)
    _check_columns(len(columns) - 1, cap)

    index = {m.mask: j for j, m in enumerate(columns)}
    multipliers = multilinear_monomials(n, n, with_constant=True)
    labels: List[RowLabel] = []
    rows: List[Tuple[Tuple[int, Fraction], ...]] = []
    seen = set()
    for i, p in enumerate(system):
        terms = _mask_terms(p)
        for m in multipliers:
            row = _boolean_row(terms, m.mask)
            if _row_degree(row) > d:
                continue
            entries = tuple(sorted((index[k], v) for k, v in row.items()))
            if dedup:
                if not entries or entries in seen:
                    continue
                seen.add(entries)
            labels.append(RowLabel(m, i))
            rows.append(entries)

    logger.info("Boolean Macaulay matrix (d=%d): %d rows x %d columns", d, len(rows), len(columns))
    return LabeledSparseMatrix(tuple(labels), tuple(columns), tuple(rows))


def build_boolean_macaulay(system: PolySystem, d: Optional[int] = None, cap: Optional[int] = None,
                           dedup: bool = False) -> MacaulaySystem:
    """Boolean Macaulay system of F1; field equations in the input are dropped (they are implicit)"""
    core = system.core()
    if len(core) != len(system):
        logger.debug("Dropped %d field equations before the Boolean construction", len(system) - len(core))
    d = core.num_vars if d is None else d
    augmented = build_augmented_boolean_macaulay(core, d, cap, dedup)
    return split_augmented(augmented, MacaulayDescriptor(core, Flavor.BOOLEAN, DegreeKind.total(d)))


# -- entry oracles ------------------------------------------------------------

def _row_poly(descriptor: MacaulayDescriptor, row: RowLabel) -> Polynomial:
    system = descriptor.system
    if not 0 <= row.poly_index < len(system):
        raise ValueError(f"Row label refers to polynomial {row.poly_index}, system has {len(system)}")
    p = system[row.poly_index]
    if row.multiplier.num_vars != system.num_vars:
        raise ValueError("Row multiplier has the wrong number of variables")
    return p


def _row_admitted(descriptor: MacaulayDescriptor, row: RowLabel, p: Polynomial) -> bool:
    kind = descriptor.kind
    if descriptor.flavor is Flavor.PLAIN:
        return all(kind.admits(row.multiplier * t) for t in p.monomials)
    if not row.multiplier.is_multilinear:
        return False
    return _row_degree(_boolean_row(_mask_terms(p), row.multiplier.mask)) <= kind.d


def _row_entries(descriptor: MacaulayDescriptor, row: RowLabel) -> List[Tuple[Monomial, Fraction]]:
    """Nonzero non-constant entries of one row, canonical column order"""
    p = _row_poly(descriptor, row)
    if not _row_admitted(descriptor, row, p):
        raise ValueError(f"{row} is not a row of this {descriptor.flavor.value} Macaulay matrix")
    n = descriptor.system.num_vars
    if descriptor.flavor is Flavor.PLAIN:
        entries = [(row.multiplier * t, c) for t, c in p.terms]
    else:
        entries = [(Monomial.from_mask(k, n), v)
                   for k, v in _boolean_row(_mask_terms(p), row.multiplier.mask).items()]
    entries = [(m, c) for m, c in entries if not m.is_constant]
    entries.sort(key=lambda item: item[0].sort_key)
    return entries


def entry_col_oracle(descriptor: MacaulayDescriptor, row: RowLabel, k: int) -> Monomial:
    """Column of the k-th (0-based) nonzero entry of a row"""
    entries = _row_entries(descriptor, row)
    if not 0 <= k < len(entries):
        raise OracleRangeError(f"k = {k} out of range: {row} has {len(entries)} nonzero entries")
    return entries[k][0]


def entry_value_oracle(descriptor: MacaulayDescriptor, row: RowLabel, col: Monomial) -> Fraction:
    """Exact entry at (row, col)"""
    if col.is_constant:
        raise ValueError("The constant monomial is not a column; its values live in b")
    p = _row_poly(descriptor, row)
    if not _row_admitted(descriptor, row, p):
        raise ValueError(f"{row} is not a row of this {descriptor.flavor.value} Macaulay matrix")
    if descriptor.flavor is Flavor.PLAIN:
        if not row.multiplier.divides(col):
            return Fraction(0)
        return p.coefficient(col / row.multiplier)
    if not col.is_multilinear:
        return Fraction(0)
    target = col.mask
    mmask = row.multiplier.mask
    return sum((c for mask, c in _mask_terms(p) if mask | mmask == target), Fraction(0))


def _column_candidates(descriptor: MacaulayDescriptor, col: Monomial) -> Iterable[RowLabel]:
    n = descriptor.system.num_vars
    for i, p in enumerate(descriptor.system):
        seen = set()
        for t in p.monomials:
            if descriptor.flavor is Flavor.PLAIN:
                if t.divides(col):
                    seen.add(col / t)
                continue
            tmask = t.multilinear().mask
            if tmask & ~col.mask:
                continue
            rest = col.mask & ~tmask
            # m = (col \ supp t) united with any subset D of supp t
            sub = tmask
            while True:
                seen.add(Monomial.from_mask(rest | sub, n))
                if sub == 0:
                    break
                sub = (sub - 1) & tmask
        for m in sorted(seen, key=lambda mono: mono.sort_key):
            yield RowLabel(m, i)


def entry_row_oracle(descriptor: MacaulayDescriptor, col: Monomial, k: int) -> RowLabel:
    """Row of the k-th (0-based) nonzero entry of a column, in row order"""
    if col.is_constant:
        raise ValueError("The constant monomial is not a column; its values live in b")
    if not descriptor.kind.admits(col) or (descriptor.flavor is Flavor.BOOLEAN and not col.is_multilinear):
        raise ValueError(f"{col} is not a column of this matrix")
    hits = []
    for label in _column_candidates(descriptor, col):
        p = descriptor.system[label.poly_index]
        if _row_admitted(descriptor, label, p) and entry_value_oracle(descriptor, label, col) != 0:
            hits.append(label)
    if not 0 <= k < len(hits):
        raise OracleRangeError(f"k = {k} out of range: column {col} has {len(hits)} nonzero entries")
    return hits[k]


# -- exact checks -------------------------------------------------------------

def _embed_rows(matrix: LabeledSparseMatrix, index: Dict[Monomial, int]) -> List[List[Tuple[int, Fraction]]]:
    return [[(index[matrix.col_labels[c]], v) for c, v in row] for row in matrix.rows]


def field_reduction_rows(num_vars: int, d: int) -> List[Tuple[Monomial, Monomial]]:
    """(X^a, psi(X^a)) for every non-multilinear a with max degree <= d"""
    kind = DegreeKind.max(d)
    return [(m, m.multilinear()) for m in kind.monomials(num_vars) if not m.is_multilinear]


def block_reduce_check(system: PolySystem, d: int, cap: Optional[int] = None) -> BlockReduceVerdict:
    """
    Compare the row space of the plain Macaulay matrix of F1 u F2 at max degree d with
    the block matrix [[0, B], [I, B2]] built from the Boolean Macaulay matrix B of F1
    and the rows X^a - psi(X^a).
    """
    n = system.num_vars
    if n < 1:
        raise ValueError("block_reduce_check needs at least one variable")
    if d < 2:
        raise ValueError("The field equations need max degree d >= 2")
    full = system.with_field_equations()
    core = system.core()
    kind = DegreeKind.max(d)

    plain = build_augmented_macaulay(full, kind, cap)
    index = plain.col_index
    plain_rows = [list(row) for row in plain.rows]

    boolean = build_augmented_boolean_macaulay(core, n, cap) if len(core) else None
    block_rows = _embed_rows(boolean, index) if boolean is not None else []
    identity = field_reduction_rows(n, d)
    for high, low in identity:
        block_rows.append(sorted([(index[high], Fraction(1)), (index[low], Fraction(-1))]))

    columns = len(plain.col_labels)
    rank_plain = rank_sparse(plain_rows, columns)
    rank_block = rank_sparse(block_rows, columns)
    rank_stacked = rank_sparse(plain_rows + block_rows, columns)
    verdict = BlockReduceVerdict(
        num_vars=n, d=d, num_polys=len(core),
        macaulay_shape=plain.shape, block_shape=(len(block_rows), columns),
        identity_dim=len(identity),
        rank_macaulay=rank_plain, rank_block=rank_block, rank_stacked=rank_stacked,
        row_space_equal=rank_plain == rank_block == rank_stacked,
    )
    logger.info("Block reduction check n=%d d=%d: ranks %d / %d / %d", n, d, rank_plain, rank_block, rank_stacked)
    return verdict


def boolean_solution_vector(a: Assignment, columns: Sequence[Monomial]) -> List[Fraction]:
    """y^(a) restricted to the given multilinear columns"""
    return [Fraction(m.evaluate(a.bits)) for m in columns]


def solution_correspondence_check(system: PolySystem, cap: Optional[int] = None) -> CorrespondenceVerdict:
    """Cross-check the Boolean Macaulay least-squares solution against brute force, both ways"""
    solutions = brute_force_solutions(system)
    ms = build_boolean_macaulay(system, cap=cap)
    columns = ms.matrix.col_labels

    backward_ok = all(ms.is_solution(boolean_solution_vector(a, columns)) for a in solutions)

    recovered = None
    weight = None
    try:
        y = exact_least_squares(ms.matrix.rows, len(columns), ms.b)
        status = "unique"
    except NonUniqueSolutionError:
        status = "rank_deficient"
        forward_ok = True
    except InconsistentSystemError:
        status = "inconsistent"
        forward_ok = not solutions
    else:
        weight = sum(1 for v in y if v)
        position = {m: j for j, m in enumerate(columns)}
        bits = tuple(y[position[Monomial.variable(i, system.num_vars)]] for i in range(system.num_vars))
        forward_ok = all(b in (0, 1) for b in bits)
        if forward_ok:
            candidate = Assignment(tuple(int(b) for b in bits))
            recovered = str(candidate)
            forward_ok = candidate in solutions
        else:
            recovered = "(" + ",".join(fraction_str(b) for b in bits) + ")"

    return CorrespondenceVerdict(
        num_vars=system.num_vars, brute_force=[str(a) for a in solutions], status=status,
        recovered=recovered, recovered_weight=weight, forward_ok=forward_ok, backward_ok=backward_ok,
    )


# -- matrix file ----------------------------------------------------------------

def _exps(m: Monomial) -> str:
    return ",".join(str(e) for e in m.exponents)


def format_matrix(ms: MacaulaySystem, header: Optional[ReportHeader] = None) -> str:
    """Line-oriented matrix file: header keys, row/col labels, b entries, then triplets"""
    header = header or ReportHeader()
    lines = [
        f"# {header.tool} {header.version}",
        f"# config {header.model_dump_json(include={'seed', 'config'})}",
        f"flavor {ms.flavor.value}",
        f"degree_kind {ms.kind.mode.value}",
        f"degree {ms.kind.d}",
        f"dims {ms.shape[0]} {ms.shape[1]}",
    ]
    for r, label in enumerate(ms.matrix.row_labels):
        lines.append(f"row {r} {label.poly_index} {_exps(label.multiplier)}")
    for c, mono in enumerate(ms.matrix.col_labels):
        lines.append(f"col {c} {_exps(mono)}")
    for r, v in ms.b:
        lines.append(f"b {r} {v.numerator} {v.denominator}")
    for r, row in enumerate(ms.matrix.rows):
        for c, v in row:
            lines.append(f"entry {r} {c} {v.numerator} {v.denominator}")
    return "\n".join(lines) + "\n"
