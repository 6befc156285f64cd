"""
Exact rational linear algebra on top of python-flint.

Sparse rows are lists of (column, Fraction) pairs; dense matrices are lists of
Fraction rows. Conversion to fmpz_mat/fmpq_mat happens at the boundary and results
come back as Fractions.
"""

import logging
from fractions import Fraction
from math import lcm
from typing import List, Optional, Sequence, Tuple

from flint import fmpq, fmpq_mat, fmpz_mat

from errors import InconsistentSystemError, NonUniqueSolutionError, SingularMatrixError

logger = logging.getLogger(__name__)

SparseRow = Sequence[Tuple[int, Fraction]]


def to_fmpq(value: Fraction) -> fmpq:
    value = Fraction(value)
    return fmpq(value.numerator, value.denominator)


def from_fmpq(value: fmpq) -> Fraction:
    return Fraction(int(value.p), int(value.q))


def dense_to_fmpq(rows: Sequence[Sequence[Fraction]], num_cols: Optional[int] = None) -> fmpq_mat:
    num_cols = len(rows[0]) if num_cols is None and rows else (num_cols or 0)
    mat = fmpq_mat(len(rows), num_cols)
    for r, row in enumerate(rows):
        for c, v in enumerate(row):
            if v:
                mat[r, c] = to_fmpq(v)
    return mat


def sparse_to_fmpq(rows: Sequence[SparseRow], num_cols: int) -> fmpq_mat:
    mat = fmpq_mat(len(rows), num_cols)
    for r, row in enumerate(rows):
        for c, v in row:
            mat[r, c] = to_fmpq(v)
    return mat


def column_to_list(mat: fmpq_mat) -> List[Fraction]:
    return [from_fmpq(mat[i, 0]) for i in range(mat.nrows())]


def rank_sparse(rows: Sequence[SparseRow], num_cols: int) -> int:
    """Exact rank; each row is scaled to integers and ranked with fmpz_mat."""
    nonzero = [row for row in rows if row]
    if not nonzero or num_cols == 0:
        return 0
    mat = fmpz_mat(len(nonzero), num_cols)
    for r, row in enumerate(nonzero):
        scale = lcm(*(Fraction(v).denominator for _, v in row))
        for c, v in row:
            mat[r, c] = int(Fraction(v) * scale)
    return mat.rank()


def rank_dense(rows: Sequence[Sequence[Fraction]]) -> int:
    sparse = [[(c, v) for c, v in enumerate(row) if v] for row in rows]
    return rank_sparse(sparse, len(rows[0]) if rows else 0)


def basic_columns(rows: Sequence[Sequence[Fraction]]) -> List[int]:
    """Pivot columns of the RREF, a basis of the column space."""
    if not rows or not rows[0]:
        return []
    mat = dense_to_fmpq(rows)
    rref, rank = mat.rref()
    pivots = []
    for r in range(min(mat.nrows(), rank)):
        for c in range(mat.ncols()):
            if rref[r, c] != 0:
                pivots.append(c)
                break
    return pivots


def nullspace(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    """Basis of the right kernel, one vector per free column of the RREF."""
    if not rows:
        return []
    mat = dense_to_fmpq(rows)
    num_cols = mat.ncols()
    rref, rank = mat.rref()
    pivots = []
    for r in range(min(mat.nrows(), rank)):
        for c in range(num_cols):
            if rref[r, c] != 0:
                pivots.append(c)
                break
    free = [c for c in range(num_cols) if c not in set(pivots)]
    basis = []
    for f in free:
        vec = [Fraction(0)] * num_cols
        vec[f] = Fraction(1)
        for i, p in enumerate(pivots):
            vec[p] = -from_fmpq(rref[i, f])
        basis.append(vec)
    return basis


def solve_square(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> List[Fraction]:
    """Solve A x = rhs for square nonsingular A."""
    n = len(rows)
    if any(len(row) != n for row in rows) or len(rhs) != n:
        raise ValueError(f"solve_square needs an n x n system, got {n} rows and rhs of length {len(rhs)}")
    A = dense_to_fmpq(rows, n)
    B = dense_to_fmpq([[v] for v in rhs], 1)
    try:
        X = A.solve(B)
    except ZeroDivisionError:
        raise SingularMatrixError(f"{n} x {n} matrix is singular")
    return column_to_list(X)


def normal_equations(rows: Sequence[SparseRow], num_cols: int,
                     rhs: Sequence[Tuple[int, Fraction]]) -> Tuple[fmpq_mat, fmpq_mat]:
    """M^T M and M^T b accumulated row by row."""
    gram = {}
    proj = [Fraction(0)] * num_cols
    b = dict(rhs)
    for r, row in enumerate(rows):
        for i, (ci, vi) in enumerate(row):
            for cj, vj in row[i:]:
                key = (ci, cj) if ci <= cj else (cj, ci)
                gram[key] = gram.get(key, Fraction(0)) + vi * vj
            if r in b:
                proj[ci] += vi * b[r]
    A = fmpq_mat(num_cols, num_cols)
    for (i, j), v in gram.items():
        if v:
            A[i, j] = to_fmpq(v)
            A[j, i] = to_fmpq(v)
    B = fmpq_mat(num_cols, 1)
    for i, v in enumerate(proj):
        if v:
            B[i, 0] = to_fmpq(v)
    return A, B


def exact_least_squares(rows: Sequence[SparseRow], num_cols: int,
                        rhs: Sequence[Tuple[int, Fraction]]) -> List[Fraction]:
    """
    Exact solution of M y = b for a full-column-rank sparse M.

    Raises:
        NonUniqueSolutionError: M is rank deficient
        InconsistentSystemError: the least-squares residual is nonzero
    """
    extra = [r for r, _ in rhs if r >= len(rows)]
    if extra:
        raise ValueError(f"Right-hand side references rows {extra} beyond the matrix")
    A, B = normal_equations(rows, num_cols, rhs)
    logger.debug("Normal equations of size %d assembled", num_cols)
    try:
        y = column_to_list(A.solve(B))
    except ZeroDivisionError:
        raise NonUniqueSolutionError(rank=rank_sparse(rows, num_cols), columns=num_cols)

    b = dict(rhs)
    for r, row in enumerate(rows):
        value = sum((v * y[c] for c, v in row), Fraction(0))
        if value != b.get(r, 0):
            raise InconsistentSystemError(f"Least-squares residual is nonzero at row {r}")
    return y


def psd_pinv_solve(gram: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Optional[List[Fraction]]:
    """
    G^+ rhs for a symmetric PSD G, or None when rhs is outside the column space.

    The minimum-norm solution lies in col(G) = span(C) for the basic columns C, so
    it is C z with (G C) z = rhs, and G C has full column rank.
    """
    n = len(gram)
    basis = basic_columns(gram)
    if not basis:
        return None if any(rhs) else [Fraction(0)] * n
    gc = [[sum((gram[i][k] * gram[k][j] for k in range(n)), Fraction(0)) for j in basis] for i in range(n)]
    sparse = [[(c, v) for c, v in enumerate(row) if v] for row in gc]
    try:
        z = exact_least_squares(sparse, len(basis), [(i, v) for i, v in enumerate(rhs) if v])
    except InconsistentSystemError:
        return None
    x = [Fraction(0)] * n
    for zi, j in zip(z, basis):
        for i in range(n):
            x[i] += gram[i][j] * zi
    return x


def ldl_pivots(rows: Sequence[Sequence[Fraction]]) -> List[Fraction]:
    """
    Diagonal pivots of the LDL^T factorization, without row exchanges.

    Elimination stops after the first non-positive pivot, so a full-length list of
    positive pivots certifies positive definiteness.
    """
    n = len(rows)
    a = [[to_fmpq(v) for v in row] for row in rows]
    pivots: List[Fraction] = []
    for k in range(n):
        p = a[k][k]
        pivots.append(from_fmpq(p))
        if p <= 0:
            break
        for i in range(k + 1, n):
            if a[i][k] == 0:
                continue
            factor = a[i][k] / p
            for j in range(k + 1, i + 1):
                a[i][j] -= factor * a[k][j]
                a[j][i] = a[i][j]
    return pivots
