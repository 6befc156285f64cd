"""
Macaulay-side records: degree kinds, row labels, sparse rational matrices with
labeled rows and columns, assembled Macaulay linear systems and the descriptor
the entry oracles work from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import comb
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from models.polynomial import Monomial, Polynomial, PolySystem


class DegreeMode(str, Enum):
    MAX = "max"
    TOTAL = "total"


class Flavor(str, Enum):
    PLAIN = "plain"
    BOOLEAN = "boolean"


@dataclass(frozen=True, slots=True)
class DegreeKind:
    mode: DegreeMode
    d: int

    def __post_init__(self):
        object.__setattr__(self, "mode", DegreeMode(self.mode))
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"Degree bound must be a positive integer, got {self.d}")

    @classmethod
    def max(cls, d: int) -> "DegreeKind":
        return cls(DegreeMode.MAX, d)

    @classmethod
    def total(cls, d: int) -> "DegreeKind":
        return cls(DegreeMode.TOTAL, d)

    def degree_of(self, mono: Monomial) -> int:
        return mono.max_degree if self.mode is DegreeMode.MAX else mono.degree

    def admits(self, mono: Monomial) -> bool:
        return self.degree_of(mono) <= self.d

    def degree_of_poly(self, p: Polynomial) -> int:
        return max((self.degree_of(m) for m in p.monomials), default=0)

    def column_count(self, num_vars: int) -> int:
        """Nontrivial monomials of degree at most d."""
        if self.mode is DegreeMode.MAX:
            return (self.d + 1) ** num_vars - 1
        return comb(num_vars + self.d, self.d) - 1

    def monomials(self, num_vars: int) -> List[Monomial]:
        """All monomials of degree at most d (constant included), canonical order."""
        if self.mode is DegreeMode.MAX:
            monos = [Monomial(e) for e in product(range(self.d + 1), repeat=num_vars)]
        else:
            monos = [Monomial(e) for e in _bounded_compositions(num_vars, self.d)]
        monos.sort(key=lambda m: m.sort_key)
        return monos

    def __str__(self) -> str:
        return f"{self.mode.value}({self.d})"


def _bounded_compositions(num_vars: int, budget: int) -> Iterator[Tuple[int, ...]]:
    if num_vars == 0:
        yield ()
        return
    for head in range(budget + 1):
        for tail in _bounded_compositions(num_vars - 1, budget - head):
            yield (head,) + tail


@dataclass(frozen=True, slots=True)
class RowLabel:
    multiplier: Monomial
    poly_index: int

    def __str__(self) -> str:
        return f"({self.multiplier}, f{self.poly_index + 1})"


SparseRow = Tuple[Tuple[int, Fraction], ...]


@dataclass(frozen=True)
class LabeledSparseMatrix:
    """Row-major sparse matrix of exact rationals; each row stores (column, value) sorted by column."""

    row_labels: Tuple[RowLabel, ...]
    col_labels: Tuple[Monomial, ...]
    rows: Tuple[SparseRow, ...]

    def __post_init__(self):
        if len(self.row_labels) != len(self.rows):
            raise ValueError("Every stored row needs a label")

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.rows), len(self.col_labels))

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    @cached_property
    def col_index(self) -> Dict[Monomial, int]:
        return {m: j for j, m in enumerate(self.col_labels)}

    @cached_property
    def columns(self) -> Tuple[Tuple[Tuple[int, Fraction], ...], ...]:
        """Column-major view: for each column the (row, value) pairs in row order."""
        cols: List[List[Tuple[int, Fraction]]] = [[] for _ in self.col_labels]
        for r, row in enumerate(self.rows):
            for c, v in row:
                cols[c].append((r, v))
        return tuple(tuple(c) for c in cols)

    def entry(self, row: int, col: int) -> Fraction:
        for c, v in self.rows[row]:
            if c == col:
                return v
        return Fraction(0)

    def column_sparsities(self) -> List[int]:
        return [len(c) for c in self.columns]

    @property
    def max_row_sparsity(self) -> int:
        return max((len(r) for r in self.rows), default=0)

    @property
    def max_column_sparsity(self) -> int:
        return max(self.column_sparsities(), default=0)

    def matvec(self, y: Sequence[Fraction]) -> List[Fraction]:
        if len(y) != len(self.col_labels):
            raise ValueError(f"Vector of length {len(y)} against {len(self.col_labels)} columns")
        return [sum((v * y[c] for c, v in row), Fraction(0)) for row in self.rows]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.shape, dtype=np.float64)
        for r, row in enumerate(self.rows):
            for c, v in row:
                dense[r, c] = float(v)
        return dense


@dataclass(frozen=True)
class MacaulayDescriptor:
    """What the entry oracles need: the system, the flavor and the degree bound."""

    system: PolySystem
    flavor: Flavor
    kind: DegreeKind

    def __post_init__(self):
        object.__setattr__(self, "flavor", Flavor(self.flavor))
        if self.flavor is Flavor.BOOLEAN and self.kind.mode is not DegreeMode.TOTAL:
            raise ValueError("Boolean Macaulay matrices are bounded by total degree")


@dataclass(frozen=True)
class MacaulaySystem:
    matrix: LabeledSparseMatrix
    b: Tuple[Tuple[int, Fraction], ...]
    descriptor: MacaulayDescriptor

    @property
    def flavor(self) -> Flavor:
        return self.descriptor.flavor

    @property
    def kind(self) -> DegreeKind:
        return self.descriptor.kind

    @property
    def num_vars(self) -> int:
        return self.descriptor.system.num_vars

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    def b_dense(self) -> List[Fraction]:
        out = [Fraction(0)] * self.matrix.shape[0]
        for r, v in self.b:
            out[r] = v
        return out

    def b_norm_squared(self) -> Fraction:
        return sum((v * v for _, v in self.b), Fraction(0))

    def residual(self, y: Sequence[Fraction]) -> List[Fraction]:
        """M y - b, exactly."""
        b = self.b_dense()
        return [lhs - rhs for lhs, rhs in zip(self.matrix.matvec(y), b)]

    def is_solution(self, y: Sequence[Fraction]) -> bool:
        return not any(self.residual(y))


@dataclass(frozen=True)
class MonomialSolutionVector:
    """y^(a) over the non-constant monomials admitted by a degree kind."""

    assignment: Tuple[int, ...]
    kind: DegreeKind
    coords: Dict[Monomial, int] = field(compare=False)

    @property
    def num_vars(self) -> int:
        return len(self.assignment)

    @property
    def nonzero_count(self) -> int:
        return sum(1 for v in self.coords.values() if v)

    @property
    def norm_squared(self) -> int:
        # 0/1 coordinates
        return self.nonzero_count


@dataclass(frozen=True)
class GramMatrix:
    n: int
    kind: DegreeKind
    entries: Tuple[Tuple[Fraction, ...], ...]

    def __getitem__(self, ij: Tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i - 1][j - 1]

    def minor(self, h: int) -> List[List[Fraction]]:
        """Bottom-right (n-h+1) x (n-h+1) block, indices h..n."""
        if not 1 <= h <= self.n:
            raise ValueError(f"h must lie in 1..{self.n}, got {h}")
        return [list(row[h - 1:]) for row in self.entries[h - 1:]]

    def is_symmetric(self) -> bool:
        return all(self.entries[i][j] == self.entries[j][i]
                   for i in range(self.n) for j in range(i + 1, self.n))


def multilinear_monomials(num_vars: int, d: int, with_constant: bool = False) -> List[Monomial]:
    """Multilinear monomials of total degree at most d, canonical order."""
    # For 0/1 exponents the canonical order is (popcount, mask)
    masks = [mask for mask in range(0 if with_constant else 1, 1 << num_vars)
             if bin(mask).count("1") <= d]
    masks.sort(key=lambda mask: (bin(mask).count("1"), mask))
    return [Monomial.from_mask(mask, num_vars) for mask in masks]
