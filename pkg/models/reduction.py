"""Records produced by the F2 -> C lift, affine isolation and constant normalization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Tuple

from models.polynomial import Assignment, PolySystem


@dataclass(frozen=True, slots=True)
class VarOrigin:
    """Provenance of one lifted variable: an original x_j or the slack bit y_{i,b}."""

    index: int
    kind: str  # "x" or "slack"
    source: int  # j for x_j, polynomial index i for slack
    bit: int = 0  # weight exponent b of a slack bit

    @property
    def name(self) -> str:
        if self.kind == "x":
            return f"x{self.source + 1}"
        return f"y{self.source + 1}_{self.bit}"


@dataclass(frozen=True)
class LiftResult:
    system: PolySystem
    source: PolySystem
    var_map: Tuple[VarOrigin, ...]
    slack_bits: Tuple[int, ...]  # B_i per source polynomial

    @property
    def num_vars(self) -> int:
        return self.system.num_vars

    @property
    def num_eqs(self) -> int:
        return len(self.system)

    @property
    def num_x_vars(self) -> int:
        return self.source.num_vars

    def extend_solution(self, solution: Assignment) -> Assignment:
        """Slack bits of an F2 solution: binary digits of z_i = f_i(s) / 2 over the integers."""
        if solution.num_vars != self.num_x_vars:
            raise ValueError(f"Expected {self.num_x_vars} bits, got {solution.num_vars}")
        bits = list(solution.bits)
        for i, poly in enumerate(self.source.polys):
            value = sum(int(c) * m.evaluate(solution.bits) for m, c in poly.terms)
            if value % 2:
                raise ValueError(f"{solution} does not solve polynomial {i} over F2")
            z = value // 2
            bits.extend((z >> (b - 1)) & 1 for b in range(1, self.slack_bits[i] + 1))
        return Assignment(tuple(bits))

    def project(self, lifted: Assignment) -> Assignment:
        return Assignment(lifted.bits[:self.num_x_vars])


@dataclass(frozen=True)
class AffineRow:
    """sum_{j in support} x_j + constant = 0 over F2."""

    support: Tuple[int, ...]
    constant: int

    def holds(self, bits: Tuple[int, ...]) -> bool:
        return (sum(bits[j] for j in self.support) + self.constant) % 2 == 0

    def __str__(self) -> str:
        lhs = " + ".join(f"x{j + 1}" for j in self.support)
        return f"{lhs} + {self.constant} = 0 (mod 2)"


@dataclass(frozen=True)
class IsolationAttempt:
    k: int
    seed: int
    affine_rows: Tuple[AffineRow, ...]
    lifted: LiftResult
    combined: PolySystem
    x_vars: int

    def surviving(self, solutions: Iterable[Assignment]) -> List[Assignment]:
        """Known solutions of the base system that also satisfy every appended row."""
        return [s for s in solutions if all(row.holds(s.bits[:self.x_vars]) for row in self.affine_rows)]

    def extend_solution(self, base: LiftResult, solution: Assignment) -> Assignment:
        """Combined-system assignment of a surviving F2 solution: base slack bits, then row slack bits."""
        head = base.extend_solution(solution).bits
        tail = self.lifted.extend_solution(Assignment(solution.bits[:self.x_vars])).bits[self.x_vars:]
        return Assignment(head + tail)


@dataclass(frozen=True, slots=True)
class ZeroSolutionSentinel:
    """No polynomial has a constant term, so the all-zero assignment is a solution."""

    num_vars: int

    @property
    def solution(self) -> Assignment:
        return Assignment.zeros(self.num_vars)

