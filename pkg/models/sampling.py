from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from models.polynomial import Monomial


@dataclass(frozen=True)
class MeasurementDistribution:
    """p(R) = y_R^2 / ||y||^2 over the nonzero coordinates of a state vector."""

    support: Tuple[Monomial, ...]
    probabilities: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probabilities):
            raise ValueError("support and probabilities must align")
        if any(m.is_constant for m in self.support):
            raise ValueError("The empty subset never carries probability mass")
        if sum(self.probabilities, Fraction(0)) != 1:
            raise ValueError("Probabilities must sum to exactly 1")

    def __len__(self) -> int:
        return len(self.support)

    def probability_of(self, mono: Monomial) -> Fraction:
        for m, p in zip(self.support, self.probabilities):
            if m == mono:
                return p
        return Fraction(0)

    def is_uniform(self) -> bool:
        return len(set(self.probabilities)) <= 1
