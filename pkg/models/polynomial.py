"""
Exact polynomial values: monomials, sparse rational polynomials tagged with their
field, polynomial systems and Boolean assignments.

Every value here is immutable once built. Coefficients are ``fractions.Fraction``;
polynomials are kept canonical (duplicate monomials merged, zero coefficients
dropped, terms sorted in the module-wide monomial order).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, Iterable, Iterator, Sequence, Tuple, Union


class FieldTag(str, Enum):
    F2 = "F2"
    C = "C"


Coefficient = Union[int, Fraction, str]


def as_fraction(value: Coefficient) -> Fraction:
    """Coerce an exact coefficient; floats are refused to keep arithmetic exact."""
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"Coefficient must be int, Fraction or 'p/q' string, got {type(value).__name__}")


@dataclass(frozen=True, slots=True)
class Monomial:
    exponents: Tuple[int, ...]

    def __post_init__(self):
        if any((not isinstance(e, int)) or e < 0 for e in self.exponents):
            raise ValueError(f"Exponents must be non-negative integers: {self.exponents}")

    @classmethod
    def one(cls, num_vars: int) -> "Monomial":
        return cls((0,) * num_vars)

    @classmethod
    def variable(cls, index: int, num_vars: int, power: int = 1) -> "Monomial":
        exps = [0] * num_vars
        exps[index] = power
        return cls(tuple(exps))

    @classmethod
    def from_mask(cls, mask: int, num_vars: int) -> "Monomial":
        return cls(tuple((mask >> i) & 1 for i in range(num_vars)))

    @property
    def num_vars(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def max_degree(self) -> int:
        return max(self.exponents, default=0)

    @property
    def is_constant(self) -> bool:
        return not any(self.exponents)

    @property
    def is_multilinear(self) -> bool:
        return all(e <= 1 for e in self.exponents)

    @property
    def mask(self) -> int:
        if not self.is_multilinear:
            raise ValueError(f"Bitmask is only defined for multilinear monomials, got {self}")
        return sum(1 << i for i, e in enumerate(self.exponents) if e)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.exponents) if e)

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        # Reversed exponents compare like the base-(d+1) integer with x1 as lowest digit
        return (self.degree, self.exponents[::-1])

    def multilinear(self) -> "Monomial":
        """Clamp every exponent to at most 1."""
        return Monomial(tuple(min(e, 1) for e in self.exponents))

    def divides(self, other: "Monomial") -> bool:
        return all(a <= b for a, b in zip(self.exponents, other.exponents))

    def __mul__(self, other: "Monomial") -> "Monomial":
        if len(other.exponents) != len(self.exponents):
            raise ValueError("Monomials over different variable counts")
        return Monomial(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __truediv__(self, other: "Monomial") -> "Monomial":
        if not other.divides(self):
            raise ValueError(f"{other} does not divide {self}")
        return Monomial(tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def evaluate(self, bits: Sequence[int]) -> int:
        for e, b in zip(self.exponents, bits):
            if e and not b:
                return 0
        return 1

    def __str__(self) -> str:
        parts = []
        for i, e in enumerate(self.exponents):
            if e == 1:
                parts.append(f"x{i + 1}")
            elif e > 1:
                parts.append(f"x{i + 1}^{e}")
        return "*".join(parts) if parts else "1"


@dataclass(frozen=True, slots=True)
class Assignment:
    bits: Tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"Assignment entries must be 0 or 1: {self.bits}")

    @classmethod
    def from_mask(cls, mask: int, num_vars: int) -> "Assignment":
        return cls(tuple((mask >> i) & 1 for i in range(num_vars)))

    @classmethod
    def zeros(cls, num_vars: int) -> "Assignment":
        return cls((0,) * num_vars)

    @property
    def num_vars(self) -> int:
        return len(self.bits)

    @property
    def weight(self) -> int:
        return sum(self.bits)

    @property
    def mask(self) -> int:
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def __str__(self) -> str:
        return "(" + ",".join(str(b) for b in self.bits) + ")"


@dataclass(frozen=True)
class Polynomial:
    num_vars: int
    field: FieldTag
    terms: Tuple[Tuple[Monomial, Fraction], ...] = ()

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[Union[Monomial, Sequence[int]], Coefficient]],
                   num_vars: int, field: FieldTag = FieldTag.C) -> "Polynomial":
        """Build a canonical polynomial: merge duplicates, reduce mod 2 for F2, drop zeros."""
        field = FieldTag(field)
        merged: Dict[Monomial, Fraction] = {}
        for mono, coeff in terms:
            if not isinstance(mono, Monomial):
                mono = Monomial(tuple(mono))
            if mono.num_vars != num_vars:
                raise ValueError(f"Monomial {mono.exponents} has {mono.num_vars} exponents, expected {num_vars}")
            if field is FieldTag.F2 and not mono.is_multilinear:
                raise ValueError(f"F2 polynomials are stored with multilinear monomials only, got {mono}")
            merged[mono] = merged.get(mono, Fraction(0)) + as_fraction(coeff)

        if field is FieldTag.F2:
            for mono, coeff in merged.items():
                if coeff.denominator != 1:
                    raise ValueError(f"F2 coefficient must be an integer, got {coeff}")
                merged[mono] = Fraction(coeff.numerator % 2)

        canonical = tuple(sorted(((m, c) for m, c in merged.items() if c != 0),
                                 key=lambda item: item[0].sort_key))
        return cls(num_vars=num_vars, field=field, terms=canonical)

    @classmethod
    def zero(cls, num_vars: int, field: FieldTag = FieldTag.C) -> "Polynomial":
        return cls(num_vars=num_vars, field=FieldTag(field), terms=())

    @classmethod
    def constant(cls, value: Coefficient, num_vars: int, field: FieldTag = FieldTag.C) -> "Polynomial":
        return cls.from_terms([(Monomial.one(num_vars), value)], num_vars, field)

    @classmethod
    def linear_combination(cls, polys: Sequence["Polynomial"], coeffs: Sequence[Coefficient]) -> "Polynomial":
        if not polys:
            raise ValueError("Linear combination of an empty list")
        first = polys[0]
        terms = []
        for p, c in zip(polys, coeffs):
            if p.num_vars != first.num_vars or p.field != first.field:
                raise ValueError("Cannot combine polynomials over different rings")
            c = as_fraction(c)
            terms.extend((m, c * v) for m, v in p.terms)
        return cls.from_terms(terms, first.num_vars, first.field)

    @cached_property
    def as_dict(self) -> Dict[Monomial, Fraction]:
        return dict(self.terms)

    @property
    def monomials(self) -> Tuple[Monomial, ...]:
        return tuple(m for m, _ in self.terms)

    @property
    def sparsity(self) -> int:
        return len(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def total_degree(self) -> int:
        return max((m.degree for m, _ in self.terms), default=0)

    @property
    def max_degree(self) -> int:
        return max((m.max_degree for m, _ in self.terms), default=0)

    def variable_degrees(self) -> Tuple[int, ...]:
        """Per-variable maximum exponent over all terms."""
        degrees = [0] * self.num_vars
        for m, _ in self.terms:
            for i, e in enumerate(m.exponents):
                if e > degrees[i]:
                    degrees[i] = e
        return tuple(degrees)

    @property
    def constant_term(self) -> Fraction:
        return self.as_dict.get(Monomial.one(self.num_vars), Fraction(0))

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.as_dict.get(mono, Fraction(0))

    def scale(self, factor: Coefficient) -> "Polynomial":
        factor = as_fraction(factor)
        return Polynomial.from_terms(((m, c * factor) for m, c in self.terms), self.num_vars, self.field)

    def mul_monomial(self, mono: Monomial) -> "Polynomial":
        return Polynomial.from_terms(((m * mono, c) for m, c in self.terms), self.num_vars, self.field)

    def map_monomials(self, fn: Callable[[Monomial], Monomial]) -> "Polynomial":
        """Apply fn to every monomial, extended linearly (colliding images are summed)."""
        return Polynomial.from_terms(((fn(m), c) for m, c in self.terms), self.num_vars, self.field)

    def embed(self, num_vars: int, positions: Sequence[int]) -> "Polynomial":
        """Relocate variable i to index positions[i] in a ring with num_vars variables."""
        if len(positions) != self.num_vars:
            raise ValueError("positions must list a target index for every variable")
        terms = []
        for m, c in self.terms:
            exps = [0] * num_vars
            for i, e in enumerate(m.exponents):
                exps[positions[i]] += e
            terms.append((Monomial(tuple(exps)), c))
        return Polynomial.from_terms(terms, num_vars, self.field)

    def with_field(self, field: FieldTag) -> "Polynomial":
        return Polynomial.from_terms(self.terms, self.num_vars, field)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial.linear_combination([self, other], [1, 1])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial.linear_combination([self, other], [1, -1])

    def __neg__(self) -> "Polynomial":
        return self.scale(-1)

    def __iter__(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for m, c in reversed(self.terms):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = str(m) if mag == 1 and not m.is_constant else (
                str(mag) if m.is_constant else f"{mag}*{m}")
            out.append(f"{sign} {body}")
        text = " ".join(out)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


def field_equation(index: int, num_vars: int) -> Polynomial:
    """x_i^2 - x_i over C."""
    return Polynomial.from_terms([(Monomial.variable(index, num_vars, 2), 1),
                                  (Monomial.variable(index, num_vars, 1), -1)], num_vars, FieldTag.C)


@dataclass(frozen=True)
class PolySystem:
    polys: Tuple[Polynomial, ...]
    num_vars: int
    field: FieldTag = FieldTag.C

    def __post_init__(self):
        object.__setattr__(self, "polys", tuple(self.polys))
        object.__setattr__(self, "field", FieldTag(self.field))
        for idx, p in enumerate(self.polys):
            if p.num_vars != self.num_vars:
                raise ValueError(f"Polynomial {idx} has {p.num_vars} variables, system has {self.num_vars}")
            if p.field != self.field:
                raise ValueError(f"Polynomial {idx} is tagged {p.field.value}, system is {self.field.value}")

    def __len__(self) -> int:
        return len(self.polys)

    def __iter__(self) -> Iterator[Polynomial]:
        return iter(self.polys)

    def __getitem__(self, index: int) -> Polynomial:
        return self.polys[index]

    @cached_property
    def _field_equation_set(self) -> frozenset:
        if self.field is not FieldTag.C:
            return frozenset()
        return frozenset(field_equation(i, self.num_vars) for i in range(self.num_vars))

    @property
    def includes_field_equations(self) -> bool:
        if self.field is not FieldTag.C:
            return False
        present = set(self.polys)
        return all(f in present for f in self._field_equation_set)

    @property
    def sparsity(self) -> int:
        return max((p.sparsity for p in self.polys), default=0)

    def is_field_equation(self, p: Polynomial) -> bool:
        return p in self._field_equation_set

    def core(self) -> "PolySystem":
        """The system without its field equations."""
        return PolySystem(tuple(p for p in self.polys if not self.is_field_equation(p)),
                          self.num_vars, self.field)

    def with_field_equations(self) -> "PolySystem":
        if self.field is not FieldTag.C:
            raise ValueError("Field equations are only added to C-tagged systems")
        missing = [field_equation(i, self.num_vars) for i in range(self.num_vars)
                   if field_equation(i, self.num_vars) not in set(self.polys)]
        return PolySystem(self.polys + tuple(missing), self.num_vars, self.field)

    def extend(self, polys: Iterable[Polynomial]) -> "PolySystem":
        return PolySystem(self.polys + tuple(polys), self.num_vars, self.field)
