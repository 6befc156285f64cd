import json
import logging
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from config import Config
from errors import CapacityExceededError, DimensionMismatchError, SystemParseError
from models.polynomial import (
    Assignment, FieldTag, Monomial, Polynomial, PolySystem, field_equation,
)

logger = logging.getLogger(__name__)

__all__ = [
    "eval_poly", "eval_poly_mod2", "is_solution", "brute_force_solutions",
    "load_system", "save_system", "parse_system", "dump_system", "field_equation",
    "random_quadratic_system", "planted_system", "unique_solution_system",
]


def eval_poly(p: Polynomial, a: Assignment) -> Fraction:
    """Value of p at a 0/1 point over the rationals"""
    if a.num_vars != p.num_vars:
        raise DimensionMismatchError(f"Assignment has {a.num_vars} bits, polynomial has {p.num_vars} variables")
    return sum((c for m, c in p.terms if m.evaluate(a.bits)), Fraction(0))


def eval_poly_mod2(p: Polynomial, a: Assignment) -> int:
    """Value of an integer-coefficient polynomial at a, reduced mod 2"""
    value = eval_poly(p, a)
    if value.denominator != 1:
        raise ValueError(f"Polynomial value {value} is not an integer, no residue mod 2")
    return value.numerator % 2


def is_solution(system: PolySystem, a: Assignment) -> bool:
    if system.field is FieldTag.F2:
        return all(eval_poly_mod2(p, a) == 0 for p in system)
    return all(eval_poly(p, a) == 0 for p in system)


def _integer_columns(p: Polynomial) -> Tuple[List[int], int]:
    scale = lcm(*(c.denominator for _, c in p.terms)) if p.terms else 1
    return [int(c * scale) for _, c in p.terms], scale


def brute_force_solutions(system: PolySystem, cap: Optional[int] = None) -> List[Assignment]:
    """
    Enumerate every 0/1 assignment and keep the common zeros.

    Args:
        system: C-tagged (zeros over Q) or F2-tagged (zeros mod 2) system
        cap: Optional variable-count cap, defaults to BRUTE_FORCE_MAX_VARS

    Returns:
        Solutions in ascending bitmask order (bit i is x_{i+1})
    """
    n = system.num_vars
    limit = Config.capacity_cap("brute_force_vars", cap)
    if n > limit:
        raise CapacityExceededError("brute-force enumeration (variables)", n, limit)

    points = np.arange(1 << n, dtype=np.int64)
    bits = ((points[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)
    alive = np.ones(1 << n, dtype=bool)

    for p in system:
        coeffs, _ = _integer_columns(p)
        # Large coefficients fall back to Python integers
        dtype = object if any(abs(c) > 1 << 40 for c in coeffs) else np.int64
        value = np.zeros(1 << n, dtype=dtype)
        for (m, _), c in zip(p.terms, coeffs):
            support = list(m.support)
            mask = bits[:, support].all(axis=1) if support else np.ones(1 << n, dtype=bool)
            value = value + np.where(mask, c, 0).astype(dtype)
        if system.field is FieldTag.F2:
            alive &= (value % 2) == 0
        else:
            alive &= value == 0
        if not alive.any():
            break

    found = [Assignment.from_mask(int(mask), n) for mask in np.flatnonzero(alive)]
    logger.debug("Brute force over %d variables found %d solutions", n, len(found))
    return found


# -- file I/O ----------------------------------------------------------------

class SystemHeader(BaseModel):
    model_config = ConfigDict(extra="forbid")

    num_vars: int = Field(ge=0)
    field: FieldTag
    field_equations: bool = False


def _parse_term(raw, line: int, term: int, num_vars: int, field: FieldTag) -> Tuple[Monomial, Fraction]:
    if not isinstance(raw, list) or len(raw) != 3:
        raise SystemParseError("term must be [numerator, denominator, [exponents]]", line, term)
    num, den, exps = raw
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in (num, den)):
        raise SystemParseError("numerator and denominator must be integers", line, term)
    if den == 0:
        raise SystemParseError("zero denominator", line, term)
    if not isinstance(exps, list) or not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in exps):
        raise SystemParseError("exponents must be a list of non-negative integers", line, term)
    if len(exps) != num_vars:
        raise SystemParseError(f"exponent vector has length {len(exps)}, expected {num_vars}", line, term)
    if field is FieldTag.F2:
        if den != 1 or num not in (0, 1):
            raise SystemParseError(f"F2 coefficient must be 0 or 1 over denominator 1, got {num}/{den}", line, term)
        if any(e > 1 for e in exps):
            raise SystemParseError("F2 monomials must be multilinear", line, term)
    return Monomial(tuple(exps)), Fraction(num, den)


def parse_system(text: str) -> PolySystem:
    """Parse the JSON Lines system format (header object, then one term list per polynomial)"""
    header: Optional[SystemHeader] = None
    polys: List[Polynomial] = []

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        stripped = raw_line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            record = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise SystemParseError(f"invalid JSON: {e.msg}", line_no)

        if header is None:
            if not isinstance(record, dict):
                raise SystemParseError("first record must be the header object", line_no)
            try:
                header = SystemHeader.model_validate(record)
            except ValidationError as e:
                raise SystemParseError(f"invalid header: {e.errors()[0]['msg']}", line_no)
            continue

        if not isinstance(record, list):
            raise SystemParseError("polynomial record must be a JSON array of terms", line_no)
        terms = [_parse_term(t, line_no, idx, header.num_vars, header.field)
                 for idx, t in enumerate(record, start=1)]
        polys.append(Polynomial.from_terms(terms, header.num_vars, header.field))

    if header is None:
        raise SystemParseError("missing header", 1)

    system = PolySystem(tuple(polys), header.num_vars, header.field)
    if header.field_equations and header.field is FieldTag.C and not system.includes_field_equations:
        system = system.with_field_equations()
    return system


def dump_system(system: PolySystem) -> str:
    header = SystemHeader(num_vars=system.num_vars, field=system.field,
                          field_equations=system.includes_field_equations)
    lines = [json.dumps(header.model_dump(mode="json"))]
    for p in system:
        lines.append(json.dumps([[c.numerator, c.denominator, list(m.exponents)] for m, c in p.terms]))
    return "\n".join(lines) + "\n"


def load_system(path: Union[str, Path]) -> PolySystem:
    path = Path(path)
    logger.info("Loading system from %s", path)
    return parse_system(path.read_text(encoding="utf-8"))


def save_system(system: PolySystem, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_system(system), encoding="utf-8")


# -- generators ---------------------------------------------------------------

def _quadratic_pool(num_vars: int) -> List[Monomial]:
    pool = [Monomial.variable(i, num_vars) for i in range(num_vars)]
    pool += [Monomial.from_mask((1 << i) | (1 << j), num_vars)
             for i in range(num_vars) for j in range(i + 1, num_vars)]
    return pool


def _random_terms(rng: np.random.Generator, num_vars: int, field: FieldTag,
                  max_terms: int) -> List[Tuple[Monomial, int]]:
    pool = _quadratic_pool(num_vars)
    count = int(rng.integers(1, min(max_terms, len(pool)) + 1))
    picks = rng.choice(len(pool), size=count, replace=False)
    terms = []
    for idx in sorted(int(i) for i in picks):
        if field is FieldTag.F2:
            coeff = 1
        else:
            coeff = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        terms.append((pool[idx], coeff))
    return terms


def random_quadratic_system(num_vars: int, num_polys: int, seed: int,
                            field: FieldTag = FieldTag.C, max_terms: int = 4) -> PolySystem:
    """Random multilinear quadratic polynomials with a random constant term (no field equations)"""
    if num_vars < 1:
        raise ValueError("random systems need at least one variable")
    field = FieldTag(field)
    rng = np.random.default_rng(seed)
    polys = []
    for _ in range(num_polys):
        terms = _random_terms(rng, num_vars, field, max_terms)
        const = int(rng.integers(0, 2)) if field is FieldTag.F2 else int(rng.integers(-2, 3))
        terms.append((Monomial.one(num_vars), const))
        polys.append(Polynomial.from_terms(terms, num_vars, field))
    return PolySystem(tuple(polys), num_vars, field)


def planted_system(solution: Assignment, num_polys: int, seed: int,
                   field: FieldTag = FieldTag.C, max_terms: int = 4) -> PolySystem:
    """Random quadratic polynomials whose constant term is fixed so they vanish at solution"""
    field = FieldTag(field)
    n = solution.num_vars
    rng = np.random.default_rng(seed)
    polys = []
    for _ in range(num_polys):
        terms = _random_terms(rng, n, field, max_terms)
        value = sum(c * m.evaluate(solution.bits) for m, c in terms)
        const = value % 2 if field is FieldTag.F2 else -value
        terms.append((Monomial.one(n), const))
        polys.append(Polynomial.from_terms(terms, n, field))
    return PolySystem(tuple(polys), n, field)


def unique_solution_system(solution: Assignment, seed: int, max_terms: int = 3,
                           max_polys: Optional[int] = None) -> PolySystem:
    """
    Planted C-tagged system (without field equations) whose only Boolean solution is solution.

    Planted polynomials are appended one at a time until brute force reports a single solution.
    """
    n = solution.num_vars
    max_polys = max_polys or 4 * n + 4
    rng = np.random.default_rng(seed)
    polys: List[Polynomial] = []
    while len(polys) < max_polys:
        child = int(rng.integers(0, 2**31 - 1))
        polys.extend(planted_system(solution, 1, child, FieldTag.C, max_terms).polys)
        system = PolySystem(tuple(polys), n, FieldTag.C)
        if len(brute_force_solutions(system)) == 1:
            return system
    raise ValueError(f"No unique-solution system found within {max_polys} planted polynomials")


def as_assignment(bits: Sequence[int]) -> Assignment:
    return Assignment(tuple(int(b) for b in bits))
