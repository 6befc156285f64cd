"""
Reductions between problem forms:

* lift_f2_to_c: an F2 system becomes a C system plus field equations, with binary
  slack variables absorbing the even integer value of every polynomial.
* vv_augment / isolation_schedule: random affine F2 rows that isolate one solution.
* normalize_constants: row operations leaving a single constant term, equal to -1.
"""

import logging
from math import ceil, log
from typing import List, Optional, Tuple, Union

import numpy as np

from models.polynomial import FieldTag, Monomial, Polynomial, PolySystem, field_equation
from models.reduction import AffineRow, IsolationAttempt, LiftResult, VarOrigin, ZeroSolutionSentinel

logger = logging.getLogger(__name__)


def slack_bit_count(p: Polynomial) -> int:
    """B = floor(log2 T(p)); bit_length avoids float rounding."""
    return p.sparsity.bit_length() - 1


def lift_f2_to_c(sys_f2: PolySystem) -> LiftResult:
    """
    Lift an F2 system to C: f_i - sum_{b=1..B_i} 2^b y_{i,b} = 0 plus field equations.

    Variables are ordered x_1..x_n, then the slack bits polynomial by polynomial.
    """
    if sys_f2.field is not FieldTag.F2:
        raise ValueError("lift_f2_to_c expects an F2-tagged system")
    for i, p in enumerate(sys_f2):
        if p.is_zero:
            raise ValueError(f"Polynomial {i} is empty (T = 0) and cannot be lifted")

    n = sys_f2.num_vars
    bits = tuple(slack_bit_count(p) for p in sys_f2)
    total = n + sum(bits)

    var_map = [VarOrigin(index=j, kind="x", source=j) for j in range(n)]
    for i, count in enumerate(bits):
        for b in range(1, count + 1):
            var_map.append(VarOrigin(index=len(var_map), kind="slack", source=i, bit=b))

    positions = list(range(n))
    lifted = []
    cursor = n
    for p, count in zip(sys_f2, bits):
        base = p.with_field(FieldTag.C).embed(total, positions)
        slack_terms = [(Monomial.variable(cursor + b - 1, total), -(2 ** b)) for b in range(1, count + 1)]
        lifted.append(base + Polynomial.from_terms(slack_terms, total, FieldTag.C))
        cursor += count

    # Field equations: slack first, then the x variables
    fields = [field_equation(v, total) for v in range(n, total)]
    fields += [field_equation(j, total) for j in range(n)]

    system = PolySystem(tuple(lifted + fields), total, FieldTag.C)
    logger.info("Lifted %d F2 polynomials over %d variables to %d equations over %d variables",
                len(sys_f2), n, len(system), total)
    return LiftResult(system=system, source=sys_f2, var_map=tuple(var_map), slack_bits=bits)


def _random_affine_rows(rng: np.random.Generator, count: int, x_vars: int) -> Tuple[AffineRow, ...]:
    rows = []
    while len(rows) < count:
        include = rng.integers(0, 2, size=x_vars)
        constant = int(rng.integers(0, 2))
        support = tuple(int(j) for j in np.flatnonzero(include))
        if not support:
            # degenerate row, draw again
            continue
        rows.append(AffineRow(support=support, constant=constant))
    return tuple(rows)


def vv_augment(system: PolySystem, k: int, seed: int, x_vars: Optional[int] = None) -> IsolationAttempt:
    """
    Append k+2 random affine F2 rows over the x variables, lifted to C.

    Args:
        system: C-tagged system with field equations
        k: guess of floor(log2 S), 0 <= k <= x_vars
        seed: RNG seed; the same seed gives the same rows
        x_vars: number of leading variables the rows range over (default: all)

    Returns:
        IsolationAttempt whose combined system holds the original equations, the lifted
        rows and the field equations of the new slack variables
    """
    if system.field is not FieldTag.C:
        raise ValueError("vv_augment expects a C-tagged system")
    x_vars = system.num_vars if x_vars is None else x_vars
    if not 1 <= x_vars <= system.num_vars:
        raise ValueError(f"x_vars must lie in 1..{system.num_vars}, got {x_vars}")
    if not 0 <= k <= x_vars:
        raise ValueError(f"k must lie in 0..{x_vars}, got {k}")

    rng = np.random.default_rng(seed)
    rows = _random_affine_rows(rng, k + 2, x_vars)

    row_polys = []
    for row in rows:
        terms = [(Monomial.variable(j, x_vars), 1) for j in row.support]
        terms.append((Monomial.one(x_vars), row.constant))
        row_polys.append(Polynomial.from_terms(terms, x_vars, FieldTag.F2))
    lifted = lift_f2_to_c(PolySystem(tuple(row_polys), x_vars, FieldTag.F2))

    # Embed: x variables keep their index, new slack variables follow the system's own
    extra = lifted.num_vars - x_vars
    total = system.num_vars + extra
    positions = list(range(x_vars)) + list(range(system.num_vars, total))
    lifted_eqs = [p.embed(total, positions) for p in lifted.system.polys[:len(rows)]]
    slack_fields = [field_equation(v, total) for v in range(system.num_vars, total)]

    base = [p.embed(total, list(range(system.num_vars))) for p in system]
    combined = PolySystem(tuple(base + lifted_eqs + slack_fields), total, FieldTag.C)
    logger.debug("Isolation attempt k=%d seed=%d appended %d rows", k, seed, len(rows))
    return IsolationAttempt(k=k, seed=seed, affine_rows=rows, lifted=lifted, combined=combined, x_vars=x_vars)


def trials_per_level(n: int, eps: float) -> int:
    return ceil(8 * log((n + 1) / eps))


def isolation_schedule(n: int, eps: float) -> List[Tuple[int, int]]:
    """(k, trials) for k = 0..n, each with ceil(8 ln((n+1)/eps)) trials"""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    trials = trials_per_level(n, eps)
    return [(k, trials) for k in range(n + 1)]


def schedule_length_bound(n: int, eps: float) -> float:
    """Upper bound 2 n (8 ln((n+1)/eps) + 1) on the schedule length, n >= 1"""
    if n < 1:
        raise ValueError("The bound is stated for n >= 1")
    return 2 * n * (8 * log((n + 1) / eps) + 1)


def constant_pivot(system: PolySystem) -> Optional[int]:
    """Index of the constant-term polynomial with the fewest terms, lowest index on ties"""
    candidates = [(p.sparsity, i) for i, p in enumerate(system) if p.constant_term != 0]
    return min(candidates)[1] if candidates else None


def normalize_constants(system: PolySystem) -> Union[PolySystem, ZeroSolutionSentinel]:
    """
    Eliminate all constant terms but one, which becomes -1.

    The pivot is the constant-term polynomial with the fewest terms (lowest index on
    ties); it moves to the front as f_1' = -f_1 / c_1, and every other f_i becomes
    f_i + c_i f_1'.
    """
    if system.field is not FieldTag.C:
        raise ValueError("normalize_constants expects a C-tagged system")

    pivot_index = constant_pivot(system)
    if pivot_index is None:
        logger.info("No constant terms; the all-zero assignment is a solution")
        return ZeroSolutionSentinel(system.num_vars)

    pivot = system[pivot_index]
    pivot_scaled = pivot.scale(-1 / pivot.constant_term)

    rest = []
    for i, p in enumerate(system):
        if i == pivot_index:
            continue
        c = p.constant_term
        rest.append(p if c == 0 else Polynomial.linear_combination([p, pivot_scaled], [1, c]))

    logger.debug("Normalized constants with pivot %d (%d terms)", pivot_index, pivot.sparsity)
    return PolySystem((pivot_scaled,) + tuple(rest), system.num_vars, FieldTag.C)
