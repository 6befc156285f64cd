"""
Condition numbers and their lower bounds.

Floating point is confined to the SVD quantities (kappa, kappa_b, norms). Gram
matrices, minors, shortest affine vectors and PD certificates are exact.
"""

import logging
from fractions import Fraction
from itertools import combinations
from math import comb, exp, log
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import Config
from errors import CapacityExceededError, DimensionMismatchError
from models.matrix import (
    DegreeKind, DegreeMode, Flavor, GramMatrix, LabeledSparseMatrix, MonomialSolutionVector,
)
from models.polynomial import Assignment, FieldTag, Monomial, PolySystem
from models.reduction import ZeroSolutionSentinel
from models.reports import (
    AnalyticBound, BoundReport, ComparisonRow, PdVerdict, SearchCosts, fraction_str,
)
from services.exact_linalg import ldl_pivots, nullspace, psd_pinv_solve, solve_square
from services.macaulay_service import build_boolean_macaulay, build_macaulay
from services.polysys_service import brute_force_solutions
from services.reduce_service import normalize_constants

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]
GammaRule = Callable[[int], Fraction]


def sqrt_float(value: Number) -> float:
    """sqrt of a non-negative exact number, safe for integers beyond float range"""
    if value <= 0:
        return 0.0
    if isinstance(value, Fraction):
        return exp(0.5 * (log(value.numerator) - log(value.denominator)))
    return exp(0.5 * log(value))


# -- monomial solution vectors ------------------------------------------------

def solution_vector_size(h: int, kind: DegreeKind) -> int:
    """Nonzero coordinates of y^(a) for weight h, counted variable by variable"""
    # counts[t] = exponent vectors over the support so far with degree t
    if kind.mode is DegreeMode.MAX:
        total = 1
        for _ in range(h):
            total *= kind.d + 1
        return total - 1
    counts = [1] + [0] * kind.d
    for _ in range(h):
        counts = [sum(counts[:t + 1]) for t in range(kind.d + 1)]
    return sum(counts) - 1


def monomial_solution_vector(a: Assignment, kind: DegreeKind, cap: Optional[int] = None) -> MonomialSolutionVector:
    """
    y^(a) with y_e = prod a_i^{e_i}; only the nonzero coordinates are stored.

    They are the non-constant monomials over the support of a admitted by kind.
    """
    support = a.support
    size = solution_vector_size(len(support), kind)
    limit = Config.capacity_cap("columns", cap)
    if size > limit:
        raise CapacityExceededError("monomial solution vector coordinates", size, limit)
    local = kind.monomials(len(support))
    coords: Dict[Monomial, int] = {}
    for m in local:
        if m.is_constant:
            continue
        exps = [0] * a.num_vars
        for pos, e in zip(support, m.exponents):
            exps[pos] = e
        coords[Monomial(tuple(exps))] = 1
    return MonomialSolutionVector(assignment=a.bits, kind=kind, coords=coords)


# -- SVD quantities -------------------------------------------------------------

def _as_dense(M) -> np.ndarray:
    if isinstance(M, LabeledSparseMatrix):
        return M.to_dense()
    return np.asarray(M, dtype=np.float64)


def svd_pinv_apply(M, b) -> Tuple[np.ndarray, int, np.ndarray]:
    """
    Singular values, numerical rank and M^+ b from a full SVD.

    Singular values below max(dims) * sigma_max * 2^-40 count as zero.
    """
    A = _as_dense(M)
    if A.ndim != 2:
        raise DimensionMismatchError("Expected a 2-d matrix")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        raise ValueError("Matrix is all zeros")
    tol = max(A.shape) * s[0] * 2.0 ** -40
    rank = int(np.sum(s > tol))
    pinv_b = None
    if b is not None:
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != A.shape[0]:
            raise DimensionMismatchError(f"b has length {b.shape[0]}, matrix has {A.shape[0]} rows")
        coeffs = (U[:, :rank].T @ b) / s[:rank]
        pinv_b = Vt[:rank].T @ coeffs
    return s, rank, pinv_b


def kappa(M) -> float:
    """||A|| ||A^+|| over the nonzero singular values"""
    s, rank, _ = svd_pinv_apply(M, None)
    return float(s[0] / s[rank - 1])


def kappa_b(M, b) -> float:
    """||A|| ||A^+ b|| / ||b||"""
    b = np.asarray(b, dtype=np.float64)
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0:
        raise ValueError("kappa_b needs a nonzero b")
    s, _, pinv_b = svd_pinv_apply(M, b)
    return float(s[0] * np.linalg.norm(pinv_b) / norm_b)


# -- shortest vector in an affine hull -------------------------------------------

def _inner(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def gram_of(vectors: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    t = len(vectors)
    G = [[Fraction(0)] * t for _ in range(t)]
    for i in range(t):
        for j in range(i, t):
            G[i][j] = G[j][i] = _inner(vectors[i], vectors[j])
    return G


def shortest_affine_norm(vectors: Sequence[Sequence[Fraction]]) -> Tuple[Fraction, List[Fraction]]:
    """
    Squared length of the shortest vector in the affine hull of the given vectors.

    Returns (gamma*, w): gamma* = 1 / <1, G^+ 1> and w = G^+ 1 / <1, G^+ 1>, or
    (0, w) with V w = 0 when 1 is outside the column space of G.
    """
    if not vectors:
        raise ValueError("shortest_affine_norm needs at least one vector")
    vectors = [[Fraction(x) for x in v] for v in vectors]
    if len({len(v) for v in vectors}) != 1:
        raise DimensionMismatchError("Vectors must share one length")
    G = gram_of(vectors)
    t = len(vectors)
    x = psd_pinv_solve(G, [Fraction(1)] * t)
    if x is None:
        # origin is in the affine hull: a kernel vector of G with nonzero sum
        for v in nullspace(G):
            total = sum(v, Fraction(0))
            if total:
                return Fraction(0), [vi / total for vi in v]
        raise ArithmeticError("1 outside col(G) but no kernel vector has nonzero sum")
    denom = sum(x, Fraction(0))
    gamma = 1 / denom
    return gamma, [xi * gamma for xi in x]


def affine_point(vectors: Sequence[Sequence[Fraction]], weights: Sequence[Fraction]) -> List[Fraction]:
    length = len(vectors[0])
    return [sum((w * Fraction(v[k]) for v, w in zip(vectors, weights)), Fraction(0)) for k in range(length)]


# -- symmetrized Gram matrices ---------------------------------------------------

def gram_coefficient(s: int, kind: DegreeKind) -> int:
    """Monomials whose support is one fixed s-set: d^s (max) or C(d, s) (total)"""
    return kind.d ** s if kind.mode is DegreeMode.MAX else comb(kind.d, s)


def gram_symmetrized(n: int, d: int, mode: Union[DegreeMode, str] = DegreeMode.MAX) -> GramMatrix:
    """G_ij = sum_{s=1}^{min(i,j)} c_s C(i,s) C(j,s) / C(n,s)"""
    if n < 1 or d < 1:
        raise ValueError(f"gram_symmetrized needs n >= 1 and d >= 1, got n={n}, d={d}")
    kind = DegreeKind(DegreeMode(mode), d)
    coeff = [gram_coefficient(s, kind) for s in range(n + 1)]
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            row.append(sum((Fraction(coeff[s] * comb(i, s) * comb(j, s), comb(n, s))
                            for s in range(1, min(i, j) + 1)), Fraction(0)))
        rows.append(tuple(row))
    return GramMatrix(n=n, kind=kind, entries=tuple(rows))


def symmetrized_vector(n: int, d: int, mode: Union[DegreeMode, str], h: int) -> Dict[Monomial, Fraction]:
    """Average of y^(a) over all weight-h assignments, by enumeration"""
    kind = DegreeKind(DegreeMode(mode), d)
    monos = [m for m in kind.monomials(n) if not m.is_constant]
    subsets = list(combinations(range(n), h))
    out: Dict[Monomial, Fraction] = {}
    for m in monos:
        hits = sum(1 for sub in subsets if set(m.support) <= set(sub))
        if hits:
            out[m] = Fraction(hits, len(subsets))
    return out


def gram_by_enumeration(n: int, d: int, mode: Union[DegreeMode, str] = DegreeMode.MAX) -> GramMatrix:
    kind = DegreeKind(DegreeMode(mode), d)
    vecs = [symmetrized_vector(n, d, kind.mode, h) for h in range(1, n + 1)]
    rows = []
    for u in vecs:
        rows.append(tuple(sum((val * v.get(m, 0) for m, val in u.items()), Fraction(0)) for v in vecs))
    return GramMatrix(n=n, kind=kind, entries=tuple(rows))


def gram_diagonal_by_overlap(n: int, d: int, h: int) -> Fraction:
    """G_hh (max degree) as an average over pairs of weight-h points by overlap size"""
    total = sum(((d + 1) ** (h - i) - 1) * comb(h, i) * comb(n - h, i) for i in range(h))
    return Fraction(total, comb(n, h))


def gram_minor_bound(G: GramMatrix, h: int) -> Fraction:
    """
    1 / <1, (G^(h))^-1 1> for the bottom-right minor starting at h.

    Raises:
        SingularMatrixError: the minor is singular (d < n)
    """
    minor = G.minor(h)
    x = solve_square(minor, [Fraction(1)] * len(minor))
    return 1 / sum(x, Fraction(0))


def minor_bound_profile(n: int, d: int, mode: Union[DegreeMode, str] = DegreeMode.MAX) -> Tuple[List[Fraction], bool]:
    """gram_minor_bound for h = 1..n and whether it is nondecreasing in h"""
    G = gram_symmetrized(n, d, mode)
    bounds = [gram_minor_bound(G, h) for h in range(1, n + 1)]
    monotone = all(a <= b for a, b in zip(bounds, bounds[1:]))
    if not monotone:
        logger.warning("Minor bound is not monotone in h for n=%d d=%d (%s)", n, d, mode)
    return bounds, monotone


# -- PD certification -------------------------------------------------------------

GAMMA_RULES: Dict[str, GammaRule] = {
    "h^h/2": lambda h: Fraction(h ** h, 2),
}


def resolve_gamma_rule(rule: Union[str, GammaRule]) -> Tuple[str, GammaRule]:
    if callable(rule):
        return getattr(rule, "__name__", "custom"), rule
    try:
        return rule, GAMMA_RULES[rule]
    except KeyError:
        raise ValueError(f"Unknown gamma rule '{rule}'. Available: {', '.join(GAMMA_RULES)}")


def _certify(matrix: List[List[Fraction]]) -> Tuple[bool, List[Fraction], Optional[int]]:
    pivots = ldl_pivots(matrix)
    bad = next((i for i, p in enumerate(pivots) if p <= 0), None)
    certified = bad is None and len(pivots) == len(matrix)
    return certified, pivots, bad


def certify_pd_bound(n: int, rule: Union[str, GammaRule] = "h^h/2", d: Optional[int] = None,
                     mode: Union[DegreeMode, str] = DegreeMode.MAX) -> List[PdVerdict]:
    """
    For every h in 1..n certify G^(h) - gamma(h) 11^T positive definite by exact LDL^T.

    A failed certification is a verdict with the offending pivot, not an error.
    """
    if n < 1:
        raise ValueError("certify_pd_bound needs n >= 1")
    d = 3 * n if d is None else d
    _, gamma_of = resolve_gamma_rule(rule)
    G = gram_symmetrized(n, d, mode)
    verdicts = []
    for h in range(1, n + 1):
        gamma = Fraction(gamma_of(h))
        shifted = [[v - gamma for v in row] for row in G.minor(h)]
        certified, pivots, bad = _certify(shifted)
        verdicts.append(PdVerdict(h=h, gamma=fraction_str(gamma), certified=certified,
                                  pivots=[fraction_str(p) for p in pivots], first_nonpositive=bad))
        logger.debug("n=%d h=%d gamma=%s certified=%s", n, h, gamma, certified)
    return verdicts


def certify_combined_bound(n: int, d: Optional[int] = None) -> PdVerdict:
    """2 G - [min(i,j)^min(i,j)] positive definite, max degree (default d = 3n)"""
    d = 3 * n if d is None else d
    G = gram_symmetrized(n, d, DegreeMode.MAX)
    matrix = [[2 * G.entries[i][j] - min(i + 1, j + 1) ** min(i + 1, j + 1) for j in range(n)] for i in range(n)]
    certified, pivots, bad = _certify(matrix)
    return PdVerdict(h=1, gamma="min(i,j)^min(i,j)/2", certified=certified,
                     pivots=[fraction_str(p) for p in pivots], first_nonpositive=bad)


# -- search costs -------------------------------------------------------------------

def search_costs(n: int, h: int, d: Optional[int] = None) -> SearchCosts:
    """Brute-force and Grover-style counts for weight-h search, with the binomial bounds"""
    if not 0 <= h <= n:
        raise ValueError(f"h must lie in 0..{n}, got {h}")
    binom = comb(n, h)
    prefix = sum(comb(n, j) for j in range(h + 1))
    nonzero_prefix = prefix - 1

    entropy_holds = None
    if h >= 1:
        # prefix <= 3 sqrt(h) C(n,h), compared squared
        entropy_holds = prefix * prefix <= 9 * h * binom * binom

    geometric_defined = n - 2 * h + 1 > 0
    geometric = None
    geometric_holds = None
    if geometric_defined:
        geometric = Fraction(binom * (n - h + 1), n - 2 * h + 1)
        geometric_holds = prefix <= geometric

    grover = sqrt_float(binom)
    costs = SearchCosts(
        n=n, h=h, binomial=binom, prefix_sum=prefix, nonzero_prefix_sum=nonzero_prefix,
        entropy_bound=3 * sqrt_float(h) * binom,
        entropy_bound_holds=entropy_holds,
        geometric_defined=geometric_defined,
        geometric_bound=fraction_str(geometric) if geometric is not None else None,
        geometric_bound_holds=geometric_holds,
        grover=grover if h else 0.0,
        grover_weighted=h * grover,
        grover_quarter=h ** 0.25 * grover,
        d=d,
    )
    if d is not None:
        costs.norm_bound_max = sqrt_float((d + 1) ** h - 1)
        costs.norm_bound_total = sqrt_float(comb(d + h, h) - 1)
    return costs


# -- system analysis ----------------------------------------------------------------

def solution_norm_bound(h: int, t: int, kind: DegreeKind) -> float:
    return sqrt_float(Fraction(solution_vector_size(h, kind), t))


def boolean_half_bound(h: int, t: int) -> float:
    return 0.5 * sqrt_float(Fraction(2 ** h - 1, t))


def analyze_system(system: PolySystem, flavor: Union[Flavor, str] = Flavor.BOOLEAN,
                   kind: Optional[DegreeKind] = None, cap: Optional[int] = None,
                   tolerance: float = 1e-6, cost_weight: Optional[int] = None) -> BoundReport:
    """
    Build the Macaulay system of a normalized copy of system, compute kappa and kappa_b,
    and set them against the analytic lower bounds that apply.

    The search-cost comparators use cost_weight when given, the minimum solution weight otherwise.
    """
    flavor = Flavor(flavor)
    if system.field is not FieldTag.C:
        raise ValueError("analyze_system expects a C-tagged system")
    n = system.num_vars
    normalized = normalize_constants(system)
    if isinstance(normalized, ZeroSolutionSentinel):
        raise ValueError("System has no constant term (b = 0); kappa_b is undefined")

    if flavor is Flavor.BOOLEAN:
        kind = kind or DegreeKind.total(n)
        ms = build_boolean_macaulay(normalized, kind.d, cap)
    else:
        kind = kind or DegreeKind.max(3 * n)
        ms = build_macaulay(normalized.with_field_equations(), kind, cap)

    A = ms.matrix.to_dense()
    b = np.array([float(v) for v in ms.b_dense()])
    s, rank, pinv_b = svd_pinv_apply(A, b)
    norm_b = float(np.linalg.norm(b))
    norm_pinv_b = float(np.linalg.norm(pinv_b))
    k_b = float(s[0]) * norm_pinv_b / norm_b

    solutions = brute_force_solutions(system)
    t = len(solutions)
    h = min((a.weight for a in solutions), default=None)
    cost_h = h if cost_weight is None else cost_weight

    bounds: List[AnalyticBound] = []
    residual = None
    if t and h is not None:
        full_rank = rank == A.shape[1]
        if flavor is Flavor.BOOLEAN:
            value = boolean_half_bound(h, t)
            bounds.append(AnalyticBound(name="boolean_half", value=value, premise=t == 1,
                                        holds=k_b >= value * (1 - tolerance)))
        else:
            premise = t == 1 or (kind.mode is DegreeMode.MAX and kind.d >= 3 * n)
            value = solution_norm_bound(h, t, kind)
            bounds.append(AnalyticBound(name=f"solution_norm_{kind.mode.value}", value=value, premise=premise,
                                        holds=k_b >= value * (1 - tolerance)))
            if kind.d >= n and h >= 1:
                minor = gram_minor_bound(gram_symmetrized(n, kind.d, kind.mode), h)
                value = sqrt_float(minor)
                bounds.append(AnalyticBound(name="gram_minor", value=value,
                                            premise=kind.mode is DegreeMode.MAX and kind.d >= 3 * n,
                                            holds=k_b >= value * (1 - tolerance)))
        if t == 1 and full_rank:
            norm_y = sqrt_float(solution_vector_size(h, kind if flavor is Flavor.PLAIN else DegreeKind.max(1)))
            if norm_y > 0:
                residual = abs(k_b * norm_b / float(s[0]) - norm_y) / norm_y

    report = BoundReport(
        flavor=flavor.value, degree_kind=kind.mode.value, n=n, d=kind.d, h=h, t=t,
        shape=ms.shape, rank=rank, kappa=float(s[0] / s[rank - 1]), kappa_b=k_b,
        norm_matrix=float(s[0]), norm_b=norm_b, norm_pinv_b=norm_pinv_b,
        analytic_lower_bounds=bounds, unique_identity_residual=residual,
        search_costs=search_costs(n, cost_h, kind.d) if cost_h is not None else None,
    )
    logger.info("Analyzed %s system n=%d: kappa=%.4g kappa_b=%.4g", flavor.value, n, report.kappa, report.kappa_b)
    return report


def comparison_rows(n_values: Sequence[int], mode: str = "max", weight: Optional[int] = None) -> List[ComparisonRow]:
    """
    Analytic kappa_b lower bounds next to search counts across (n, h).

    mode "max" uses d = 3n, "total" uses d = n and "boolean" the Boolean bound at d = n.
    With weight set, only h = weight is listed.
    """
    rows = []
    for n in n_values:
        for h in range(1, n + 1):
            if weight is not None and h != weight:
                continue
            if mode == "boolean":
                d, bound = n, boolean_half_bound(h, 1)
            elif mode == "max":
                d = 3 * n
                bound = solution_norm_bound(h, 1, DegreeKind.max(d))
            elif mode == "total":
                d = n
                bound = solution_norm_bound(h, 1, DegreeKind.total(d))
            else:
                raise ValueError(f"Unknown comparison mode '{mode}'")
            costs = search_costs(n, h)
            rows.append(ComparisonRow(
                n=n, h=h, d=d, degree_kind=mode, kappa_b_lower_bound=bound,
                classical_search=costs.prefix_sum, grover=costs.grover,
                grover_weighted=costs.grover_weighted, grover_quarter=costs.grover_quarter,
            ))
    return rows
