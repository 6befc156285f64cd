"""
Classical stand-in for measuring the solution state of the Boolean Macaulay system.

The linear-system step is an exact least-squares solve; measuring returns a
multilinear monomial R with probability y_R^2 / ||y||^2, i.e. a subset of the
variables set to 1. Repeated measurements are unioned until the support is known.

Isolation attempts too large to solve exactly use the fact that a unique Boolean
solution a gives M^+ b = y^(a): the solution is found among the F2 solutions of the
source system and its state is sampled directly.
"""

import logging
from fractions import Fraction
from math import ceil, comb, exp, log, log1p
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config import Config
from errors import CapacityExceededError, InconsistentSystemError, NonUniqueSolutionError, VerificationError
from models.matrix import multilinear_monomials
from models.polynomial import Assignment, FieldTag, Monomial, PolySystem
from models.reduction import IsolationAttempt, LiftResult, ZeroSolutionSentinel
from models.reports import ExtractionRound, ExtractionTrace, PipelineResult, TradeoffRow
from models.sampling import MeasurementDistribution
from services.exact_linalg import exact_least_squares
from services.macaulay_service import build_boolean_macaulay
from services.polysys_service import brute_force_solutions, is_solution
from services.reduce_service import isolation_schedule, lift_f2_to_c, normalize_constants, vv_augment

logger = logging.getLogger(__name__)

# Leading constant of required_rounds
ROUNDS_CONSTANT = 6

State = Mapping[Monomial, Union[Fraction, float]]


def measurement_distribution(y: State) -> MeasurementDistribution:
    """p(R) proportional to y_R^2, exact for rational y"""
    entries = [(m, Fraction(v)) for m, v in y.items() if v]
    if not entries:
        raise ValueError("Cannot measure the zero vector")
    for m, _ in entries:
        if not m.is_multilinear or m.is_constant:
            raise ValueError(f"State coordinates must be non-constant multilinear monomials, got {m}")
    entries.sort(key=lambda item: item[0].sort_key)
    norm = sum((v * v for _, v in entries), Fraction(0))
    return MeasurementDistribution(support=tuple(m for m, _ in entries),
                                   probabilities=tuple(v * v / norm for _, v in entries))


def see_probability(s: int, d: int) -> Fraction:
    """Probability that one measurement contains a fixed element of S (|S| = s, subsets up to size d)"""
    if not 1 <= d <= s:
        raise ValueError(f"need 1 <= d <= s, got s={s}, d={d}")
    hit = sum(comb(s - 1, i - 1) for i in range(1, d + 1))
    total = sum(comb(s, i) for i in range(1, d + 1))
    return Fraction(hit, total)


def required_rounds(s: int, d: int, eps: float) -> int:
    """r = ceil(6 (s/d) ln(s/eps)), at least 1"""
    if not 1 <= d <= s:
        raise ValueError(f"need 1 <= d <= s, got s={s}, d={d}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return max(1, ceil(ROUNDS_CONSTANT * (s / d) * log(s / eps)))


def union_bound_miss(s: int, d: int, r: int) -> float:
    """s (1 - p)^r: bound on the probability that some element of S is never seen"""
    p = see_probability(s, d)
    if p == 1:
        return 0.0
    return exp(log(s) + r * log1p(-float(p)))


def sample_rounds(distribution: MeasurementDistribution, r: int, rng: np.random.Generator) -> List[Monomial]:
    probs = np.array([float(p) for p in distribution.probabilities])
    picks = rng.choice(len(distribution), size=r, p=probs / probs.sum())
    return [distribution.support[int(i)] for i in picks]


def perturb_state(y: State, noise: float, rng: np.random.Generator,
                  columns: Sequence[Monomial]) -> Dict[Monomial, float]:
    """Unit state at l2 distance noise from y / ||y||, spread over the given columns"""
    if noise < 0:
        raise ValueError("noise must be non-negative")
    vec = np.array([float(y.get(m, 0)) for m in columns])
    vec /= np.linalg.norm(vec)
    if noise > 0:
        direction = rng.standard_normal(len(columns))
        direction -= direction.dot(vec) * vec
        norm = np.linalg.norm(direction)
        if norm > 0:
            vec = vec + noise * direction / norm
            vec /= np.linalg.norm(vec)
    return {m: float(v) for m, v in zip(columns, vec) if v != 0}


def _float_distribution(y: Mapping[Monomial, float]) -> Tuple[List[Monomial], np.ndarray]:
    support = sorted((m for m, v in y.items() if v), key=lambda m: m.sort_key)
    weights = np.array([y[m] ** 2 for m in support])
    return support, weights / weights.sum()


def solution_state(system: PolySystem, cap: Optional[int] = None) -> Dict[Monomial, Fraction]:
    """
    Exact y = M^+ b of the Boolean Macaulay system at full degree.

    Raises:
        NonUniqueSolutionError: the matrix is rank deficient (run the isolation loop)
        InconsistentSystemError: no exact solution
    """
    ms = build_boolean_macaulay(system, cap=cap)
    y = exact_least_squares(ms.matrix.rows, ms.shape[1], ms.b)
    return {m: v for m, v in zip(ms.matrix.col_labels, y) if v}


def truncate_state(y: Mapping[Monomial, Fraction], d: int) -> Dict[Monomial, Fraction]:
    return {m: v for m, v in y.items() if m.degree <= d}


def _trace(samples: Sequence[Monomial], n: int, target: Sequence[int], seed: int, eps: float,
           d: int, r: int, noise: float) -> Tuple[ExtractionTrace, Assignment]:
    rounds = []
    recovered: set = set()
    for idx, m in enumerate(samples, start=1):
        recovered.update(m.support)
        rounds.append(ExtractionRound(index=idx, sampled=[i + 1 for i in m.support],
                                      recovered=[i + 1 for i in sorted(recovered)]))

    bits = tuple(1 if i in recovered else 0 for i in range(n))
    trace = ExtractionTrace(seed=seed, epsilon=eps, d=d, r=r, noise=noise, rounds=rounds,
                            assignment=list(bits), success=sorted(recovered) == sorted(target))
    logger.debug("Extraction over %d variables: r=%d, success=%s", n, r, trace.success)
    return trace, Assignment(bits)


def run_extraction(system: PolySystem, eps: float, seed: int, d: Optional[int] = None,
                   noise: float = 0.0, cap: Optional[int] = None) -> Tuple[ExtractionTrace, Assignment]:
    """
    Solve the Boolean Macaulay system, measure r times and union the sampled supports.

    Args:
        system: normalized C-tagged system with a unique Boolean solution
        eps: failure budget for the round count
        seed: RNG seed
        d: largest subset size kept in the state (default: number of variables)
        noise: l2 distance of the perturbed state from the exact one

    Returns:
        (trace, assignment) with variables in the recovered set set to 1
    """
    n = system.num_vars
    d = n if d is None else min(d, n)
    y = truncate_state(solution_state(system, cap), d)
    target = sorted(i for m in y if m.degree == 1 for i in m.support)
    r = required_rounds(n, d, eps)
    rng = np.random.default_rng(seed)

    if noise > 0:
        state = perturb_state(y, noise, rng, multilinear_monomials(n, d))
        support, probs = _float_distribution(state)
        samples = [support[int(i)] for i in rng.choice(len(support), size=r, p=probs)]
    else:
        samples = sample_rounds(measurement_distribution(y), r, rng)
    return _trace(samples, n, target, seed, eps, d, r, noise)


def sample_subset_rounds(support: Sequence[int], d: int, r: int, num_vars: int,
                         rng: np.random.Generator) -> List[Monomial]:
    """
    r measurements of the 0/1 state y^(a) truncated at degree d, where a has the given support.

    Every nonempty subset of the support with at most d elements is equally likely, so
    a draw picks its size by binomial weight and then the subset uniformly.
    """
    w = len(support)
    if w == 0:
        raise ValueError("Cannot measure the zero vector")
    sizes = np.arange(1, min(d, w) + 1)
    weights = np.array([comb(w, int(i)) for i in sizes], dtype=np.float64)
    picks = rng.choice(sizes, size=r, p=weights / weights.sum())
    pool = np.array(support, dtype=np.int64)
    samples = []
    for size in picks:
        chosen = rng.choice(pool, size=int(size), replace=False)
        samples.append(Monomial.from_mask(sum(1 << int(j) for j in chosen), num_vars))
    return samples


def run_solution_extraction(solution: Assignment, eps: float, seed: int,
                            d: Optional[int] = None) -> Tuple[ExtractionTrace, Assignment]:
    """
    Extraction from the state of a system whose unique Boolean solution is already known.

    With a unique solution the Boolean Macaulay matrix has full column rank and
    M^+ b = y^(solution), so the state is sampled without materializing M.
    """
    n = solution.num_vars
    d = n if d is None else min(d, n)
    r = required_rounds(n, d, eps)
    samples = sample_subset_rounds(solution.support, d, r, n, np.random.default_rng(seed))
    return _trace(samples, n, solution.support, seed, eps, d, r, 0.0)


def rounds_to_recover(distribution: MeasurementDistribution, target: Sequence[int],
                      rng: np.random.Generator, limit: int) -> int:
    """Measurements until the union covers target, capped at limit"""
    goal = set(target)
    seen: set = set()
    for count in range(1, limit + 1):
        seen.update(sample_rounds(distribution, 1, rng)[0].support)
        if goal <= seen:
            return count
    return limit


def tradeoff_table(system: PolySystem, eps: float, seed: int, trials: int = 200,
                   d_values: Optional[Sequence[int]] = None, cap: Optional[int] = None) -> List[TradeoffRow]:
    """required_rounds next to the empirical number of rounds until S is recovered, per d"""
    n = system.num_vars
    y = solution_state(system, cap)
    target = sorted(i for m in y if m.degree == 1 for i in m.support)
    children = np.random.SeedSequence(seed).spawn(n)
    rows = []
    for d in (d_values or range(1, n + 1)):
        rng = np.random.default_rng(children[(d - 1) % n])
        dist = measurement_distribution(truncate_state(y, d))
        r = required_rounds(n, d, eps)
        counts = [rounds_to_recover(dist, target, rng, 20 * r) for _ in range(trials)]
        rows.append(TradeoffRow(d=d, required_rounds=r, mean_rounds_to_recover=float(np.mean(counts)),
                                max_rounds_to_recover=int(max(counts)), trials=trials))
    return rows


def _child_seeds(seed: int, count: int) -> List[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def isolated_solution(lift: LiftResult, attempt: IsolationAttempt, f2_solutions: Sequence[Assignment],
                      combined: PolySystem) -> Assignment:
    """
    The Boolean solution of an isolation attempt, found through the F2 solutions of the source.

    Every F2 solution extends to exactly one lifted assignment, so the combined system
    has as many Boolean solutions as there are F2 solutions satisfying the affine rows.

    Raises:
        InconsistentSystemError: no F2 solution satisfies the affine rows
        NonUniqueSolutionError: several do
        VerificationError: the extended assignment does not solve the combined system
    """
    survivors = attempt.surviving(f2_solutions)
    if not survivors:
        raise InconsistentSystemError("No Boolean solution satisfies the affine rows")
    if len(survivors) > 1:
        raise NonUniqueSolutionError(solutions=len(survivors))
    full = attempt.extend_solution(lift, survivors[0])
    if not is_solution(combined, full):
        raise VerificationError(f"Lifted assignment {full} does not solve the combined system")
    return full


def full_pipeline(sys_f2: PolySystem, eps: float, seed: int, d: Optional[int] = None,
                  cap: Optional[int] = None) -> PipelineResult:
    """
    Lift, normalize, then walk the isolation schedule running an extraction per attempt.

    Attempts over at most EXACT_SOLVE_MAX_VARS lifted variables solve the Boolean
    Macaulay system exactly; larger ones sample the isolated solution state directly.
    The first candidate that satisfies sys_f2 mod 2 is returned. Attempts without a
    unique Boolean solution, or too large to build, are skipped.
    """
    if sys_f2.field is not FieldTag.F2:
        raise ValueError("full_pipeline expects an F2-tagged system")
    n = sys_f2.num_vars
    nonzero = PolySystem(tuple(p for p in sys_f2 if not p.is_zero), n, FieldTag.F2)
    if not len(nonzero):
        return PipelineResult(success=True, assignment=[0] * n, attempts=0, skipped=0,
                              rounds_total=0, zero_solution=True)
    if n == 0:
        # only constants are left, nothing to isolate
        solved = is_solution(sys_f2, Assignment(()))
        return PipelineResult(success=solved, assignment=[] if solved else None, attempts=0, skipped=0,
                              rounds_total=0)

    lift = lift_f2_to_c(nonzero)
    normalized = normalize_constants(lift.system)
    if isinstance(normalized, ZeroSolutionSentinel):
        zero = Assignment.zeros(n)
        return PipelineResult(success=is_solution(sys_f2, zero), assignment=list(zero.bits),
                              attempts=0, skipped=0, rounds_total=0, zero_solution=True)

    exact_limit = Config.capacity_cap("exact_solve_vars")
    f2_solutions: Optional[List[Assignment]] = None
    schedule = isolation_schedule(n, eps)
    seeds = _child_seeds(seed, sum(trials for _, trials in schedule))
    attempts = skipped = rounds_total = 0
    cursor = 0
    for k, trials in schedule:
        for _ in range(trials):
            row_seed, sample_seed = _child_seeds(seeds[cursor], 2)
            cursor += 1
            attempts += 1
            attempt = vv_augment(lift.system, k, row_seed, x_vars=n)
            combined = normalize_constants(attempt.combined)
            if isinstance(combined, ZeroSolutionSentinel):
                candidate = Assignment.zeros(n)
            else:
                try:
                    if combined.num_vars <= exact_limit:
                        trace, lifted = run_extraction(combined, eps, sample_seed, d=d, cap=cap)
                    else:
                        if f2_solutions is None:
                            f2_solutions = brute_force_solutions(sys_f2)
                        solution = isolated_solution(lift, attempt, f2_solutions, combined)
                        trace, lifted = run_solution_extraction(solution, eps, sample_seed, d=d)
                except (NonUniqueSolutionError, InconsistentSystemError, CapacityExceededError) as e:
                    skipped += 1
                    logger.debug("Attempt k=%d skipped: %s", k, e)
                    continue
                rounds_total += trace.r
                candidate = Assignment(lifted.bits[:n])
            if is_solution(sys_f2, candidate):
                logger.info("Pipeline found %s after %d attempts (k=%d)", candidate, attempts, k)
                return PipelineResult(success=True, assignment=list(candidate.bits), attempts=attempts,
                                      skipped=skipped, rounds_total=rounds_total, k=k)

    logger.info("Isolation schedule exhausted after %d attempts (%d skipped)", attempts, skipped)
    return PipelineResult(success=False, attempts=attempts, skipped=skipped, rounds_total=rounds_total)
