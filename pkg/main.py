#!/usr/bin/env python3
"""
Command-line entry point for the Boolean Macaulay toolkit.

Subcommands: reduce, build, oracle, analyze, lowerbound, extract, bench.
Exit codes: 0 success, 1 unexpected error, 2 malformed input, 3 capacity exceeded,
4 verification failure.
"""

import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Annotated, List, Literal, Optional

from cyclopts import App, Parameter
from cyclopts.exceptions import CycloptsError
from rich.console import Console
from rich.logging import RichHandler

from config import Config, VERSION
from errors import (
    CapacityExceededError, DimensionMismatchError, InconsistentSystemError, MacaulayToolError,
    NonUniqueSolutionError, OracleRangeError, SystemParseError, VerificationError,
)
from models.matrix import DegreeKind, DegreeMode, Flavor, MacaulayDescriptor, RowLabel
from models.polynomial import FieldTag, Monomial, Polynomial
from models.reduction import ZeroSolutionSentinel
from models.reports import (
    PdReport, Provenance, ReportHeader, RunConfig, VarProvenance, fraction_str,
)
from services import condition_service, macaulay_service, reduce_service, report_service, sampler_service
from services.polysys_service import (
    as_assignment, is_solution, load_system, save_system, unique_solution_system,
)

logger = logging.getLogger("main")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_MALFORMED = 2
EXIT_CAPACITY = 3
EXIT_VERIFICATION = 4

app = App(name="macaulay", version=VERSION,
          help="Macaulay and Boolean Macaulay linear systems, condition-number bounds and extraction.")

Format = Literal["text", "csv"]
KindName = Literal["max", "total"]


def configure_logging(verbose: bool = False) -> None:
    level = logging.INFO if verbose else getattr(logging, Config.LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(
        level=level, format="%(message)s", force=True,
        handlers=[RichHandler(console=Console(stderr=True), show_time=False, show_path=False)],
    )


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the documented exit codes"""
    if isinstance(exc, CapacityExceededError):
        return EXIT_CAPACITY
    if isinstance(exc, (VerificationError, NonUniqueSolutionError, InconsistentSystemError)):
        return EXIT_VERIFICATION
    if isinstance(exc, (SystemParseError, DimensionMismatchError, OracleRangeError, CycloptsError,
                        FileNotFoundError, ValueError)):
        return EXIT_MALFORMED
    return EXIT_UNEXPECTED


def _header(config: RunConfig) -> ReportHeader:
    return ReportHeader(seed=config.seed, config={**config.replay_dict(), "caps": Config.as_dict()})


def _kind(name: KindName, d: int) -> DegreeKind:
    return DegreeKind(DegreeMode(name), d)


def _parse_exponents(text: str, num_vars: int) -> Monomial:
    try:
        exps = tuple(int(e) for e in text.split(",")) if text else ()
    except ValueError:
        raise ValueError(f"Exponent list must be comma separated integers, got '{text}'")
    if len(exps) != num_vars:
        raise DimensionMismatchError(f"Exponent list has {len(exps)} entries, system has {num_vars} variables")
    return Monomial(exps)


def _parse_row(text: str, num_vars: int) -> RowLabel:
    index, sep, exps = text.partition(":")
    if not sep:
        raise ValueError(f"Row label must look like 'poly_index:e1,...,en', got '{text}'")
    return RowLabel(_parse_exponents(exps, num_vars), int(index))


@app.command(name="reduce")
def reduce_command(system_file: Path, *, output: Path, k: Optional[int] = None, seed: int = Config.DEFAULT_SEED,
                   normalize: bool = True, verbose: bool = False) -> int:
    """Lift an F2 system to C, optionally append isolation rows, and normalize constant terms.

    Parameters
    ----------
    system_file: Path
        Input system file.
    output: Path
        Output system file; provenance goes to <output>.provenance.json.
    k: Optional[int]
        Append k+2 random affine rows (isolation attempt).
    seed: int
        Seed for the affine rows.
    normalize: bool
        Run the constant-term normalization.
    """
    configure_logging(verbose)
    config = RunConfig(subcommand="reduce", inputs=[str(system_file)], output=str(output), seed=seed,
                       extra={"k": k, "normalize": normalize})
    system = load_system(system_file)
    provenance = Provenance(header=_header(config), input=str(system_file), operation="reduce", seeds=[seed])

    if system.field is FieldTag.F2:
        lift = reduce_service.lift_f2_to_c(system)
        system = lift.system
        provenance.var_map = [VarProvenance(index=v.index, name=v.name, kind=v.kind, source=v.source, bit=v.bit)
                              for v in lift.var_map]
    elif not system.includes_field_equations:
        system = system.with_field_equations()

    if k is not None:
        x_vars = len([v for v in provenance.var_map if v.kind == "x"]) or system.num_vars
        attempt = reduce_service.vv_augment(system, k, seed, x_vars=x_vars)
        system = attempt.combined
        provenance.affine_rows = [str(row) for row in attempt.affine_rows]

    if normalize:
        provenance.pivot = reduce_service.constant_pivot(system)
        normalized = reduce_service.normalize_constants(system)
        if isinstance(normalized, ZeroSolutionSentinel):
            provenance.zero_solution = True
        else:
            system = normalized

    save_system(system, output)
    sidecar = Path(str(output) + ".provenance.json")
    sidecar.write_text(provenance.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote %s and %s", output, sidecar)
    return EXIT_OK


@app.command(name="build")
def build_command(system_file: Path, *, flavor: Literal["plain", "boolean"] = "boolean",
                  degree_kind: Annotated[KindName, Parameter(name="--degree-kind")] = "max",
                  d: Annotated[Optional[int], Parameter(name="--d")] = None,
                  cap: Optional[int] = None, dedup: bool = False, output: Optional[Path] = None,
                  verbose: bool = False) -> int:
    """Materialize a Macaulay or Boolean Macaulay system and write the matrix file.

    Parameters
    ----------
    flavor: Literal["plain", "boolean"]
        Matrix flavor. Boolean matrices are bounded by total degree (default d = n).
    degree_kind: Literal["max", "total"]
        Degree kind of the plain matrix.
    d: Optional[int]
        Degree bound (plain default: 3n for max, n for total).
    cap: Optional[int]
        Column cap, bounded by the hard safety cap.
    dedup: bool
        Drop zero and duplicate Boolean rows.
    """
    configure_logging(verbose)
    system = load_system(system_file)
    n = system.num_vars
    config = RunConfig(subcommand="build", inputs=[str(system_file)], output=str(output) if output else None,
                       degree_kind=degree_kind, d=d, cap=cap, extra={"flavor": flavor, "dedup": dedup})
    if flavor == "boolean":
        ms = macaulay_service.build_boolean_macaulay(system, d, cap, dedup)
    else:
        d = d if d is not None else (3 * n if degree_kind == "max" else n)
        ms = macaulay_service.build_macaulay(system.with_field_equations(), _kind(degree_kind, d), cap)
    report_service.emit(macaulay_service.format_matrix(ms, _header(config)), output)
    return EXIT_OK


@app.command(name="oracle")
def oracle_command(system_file: Path, *, flavor: Literal["plain", "boolean"] = "boolean",
                   degree_kind: Annotated[KindName, Parameter(name="--degree-kind")] = "max",
                   d: Annotated[Optional[int], Parameter(name="--d")] = None,
                   row: Optional[str] = None, col: Optional[str] = None, k: Optional[int] = None,
                   verbose: bool = False) -> int:
    """Answer entry-oracle queries without materializing the matrix.

    Parameters
    ----------
    row: Optional[str]
        Row label 'poly_index:e1,...,en' (poly_index counts from 0).
    col: Optional[str]
        Column monomial 'e1,...,en'.
    k: Optional[int]
        Position (from 0) of the requested nonzero entry.
    """
    configure_logging(verbose)
    system = load_system(system_file)
    n = system.num_vars
    if flavor == "boolean":
        system = system.core()
        descriptor = MacaulayDescriptor(system, Flavor.BOOLEAN, DegreeKind.total(d or n))
    else:
        d = d if d is not None else (3 * n if degree_kind == "max" else n)
        descriptor = MacaulayDescriptor(system.with_field_equations(), Flavor.PLAIN, _kind(degree_kind, d))

    if row is not None and k is not None:
        mono = macaulay_service.entry_col_oracle(descriptor, _parse_row(row, n), k)
        print(",".join(map(str, mono.exponents)))
    elif row is not None and col is not None:
        value = macaulay_service.entry_value_oracle(descriptor, _parse_row(row, n), _parse_exponents(col, n))
        print(fraction_str(value))
    elif col is not None and k is not None:
        label = macaulay_service.entry_row_oracle(descriptor, _parse_exponents(col, n), k)
        print(f"{label.poly_index}:{','.join(map(str, label.multiplier.exponents))}")
    else:
        raise ValueError("Give --row with --k, --row with --col, or --col with --k")
    return EXIT_OK


@app.command(name="analyze")
def analyze_command(system_file: Path, *, flavor: Literal["plain", "boolean"] = "boolean",
                    degree_kind: Annotated[KindName, Parameter(name="--degree-kind")] = "max",
                    d: Annotated[Optional[int], Parameter(name="--d")] = None,
                    h: Annotated[Optional[int], Parameter(name="--h")] = None,
                    format: Annotated[Format, Parameter(name="--format")] = "text",
                    cap: Optional[int] = None, output: Optional[Path] = None, verbose: bool = False) -> int:
    """Compute kappa and kappa_b and compare them with the analytic lower bounds.

    Parameters
    ----------
    h: Optional[int]
        Weight for the search-cost comparators (default: minimum solution weight).
    """
    configure_logging(verbose)
    system = load_system(system_file)
    config = RunConfig(subcommand="analyze", inputs=[str(system_file)], output=str(output) if output else None,
                       degree_kind=degree_kind, d=d, h=h, cap=cap, format=format, extra={"flavor": flavor})
    kind = None
    if flavor == "boolean":
        kind = DegreeKind.total(d) if d is not None else None
    elif d is not None:
        kind = _kind(degree_kind, d)
    elif degree_kind == "total":
        kind = DegreeKind.total(system.num_vars)
    report = condition_service.analyze_system(system, flavor, kind, cap, cost_weight=h)
    report.header = _header(config)
    report_service.emit(report_service.bound_table(report, format), output)
    return EXIT_OK


@app.command(name="lowerbound")
def lowerbound_command(*, n: Annotated[int, Parameter(name="--n")],
                       d: Annotated[Optional[int], Parameter(name="--d")] = None,
                       degree_kind: Annotated[KindName, Parameter(name="--degree-kind")] = "max",
                       rule: str = "h^h/2", combined: bool = True,
                       format: Annotated[Format, Parameter(name="--format")] = "text",
                       output: Optional[Path] = None, verbose: bool = False) -> int:
    """Certify G^(h) - gamma(h) 11^T positive definite for every h (exact LDL^T).

    Parameters
    ----------
    n: int
        Number of variables.
    d: Optional[int]
        Degree bound (default 3n).
    rule: str
        Name of the gamma(h) rule.
    combined: bool
        Also certify 2G - [min(i,j)^min(i,j)] (max degree only).
    """
    configure_logging(verbose)
    d = 3 * n if d is None else d
    config = RunConfig(subcommand="lowerbound", n=n, d=d, degree_kind=degree_kind, format=format,
                       output=str(output) if output else None, extra={"rule": rule})
    verdicts = condition_service.certify_pd_bound(n, rule, d, degree_kind)
    combined_ok = None
    if combined and degree_kind == "max":
        combined_ok = condition_service.certify_combined_bound(n, d).certified
    report = PdReport(header=_header(config), n=n, d=d, degree_kind=degree_kind, rule=rule,
                      verdicts=verdicts, combined_certified=combined_ok)
    report_service.emit(report_service.pd_table(report, format), output)
    if not report.all_certified:
        failed = [v.h for v in verdicts if not v.certified]
        raise VerificationError(f"Certificate failed (h in {failed}, combined {combined_ok})")
    return EXIT_OK


@app.command(name="extract")
def extract_command(system_file: Path, *, eps: float = Config.DEFAULT_EPS, seed: int = Config.DEFAULT_SEED,
                    d: Annotated[Optional[int], Parameter(name="--d")] = None, noise: float = 0.0,
                    tradeoff: bool = False, trials: int = 200, cap: Optional[int] = None,
                    format: Annotated[Format, Parameter(name="--format")] = "text",
                    output: Optional[Path] = None, verbose: bool = False) -> int:
    """Recover a solution by sampling the simulated solution state.

    F2 systems go through the full pipeline (lift, normalize, isolation, extraction).
    C systems must have a unique solution.

    Parameters
    ----------
    d: Optional[int]
        Largest subset size kept in the state (default: all variables).
    noise: float
        l2 perturbation of the state before sampling.
    tradeoff: bool
        Emit the d versus rounds table instead of a single trace.
    """
    configure_logging(verbose)
    system = load_system(system_file)
    config = RunConfig(subcommand="extract", inputs=[str(system_file)], output=str(output) if output else None,
                       seed=seed, eps=eps, d=d, cap=cap, format=format,
                       extra={"noise": noise, "tradeoff": tradeoff, "trials": trials})
    header = _header(config)

    if system.field is FieldTag.F2:
        result = sampler_service.full_pipeline(system, eps, seed, d=d, cap=cap)
        result.header = header
        report_service.emit(report_service.pipeline_table(result, format), output)
        if not result.success:
            raise VerificationError(f"Isolation schedule exhausted after {result.attempts} attempts without a solution")
        return EXIT_OK

    normalized = reduce_service.normalize_constants(system)
    if isinstance(normalized, ZeroSolutionSentinel):
        report_service.emit(report_service.render(format, "Extraction", ["assignment", "note"],
                                                  [[str(normalized.solution), "no constant terms"]], header), output)
        return EXIT_OK

    if tradeoff:
        rows = sampler_service.tradeoff_table(normalized, eps, seed, trials, cap=cap)
        report_service.emit(report_service.tradeoff_render(rows, format, header), output)
        return EXIT_OK

    trace, assignment = sampler_service.run_extraction(normalized, eps, seed, d=d, noise=noise, cap=cap)
    report_service.emit(report_service.trace_table(trace, format, header), output)
    if not is_solution(system, assignment):
        raise VerificationError(f"Recovered assignment {assignment} does not solve the system")
    return EXIT_OK


def _pd_sweep_row(n: int) -> List:
    verdicts = condition_service.certify_pd_bound(n)
    return [n, 3 * n, all(v.certified for v in verdicts), condition_service.certify_combined_bound(n).certified]


def _binomial_row(n: int, h: Optional[int] = None) -> List:
    checks = [condition_service.search_costs(n, w) for w in range(1, n // 2 + 1) if h is None or w == h]
    return [n, len(checks), all(c.entropy_bound_holds for c in checks),
            all(c.geometric_bound_holds for c in checks if c.geometric_defined)]


def _kappa_row(n: int, seed: int) -> List:
    weight = max(1, n // 2)
    target = as_assignment([1] * weight + [0] * (n - weight))
    # x_n has no constant term and keeps ||M|| >= 1
    guard = Polynomial.from_terms([(Monomial.variable(n - 1, n), 1)], n)
    system = unique_solution_system(target, seed).extend([guard])
    report = condition_service.analyze_system(system, Flavor.BOOLEAN)
    bound = report.analytic_lower_bounds[0]
    return [n, report.h, report.t, report.kappa, report.kappa_b, bound.value, bound.holds]


@app.command(name="bench")
def bench_command(*, n_max: Annotated[int, Parameter(name="--n-max")] = 6, seed: int = Config.DEFAULT_SEED,
                  h: Annotated[Optional[int], Parameter(name="--h")] = None,
                  workers: int = 4, format: Annotated[Format, Parameter(name="--format")] = "text",
                  output: Optional[Path] = None, verbose: bool = False) -> int:
    """Run the comparison tables and bound sweeps across n = 1..n_max.

    Parameters
    ----------
    h: Optional[int]
        Restrict the comparison and binomial tables to this weight.
    """
    configure_logging(verbose)
    if h is not None and h < 1:
        raise ValueError(f"--h must be at least 1, got {h}")
    config = RunConfig(subcommand="bench", seed=seed, format=format, n=n_max, h=h,
                       output=str(output) if output else None, extra={"workers": workers})
    header = _header(config)
    sizes = list(range(1, n_max + 1))
    kappa_sizes = [n for n in sizes if 3 <= n <= min(n_max, 6)]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        pd_rows = list(pool.map(_pd_sweep_row, sizes))
        binom_rows = list(pool.map(lambda n: _binomial_row(n, h), sizes))
        kappa_rows = list(pool.map(lambda n: _kappa_row(n, seed + n), kappa_sizes))

    comparisons = []
    for mode in ("max", "total", "boolean"):
        comparisons.extend(condition_service.comparison_rows(sizes, mode, h))

    parts = [
        report_service.comparison_table(comparisons, format, header),
        report_service.render(format, "PD certification sweep (gamma = h^h/2)",
                              ["n", "d", "all h certified", "combined"], pd_rows, header),
        report_service.render(format, "Binomial bounds for 1 <= h <= n/2",
                              ["n", "h values", "3 sqrt(h) C(n,h)", "geometric"], binom_rows, header),
        report_service.render(format, "Boolean kappa_b on planted unique-solution systems",
                              ["n", "h", "t", "kappa", "kappa_b", "1/2 sqrt(2^h-1)", "holds"], kappa_rows, header),
    ]
    report_service.emit("\n".join(parts), output)
    verified = all(r[2] and r[3] for r in pd_rows) and all(r[2] and r[3] for r in binom_rows) \
        and all(r[-1] for r in kappa_rows)
    if not verified:
        raise VerificationError("A bound in the bench sweep did not hold")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    try:
        result = app(argv, exit_on_error=False)
    except MacaulayToolError as e:
        logger.error("%s", e)
        return exit_code_for(e)
    except (CycloptsError, FileNotFoundError, ValueError) as e:
        logging.getLogger("main").error("%s", e)
        return exit_code_for(e)
    except Exception as e:
        logger.exception("Unexpected error: %s", e)
        return EXIT_UNEXPECTED
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
