"""Text (rich tables) and CSV rendering of reports. Every artifact starts with a replay header."""

import csv
import io
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Union

from rich.console import Console
from rich.table import Table

from models.reports import (
    BoundReport, ComparisonRow, ExtractionTrace, PdReport, PipelineResult, ReportHeader, SearchCosts,
    TradeoffRow,
)

logger = logging.getLogger(__name__)

REPORT_WIDTH = 120


def mark(flag: Optional[bool]) -> str:
    if flag is None:
        return "-"
    return "✓" if flag else "✗"


def header_lines(header: ReportHeader) -> List[str]:
    return [
        f"# {header.tool} {header.version}",
        f"# seed {header.seed if header.seed is not None else '-'}",
        f"# config {json.dumps(header.config, sort_keys=True, default=str)}",
    ]


def _cell(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return mark(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return str(value)


def render_text(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]], header: ReportHeader,
                footer: Sequence[str] = ()) -> str:
    buffer = io.StringIO()
    console = Console(file=buffer, width=REPORT_WIDTH, no_color=True, force_terminal=False,
                      color_system=None, highlight=False)
    for line in header_lines(header):
        console.print(line, markup=False)
    table = Table(title=title)
    for col in columns:
        table.add_column(col)
    for row in rows:
        table.add_row(*(_cell(v) for v in row))
    console.print(table)
    for line in footer:
        console.print(line, markup=False)
    return buffer.getvalue()


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]], header: ReportHeader) -> str:
    buffer = io.StringIO()
    for line in header_lines(header):
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if v is None else (" ".join(map(str, v)) if isinstance(v, (list, tuple)) else v)
                         for v in row])
    return buffer.getvalue()


def render(fmt: str, title: str, columns: Sequence[str], rows: Sequence[Sequence[Any]],
           header: ReportHeader, footer: Sequence[str] = ()) -> str:
    if fmt == "csv":
        return render_csv(columns, rows, header)
    if fmt == "text":
        return render_text(title, columns, rows, header, footer)
    raise ValueError(f"Unknown output format '{fmt}'")


def emit(text: str, output: Optional[Union[str, Path]] = None) -> None:
    """Write to the output path, or to stdout"""
    if output is None:
        print(text, end="")
        return
    Path(output).write_text(text, encoding="utf-8")
    logger.info("Wrote %s", output)


# -- report-specific tables ---------------------------------------------------

def pd_table(report: PdReport, fmt: str) -> str:
    columns = ["h", "gamma", "certified", "min pivot", "first non-positive"]
    rows = []
    for v in report.verdicts:
        # pivots are exact strings
        smallest = min(v.pivots, key=Fraction) if v.pivots else None
        rows.append([v.h, v.gamma, v.certified, smallest, v.first_nonpositive])
    footer = [f"n={report.n} d={report.d} kind={report.degree_kind} rule={report.rule}",
              f"combined 2G - min(i,j)^min(i,j): {mark(report.combined_certified)}",
              f"all certified: {mark(report.all_certified)}"]
    return render(fmt, "Positive-definiteness certificates", columns, rows, report.header, footer)


def bound_table(report: BoundReport, fmt: str) -> str:
    columns = ["quantity", "value", "premise", "holds"]
    rows: List[List[Any]] = [
        ["flavor", report.flavor, None, None],
        ["degree", f"{report.degree_kind}({report.d})", None, None],
        ["shape", f"{report.shape[0]}x{report.shape[1]}", None, None],
        ["rank", report.rank, None, None],
        ["solutions t", report.t, None, None],
        ["min weight h", report.h if report.h is not None else "-", None, None],
        ["kappa", report.kappa, None, None],
        ["kappa_b", report.kappa_b, None, None],
        ["||M||", report.norm_matrix, None, None],
        ["||M^+ b||", report.norm_pinv_b, None, None],
    ]
    for bound in report.analytic_lower_bounds:
        rows.append([f"lower bound {bound.name}", bound.value, bound.premise, bound.holds])
    if report.unique_identity_residual is not None:
        rows.append(["unique-solution identity residual", report.unique_identity_residual, None, None])
    if report.search_costs is not None:
        rows.extend(search_cost_rows(report.search_costs))
    return render(fmt, "Condition-number report", columns, rows, report.header)


def search_cost_rows(costs: SearchCosts) -> List[List[Any]]:
    return [
        ["C(n,h)", costs.binomial, None, None],
        ["sum_{j<=h} C(n,j)", costs.prefix_sum, None, None],
        ["3 sqrt(h) C(n,h)", costs.entropy_bound, None, costs.entropy_bound_holds],
        ["geometric bound", costs.geometric_bound or "undefined", costs.geometric_defined,
         costs.geometric_bound_holds],
        ["grover sqrt C(n,h)", costs.grover, None, None],
        ["grover h sqrt C(n,h)", costs.grover_weighted, None, None],
        ["grover h^1/4 sqrt C(n,h)", costs.grover_quarter, None, None],
    ]


def trace_table(trace: ExtractionTrace, fmt: str, header: ReportHeader) -> str:
    columns = ["round", "sampled", "recovered"]
    rows = [[r.index, "{" + ",".join(f"x{i}" for i in r.sampled) + "}",
             "{" + ",".join(f"x{i}" for i in r.recovered) + "}"] for r in trace.rounds]
    footer = [f"r={trace.r} d={trace.d} eps={trace.epsilon} noise={trace.noise}",
              f"assignment ({','.join(map(str, trace.assignment))}) recovered support matches: {mark(trace.success)}"]
    return render(fmt, "Extraction trace", columns, rows, header, footer)


def pipeline_table(result: PipelineResult, fmt: str) -> str:
    columns = ["success", "assignment", "attempts", "skipped", "rounds", "k"]
    assignment = "(" + ",".join(map(str, result.assignment)) + ")" if result.assignment is not None else "-"
    rows = [[result.success, assignment, result.attempts, result.skipped, result.rounds_total,
             result.k if result.k is not None else "-"]]
    return render(fmt, "Pipeline result", columns, rows, result.header)


def comparison_table(rows: Sequence[ComparisonRow], fmt: str, header: ReportHeader) -> str:
    columns = ["kind", "n", "h", "d", "kappa_b lower bound", "classical", "grover", "h grover", "h^1/4 grover"]
    data = [[r.degree_kind, r.n, r.h, r.d, r.kappa_b_lower_bound, r.classical_search, r.grover,
             r.grover_weighted, r.grover_quarter] for r in rows]
    return render(fmt, "Lower bounds against search costs", columns, data, header)


def tradeoff_render(rows: Sequence[TradeoffRow], fmt: str, header: ReportHeader) -> str:
    columns = ["d", "required rounds", "mean rounds to recover", "max rounds to recover", "trials"]
    data = [[r.d, r.required_rounds, r.mean_rounds_to_recover, r.max_rounds_to_recover, r.trials] for r in rows]
    return render(fmt, "Degree / rounds trade-off", columns, data, header)
