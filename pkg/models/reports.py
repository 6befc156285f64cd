"""
Pydantic records for everything that leaves the process: verdicts, bound reports,
extraction traces, pipeline results, run configuration and provenance.

Exact rationals are carried as "p/q" strings.
"""

from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field

from config import TOOL_NAME, VERSION


def fraction_str(value: Fraction) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


class ReportHeader(BaseModel):
    tool: str = TOOL_NAME
    version: str = VERSION
    seed: Optional[int] = None
    config: Dict[str, Any] = Field(default_factory=dict)


class BlockReduceVerdict(BaseModel):
    num_vars: int
    d: int
    num_polys: int
    macaulay_shape: Tuple[int, int]
    block_shape: Tuple[int, int]
    identity_dim: int
    rank_macaulay: int
    rank_block: int
    rank_stacked: int
    row_space_equal: bool


class CorrespondenceVerdict(BaseModel):
    num_vars: int
    brute_force: List[str]
    status: Literal["unique", "rank_deficient", "inconsistent"]
    recovered: Optional[str] = None
    recovered_weight: Optional[int] = None
    forward_ok: bool  # least-squares solutions project onto brute-force solutions
    backward_ok: bool  # every brute-force monomial vector satisfies M y = b

    @property
    def ok(self) -> bool:
        return self.forward_ok and self.backward_ok


class PdVerdict(BaseModel):
    h: int
    gamma: str
    certified: bool
    pivots: List[str]
    first_nonpositive: Optional[int] = None


class PdReport(BaseModel):
    header: ReportHeader = Field(default_factory=ReportHeader)
    n: int
    d: int
    degree_kind: str
    rule: str
    verdicts: List[PdVerdict]
    combined_certified: Optional[bool] = None

    @property
    def all_certified(self) -> bool:
        return all(v.certified for v in self.verdicts) and self.combined_certified is not False


class SearchCosts(BaseModel):
    n: int
    h: int
    binomial: int
    prefix_sum: int  # sum_{j=0..h} C(n,j)
    nonzero_prefix_sum: int  # sum_{j=1..h} C(n,j)
    entropy_bound: float  # 3 sqrt(h) C(n,h)
    entropy_bound_holds: Optional[bool] = None
    geometric_defined: bool
    geometric_bound: Optional[str] = None
    geometric_bound_holds: Optional[bool] = None
    grover: float
    grover_weighted: float
    grover_quarter: float
    d: Optional[int] = None
    norm_bound_max: Optional[float] = None
    norm_bound_total: Optional[float] = None


class AnalyticBound(BaseModel):
    name: str
    value: float
    premise: bool
    holds: Optional[bool] = None


class BoundReport(BaseModel):
    header: ReportHeader = Field(default_factory=ReportHeader)
    flavor: str
    degree_kind: str
    n: int
    d: int
    h: Optional[int] = None
    t: int
    shape: Tuple[int, int]
    rank: int
    kappa: float
    kappa_b: float
    norm_matrix: float
    norm_b: float
    norm_pinv_b: float
    analytic_lower_bounds: List[AnalyticBound]
    unique_identity_residual: Optional[float] = None
    search_costs: Optional[SearchCosts] = None


class ExtractionRound(BaseModel):
    index: int
    sampled: List[int]  # 1-based variable indices of the measured subset
    recovered: List[int]


class ExtractionTrace(BaseModel):
    seed: int
    epsilon: float
    d: int
    r: int
    noise: float = 0.0
    rounds: List[ExtractionRound]
    assignment: List[int]
    success: Optional[bool] = None


class PipelineResult(BaseModel):
    header: ReportHeader = Field(default_factory=ReportHeader)
    success: bool
    assignment: Optional[List[int]] = None
    attempts: int
    skipped: int
    rounds_total: int
    k: Optional[int] = None
    zero_solution: bool = False


class TradeoffRow(BaseModel):
    d: int
    required_rounds: int
    mean_rounds_to_recover: float
    max_rounds_to_recover: int
    trials: int


class ComparisonRow(BaseModel):
    n: int
    h: int
    d: int
    degree_kind: str
    kappa_b_lower_bound: float
    classical_search: int
    grover: float
    grover_weighted: float
    grover_quarter: float


class VarProvenance(BaseModel):
    index: int
    name: str
    kind: str
    source: int
    bit: int


class Provenance(BaseModel):
    header: ReportHeader = Field(default_factory=ReportHeader)
    input: Optional[str] = None
    operation: str
    var_map: List[VarProvenance] = Field(default_factory=list)
    seeds: List[int] = Field(default_factory=list)
    affine_rows: List[str] = Field(default_factory=list)
    pivot: Optional[int] = None
    zero_solution: bool = False


class RunConfig(BaseModel):
    subcommand: Literal["reduce", "build", "oracle", "analyze", "lowerbound", "extract", "bench"]
    inputs: List[str] = Field(default_factory=list)
    output: Optional[str] = None
    seed: int = 0
    eps: float = 0.1
    degree_kind: Literal["max", "total"] = "max"
    d: Optional[int] = None
    n: Optional[int] = None
    h: Optional[int] = None
    cap: Optional[int] = None
    format: Literal["text", "csv"] = "text"
    extra: Dict[str, Any] = Field(default_factory=dict)

    def replay_dict(self) -> Dict[str, Any]:
        """Config as embedded in report headers."""
        return self.model_dump(exclude={"output"}, exclude_none=True)
