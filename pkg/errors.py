"""Exception types shared by the services and mapped to exit codes by main.py."""


class MacaulayToolError(Exception):
    """Base class for every error raised on purpose by this package."""


class SystemParseError(MacaulayToolError):
    def __init__(self, message: str, line: int = None, term: int = None):
        self.line = line
        self.term = term
        location = ""
        if line is not None:
            location = f"line {line}"
            if term is not None:
                location += f", term {term}"
            location += ": "
        super().__init__(f"{location}{message}")


class DimensionMismatchError(MacaulayToolError):
    pass


class CapacityExceededError(MacaulayToolError):
    def __init__(self, what: str, requested: int, cap: int):
        self.what = what
        self.requested = requested
        self.cap = cap
        super().__init__(f"{what} would need {requested}, above the configured cap {cap}")


class OracleRangeError(MacaulayToolError, IndexError):
    pass


class SingularMatrixError(MacaulayToolError, ArithmeticError):
    pass


class NonUniqueSolutionError(MacaulayToolError):
    def __init__(self, rank: int = None, columns: int = None, solutions: int = None):
        self.rank = rank
        self.columns = columns
        self.solutions = solutions
        if solutions is not None:
            detail = f"System has {solutions} Boolean solutions"
        else:
            detail = f"Boolean Macaulay matrix has rank {rank} < {columns} columns"
        super().__init__(
            f"{detail}: the system does not have a unique solution. "
            f"Run it through the isolation loop (full_pipeline)."
        )


class InconsistentSystemError(MacaulayToolError):
    pass


class VerificationError(MacaulayToolError):
    pass
