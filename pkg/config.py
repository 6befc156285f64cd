import os

# Load environment variables from .env file if available
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # dotenv not available, use environment variables directly
    pass

TOOL_NAME = "boolean-macaulay-toolkit"
VERSION = "1.0.0"


class Config:
    # Materialization caps (desk scale)
    MACAULAY_MAX_COLUMNS = int(os.getenv("MACAULAY_MAX_COLUMNS", "100000"))
    BOOLEAN_MACAULAY_MAX_VARS = int(os.getenv("BOOLEAN_MACAULAY_MAX_VARS", "14"))
    BRUTE_FORCE_MAX_VARS = int(os.getenv("BRUTE_FORCE_MAX_VARS", "20"))
    # Pipeline attempts up to this many lifted variables are solved by exact least squares
    EXACT_SOLVE_MAX_VARS = int(os.getenv("EXACT_SOLVE_MAX_VARS", "8"))

    # Default for the CLI --cap flag (column cap for both matrix flavors)
    MACAULAY_CAP = os.getenv("MACAULAY_CAP")

    # Hard safety caps, never overridable
    HARD_MAX_COLUMNS = 1_000_000
    HARD_MAX_BOOLEAN_VARS = 20
    HARD_MAX_BRUTE_FORCE_VARS = 26

    # Run defaults
    DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "0"))
    DEFAULT_EPS = float(os.getenv("DEFAULT_EPS", "0.1"))
    LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")

    @classmethod
    def capacity_cap(cls, kind: str, override: int = None) -> int:
        """
        Get the effective capacity cap for a resource kind.

        Args:
            kind: One of 'columns', 'boolean_vars', 'brute_force_vars', 'exact_solve_vars'
            override: Optional caller-supplied cap

        Returns:
            The cap to enforce

        Raises:
            ValueError: If the kind is unknown or the override exceeds the hard cap
        """
        kind = kind.lower()

        if kind == "columns":
            default, hard = cls.MACAULAY_MAX_COLUMNS, cls.HARD_MAX_COLUMNS
            # Environment-level default for --cap applies to columns only
            if override is None and cls.MACAULAY_CAP:
                override = int(cls.MACAULAY_CAP)
        elif kind == "boolean_vars":
            default, hard = cls.BOOLEAN_MACAULAY_MAX_VARS, cls.HARD_MAX_BOOLEAN_VARS
        elif kind == "exact_solve_vars":
            default, hard = cls.EXACT_SOLVE_MAX_VARS, cls.HARD_MAX_BOOLEAN_VARS
        elif kind == "brute_force_vars":
            default, hard = cls.BRUTE_FORCE_MAX_VARS, cls.HARD_MAX_BRUTE_FORCE_VARS
        else:
            raise ValueError(f"Unknown capacity kind: {kind}")

        cap = default if override is None else int(override)

        if cap < 0:
            raise ValueError(f"Capacity cap for '{kind}' must be non-negative, got {cap}")
        if cap > hard:
            raise ValueError(f"Capacity cap {cap} for '{kind}' exceeds the hard safety cap {hard}. "
                             f"Lower the override or the corresponding environment variable.")

        return cap

    @classmethod
    def as_dict(cls) -> dict:
        """Snapshot of the effective configuration, embedded in reports."""
        return {
            "macaulay_max_columns": cls.MACAULAY_MAX_COLUMNS,
            "boolean_macaulay_max_vars": cls.BOOLEAN_MACAULAY_MAX_VARS,
            "brute_force_max_vars": cls.BRUTE_FORCE_MAX_VARS,
            "exact_solve_max_vars": cls.EXACT_SOLVE_MAX_VARS,
            "macaulay_cap": cls.MACAULAY_CAP,
        }
