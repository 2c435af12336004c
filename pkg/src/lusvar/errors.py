"""Exception hierarchy shared by all modules."""


class LuSvarError(Exception):
    """Base class for all package-specific errors."""


class SingularMinorError(LuSvarError):
    """A leading principal minor is (numerically) singular.

    Raised by the unpivoted LU factorization.  ``index`` is the 1-based
    index of the smallest failing leading principal minor, so callers can
    report which part of the column selection is to blame.
    """

    def __init__(self, index: int, pivot: float = 0.0):
        self.index = index
        self.pivot = pivot
        super().__init__(
            f"leading principal minor {index} is singular "
            f"(pivot {pivot:.3e}); the selected columns do not admit an "
            f"unpivoted LU factorization"
        )


class NoConvergenceError(LuSvarError):
    """Eigenvalue iteration failed to converge."""


class SingularDesignError(LuSvarError):
    """The lagged design matrix is numerically rank deficient."""


class TooShortError(LuSvarError):
    """Not enough observations to build the requested lag design."""


class ColumnSelectionError(LuSvarError):
    """Invalid column tuple: duplicates or out-of-range indices."""


class EmptySubvectorError(LuSvarError):
    """No strictly-lower-triangular coordinates exist (k < 2)."""


class DegenerateVarianceError(LuSvarError):
    """The weighted variance of a test statistic is numerically zero."""


class NegativeVarianceError(LuSvarError):
    """A variance estimate is negative beyond roundoff tolerance."""


class ExplodedPathError(LuSvarError):
    """A simulated trajectory diverged (non-stationary generator)."""


class DataError(LuSvarError):
    """Input data could not be ingested (parse error, date problems, gaps)."""


class ConfigError(LuSvarError):
    """Invalid run configuration."""
