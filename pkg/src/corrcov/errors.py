"""Exception types shared across the library."""


class CorrcovError(Exception):
    """Base class for all library-specific errors."""


class DimensionMismatch(CorrcovError, ValueError):
    """Operands have incompatible or non-square shapes."""


class InvalidInputs(CorrcovError, ValueError):
    """Arguments outside the documented domain of an operation."""


class NotPositiveDefinite(CorrcovError, ArithmeticError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, pivot_index: int, pivot_value: float):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"matrix is not positive definite: pivot {pivot_index} "
            f"has squared value {pivot_value!r}"
        )


class ConvergenceFailure(CorrcovError, ArithmeticError):
    """Iteration budget exhausted before reaching the requested tolerance."""

    def __init__(self, message: str, last_gap: float):
        self.last_gap = last_gap
        super().__init__(f"{message} (last iterate gap {last_gap:.3e})")


class OracleSizeExceeded(CorrcovError, ValueError):
    """The exhaustive eigenvalue oracle only accepts small matrices."""


class NoAnalyticForm(CorrcovError, ValueError):
    """The correlation model has no closed-form norm values."""


class CapExceeded(CorrcovError, RuntimeError):
    """Minimal-sample-size search hit its cap without meeting the criterion."""

    def __init__(self, m_cap: int, last_error: float):
        self.m_cap = m_cap
        self.last_error = last_error
        super().__init__(
            f"accuracy criterion not met for any m <= {m_cap} "
            f"(last relative error {last_error:.6g})"
        )
