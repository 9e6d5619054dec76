"""
Error Types

Typed exceptions shared by the sampling library, the targets and the
experiment runner.
"""


class NotPositiveDefiniteError(ValueError):
    """Raised when a matrix cannot be Cholesky factorized"""


class TargetEvaluationError(RuntimeError):
    """Raised when a target density cannot be evaluated at a point"""


class SolverFailure(TargetEvaluationError):
    """Raised when an ODE trajectory becomes nonpositive or nonfinite"""

    def __init__(self, message: str, time: float = float("nan")):
        super().__init__(message)
        self.time = time


class DataShapeError(ValueError):
    """Raised on inconsistent array shapes or rank-deficient design matrices"""


class DegenerateSeriesError(ValueError):
    """Raised when a diagnostic is requested for a zero-variance series"""


class SchemaError(ValueError):
    """Raised when a CSV file does not carry the columns its schema requires"""

    def __init__(self, message: str, missing: tuple = ()):
        super().__init__(message)
        self.missing = tuple(missing)
