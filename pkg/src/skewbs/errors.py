"""Exception and warning types raised by skewbs."""


class SkewBSError(Exception):
    """Base class for all skewbs errors."""


class DomainError(SkewBSError, ValueError):
    """A parameter or data value lies outside its admissible domain."""


class RankError(SkewBSError, ValueError):
    """The design matrix does not have full column rank."""


class ParseError(SkewBSError, ValueError):
    """Malformed delimited-text input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SingularityError(SkewBSError, ArithmeticError):
    """A matrix that must be inverted is numerically singular or not positive definite."""


class ConvergenceError(SkewBSError, RuntimeError):
    """The optimizer stopped without meeting its convergence criteria.

    The partially converged fit is attached as ``result`` when available.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class EigenFailure(SkewBSError, ArithmeticError):
    """The symmetric eigensolver failed to converge."""


class ConstantColumnError(SkewBSError, ValueError):
    """A covariate perturbation was requested on a constant (intercept-like) column."""


class InvalidPair(SkewBSError, ValueError):
    """Two fits passed to a likelihood-ratio test are not properly nested."""


class ConvergenceWarning(UserWarning):
    """Issued when a fit returns with ``converged=False``."""


class StationarityWarning(UserWarning):
    """Issued when diagnostics are evaluated away from a stationary point."""
