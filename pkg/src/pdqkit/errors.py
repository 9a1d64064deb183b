"""Exception hierarchy shared by all pdqkit modules."""

from __future__ import annotations


class PdqError(Exception):
    """Base class for every error raised by pdqkit."""


class NumericalError(PdqError):
    """A numerical procedure could not deliver a trustworthy answer."""


class QuadratureError(NumericalError):
    """Quadrature failed to converge.

    The best available estimate and its error bound are kept on the
    exception so callers can decide whether to use them anyway.
    """

    def __init__(self, message: str, estimate: float = float("nan"),
                 error: float = float("inf")):
        super().__init__(f"quadrature failure: {message} "
                         f"(estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class DivergentIntegralError(NumericalError):
    """The integral grows without bound under refinement."""

    def __init__(self, message: str = "divergent integral",
                 estimate: float = float("inf")):
        super().__init__(message)
        self.estimate = estimate


class BracketError(NumericalError):
    """Root bracket without a sign change."""


class MonotonicityError(NumericalError):
    """Data that must be strictly increasing is not."""


class DomainError(PdqError, ValueError):
    """Argument outside the domain of an operation."""


class ParameterError(PdqError, ValueError):
    """Unknown family or parameter outside its validity region."""


class NotSquareIntegrableError(NumericalError):
    """The density is not square integrable, so its pdQ does not exist."""

    def __init__(self, message: str = "not square-integrable: pdQ does not exist",
                 step: int | None = None):
        super().__init__(message)
        self.step = step


class ReconstructionError(NumericalError):
    """The integral of 1/g diverges, so the cdf cannot be rebuilt."""


class TestUndefinedError(PdqError, ValueError):
    """The uniformity test is undefined for the requested alternative."""

    __test__ = False
