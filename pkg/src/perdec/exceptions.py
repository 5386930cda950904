"""Exception hierarchy shared by every module of the package."""


class PerdecError(Exception):
    """Base class for all errors raised by :mod:`perdec`."""


class InvalidInputError(PerdecError, ValueError):
    """Malformed input: wrong shape, non-finite entries, bad period."""


class NumericalFailureError(PerdecError, ArithmeticError):
    """A dense kernel (eigensolver, SVD) failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ScaleLimitError(NumericalFailureError, OverflowError):
    """Matrix exponential overflowed double precision."""


class HypothesisViolationError(PerdecError):
    """An operator fails a structural hypothesis (e.g. power-boundedness)."""


class SplittingNotDirectError(HypothesisViolationError):
    """``ker(T - I)`` and ``ran(T - I)`` intersect nontrivially."""


class DivergenceError(PerdecError):
    """Cesaro averages did not settle within the requested tolerance."""

    def __init__(self, message, certificate=float("nan")):
        super().__init__(message)
        self.certificate = certificate


class PreconditionError(PerdecError):
    """The input does not satisfy the difference equation to tolerance."""

    def __init__(self, message, defect=float("nan")):
        super().__init__(message)
        self.defect = defect


class NotPeriodicError(PreconditionError):
    """``exp(alpha A)`` is not the identity to tolerance."""


class TamperError(PerdecError):
    """Certificate digest does not match the supplied inputs."""
