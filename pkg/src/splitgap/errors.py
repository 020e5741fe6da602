"""Exception types shared across the package."""


class SplitGapError(Exception):
    """Base class for computation failures (CLI exit status 1)."""


class InvalidParams(SplitGapError, ValueError):
    pass


class NonPositiveMass(SplitGapError):
    """Raised when 1/m_k <= 0, i.e. lambda is outside the positive-definite window."""


class NotConverged(SplitGapError):
    """Iterative solver stopped before reaching its tolerance.

    The best available estimate and diagnostics are attached so callers can
    still report something useful.
    """

    def __init__(self, message, estimate=None, diagnostics=None):
        super().__init__(message)
        self.estimate = estimate
        self.diagnostics = diagnostics or {}


class TooLarge(SplitGapError):
    pass


class DenseTooLarge(TooLarge):
    pass


class GridTooCoarse(SplitGapError):
    pass


class FactorOutOfRange(SplitGapError):
    pass


class QuadratureNotConverged(SplitGapError):
    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class RootNotBracketed(SplitGapError):
    def __init__(self, message, diagnostics=None, partial=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
        self.partial = partial


class RootNotFound(SplitGapError):
    pass


class Unsupported(SplitGapError):
    pass


class DegenerateFit(SplitGapError):
    pass
