"""Exception types shared across the package."""


class NgmcaError(Exception):
    """Base class for all package errors."""


class RankDeficientError(NgmcaError):
    """Least-squares system is too ill-conditioned and fallback is disabled."""


class NonConvergenceError(NgmcaError):
    """An iterative routine exceeded its iteration cap without converging."""


class ShapeMismatchError(NgmcaError):
    """Operand shapes do not conform."""


class NonFiniteError(NgmcaError):
    """Iterates contain NaN/Inf, usually a misconfigured step size."""


class EmptyInputError(NgmcaError):
    """An operation received an empty vector."""


class ZeroSignalError(NgmcaError):
    """Cannot scale noise against an all-zero signal."""


class PeakOutOfRangeError(NgmcaError):
    """A peak position falls outside the sample grid."""


class DegenerateSpanError(NgmcaError):
    """Reference sources are rank-deficient; projections are ill-defined."""


class ZeroVectorError(NgmcaError):
    """Operation undefined on the zero vector."""


class SingularMatrixError(NgmcaError):
    """Matrix does not have full column rank."""


class UnknownAxisError(NgmcaError):
    """Requested plot axis is not a swept parameter."""


class RankCollapseWarning(UserWarning):
    """A source stayed dead after its reinitialization budget was exhausted."""
