"""Exception hierarchy shared by every infolab module."""


class InfolabError(Exception):
    """Base class for all infolab errors."""


class NonConvergence(InfolabError):
    """Adaptive quadrature ran out of subdivisions."""


class NonFinite(InfolabError):
    """An integrand or function returned NaN or infinity at an interior node."""


class DomainViolation(InfolabError):
    """A stencil or evaluation point left the valid domain."""


class Unsupported(InfolabError):
    """The requested operation is not available for this object."""


class InvalidParameter(InfolabError, ValueError):
    """A constructor or operation received an out-of-range parameter."""


class UndefinedMoment(InfolabError):
    """A moment was requested that does not exist for the distribution."""


class DegenerateDensity(InfolabError):
    """The output density is too small for a stable posterior ratio."""


class PreconditionViolated(InfolabError):
    """An identity was invoked outside the setting in which it holds."""


class AssumptionViolated(PreconditionViolated):
    """A regularity assumption required by an identity failed its check."""

    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = tuple(failed)
