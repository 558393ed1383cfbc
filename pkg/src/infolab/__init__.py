"""Entropy derivatives, Fisher information and MSE bounds for additive noise channels."""

from .channel import AdditiveNoiseChannel, CompanionChannel
from .distributions import (Distribution, check_assumptions, exponential_unit, from_spec, gamma_dist, gaussian,
                            student_t, truncated_gaussian)
from .errors import (AssumptionViolated, DegenerateDensity, DomainViolation, InfolabError, InvalidParameter,
                     NonConvergence, NonFinite, PreconditionViolated, UndefinedMoment, Unsupported)
from .identities import VERIFIERS, IdentityReport
from .infomeasures import (conditional_entropy_power, differential_entropy, entropy_power, fisher_location,
                           fisher_parameter, mmse)

__version__ = "0.1.0"
