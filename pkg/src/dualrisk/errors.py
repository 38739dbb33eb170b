"""Exception and warning classes.

Every error raised for invalid input derives from :class:`DualRiskError`,
itself a :class:`ValueError`, so callers can catch the whole family at once.
The CLI reports the class name of the error it caught.
"""


class DualRiskError(ValueError):
    """Base class for all library errors."""


# risk construction
class EmptyLottery(DualRiskError):
    pass


class NonPositiveProbability(DualRiskError):
    pass


class MassNotOne(DualRiskError):
    pass


class MassExceedsOne(DualRiskError):
    pass


class NotZeroMean(DualRiskError):
    pass


class InsufficientBranchMass(DualRiskError):
    pass


class OrderingViolated(DualRiskError):
    pass


class BadOrder(DualRiskError):
    pass


class ZeroMeanGini(DualRiskError):
    pass


# parameters and domains
class ParamOutOfRange(DualRiskError):
    pass


class DomainViolation(DualRiskError):
    pass


class RangeViolation(DualRiskError):
    pass


# solvers and checks
class NoBracket(DualRiskError):
    pass


class InconsistentLambda(DualRiskError):
    pass


class BadQuadruple(DualRiskError):
    pass


class NotAtZeroParticipation(DualRiskError):
    pass


class BadSampleCount(DualRiskError):
    pass


class NonConcaveUtility(UserWarning):
    """Issued when the portfolio objective has no interior optimum."""


class PortfolioAssumptionWarning(UserWarning):
    """Issued when returns violate ``R0 < R1`` or a positive expected return."""
