"""Exception types raised across the package."""


class LpEvolError(Exception):
    """Base class for all library errors."""


class InvalidParameter(LpEvolError, ValueError):
    pass


class InvalidInput(LpEvolError, ValueError):
    pass


class IncompatibleDomains(LpEvolError, ValueError):
    pass


class NotInLp(LpEvolError, ArithmeticError):
    """A seminorm or integral diverged: the curve is not in the requested space."""


class DomainViolation(LpEvolError, ValueError):
    pass


class Unsupported(LpEvolError, NotImplementedError):
    pass


class OutOfDomain(LpEvolError, ValueError):
    pass


class DiscontinuousJunction(LpEvolError, ValueError):
    pass


class OutOfChart(LpEvolError, ValueError):
    pass


class Incompatible(LpEvolError, TypeError):
    pass


class InvalidTangent(LpEvolError, ValueError):
    pass


class InconsistentCurve(LpEvolError, ValueError):
    pass


class NumericalSingularity(LpEvolError, ArithmeticError):
    pass


class NoConvergence(LpEvolError, RuntimeError):
    pass


class InvalidControl(LpEvolError, ValueError):
    pass


class NonRecoverableWarning(UserWarning):
    """Derivative requested at a point of the exceptional null set."""
