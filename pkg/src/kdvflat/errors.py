"""Exception hierarchy. The CLI maps these onto exit codes."""


class KdvFlatError(Exception):
    """Base class for all package errors."""


class ConfigError(KdvFlatError, ValueError):
    """Invalid run configuration or violated precondition (exit code 2)."""


class NotReachableError(ConfigError):
    """Target state violates the boundary conditions of the reachable class."""


class NumericalError(KdvFlatError, ArithmeticError):
    """A numerical routine could not deliver a trustworthy result (exit code 4)."""


class SingularJetError(NumericalError, ZeroDivisionError):
    pass


class JetRangeError(NumericalError, OverflowError):
    pass


class DomainError(KdvFlatError, ValueError):
    """Argument outside the region where a representation is certified."""


class ResolutionError(NumericalError):
    pass


class DepthError(NumericalError):
    pass


class StabilityError(NumericalError):
    pass


class DivergenceRiskError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class RoughnessError(DomainError):
    """Operation needs the smoothing effect, which is not yet active at this time."""
