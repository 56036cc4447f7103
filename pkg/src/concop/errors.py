"""Exception hierarchy shared by every module of the package."""


class ConcopError(Exception):
    """Base class; ``kind`` is the short name reported by the CLI."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class AlgebraError(ConcopError):
    """Failures of operator algebra (mapped to CLI exit code 3)."""


class MonotonicityViolation(AlgebraError):
    pass


class NotMaximal(AlgebraError):
    pass


class NotAResolvent(AlgebraError):
    pass


class ToleranceUnreachable(AlgebraError):
    pass


class BadParameter(AlgebraError):
    pass


class OrientationMismatch(AlgebraError):
    pass


class NegativeRange(AlgebraError):
    pass


class NegativeDomain(AlgebraError):
    pass


class EmptyInterval(AlgebraError):
    pass


class BadBounds(AlgebraError):
    pass


class NotProbabilistic(AlgebraError):
    pass


# Alias used by the integral routines.
NotProbOp = NotProbabilistic


class EmptySamples(AlgebraError):
    pass


class EmptyParallelSum(AlgebraError):
    pass


class ZeroPivot(AlgebraError):
    pass


class NotIntegrable(AlgebraError):
    pass


class DegenerateDenominator(AlgebraError):
    pass


class NotAModulus(AlgebraError):
    pass


class CompositionNotMaximal(AlgebraError):
    pass


class NotLogSubadditive(AlgebraError):
    def __init__(self, message: str, witness: tuple[float, float] | None = None):
        super().__init__(message)
        self.witness = witness


class OutOfSupport(AlgebraError):
    pass


class ZeroDensity(AlgebraError):
    pass


class OutOfDomain(AlgebraError):
    pass


class ShapeMismatch(AlgebraError):
    pass


class UnknownScenario(ConcopError):
    pass


class SpecParseError(ConcopError):
    """Malformed operator expression (CLI exit code 2)."""

    def __init__(self, message: str, position: str = ""):
        super().__init__(f"{message} at {position}" if position else message)
        self.position = position
