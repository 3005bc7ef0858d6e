"""Exception hierarchy shared by every module of the package."""


class ToeplitzFRError(ValueError):
    """Base class for all domain errors raised by this package."""


class NonHermitian(ToeplitzFRError):
    pass


class NoConvergence(ToeplitzFRError, RuntimeError):
    pass


class DegenerateLeadingCoefficient(ToeplitzFRError):
    pass


class DimensionMismatch(ToeplitzFRError):
    pass


class IndexOutOfRange(ToeplitzFRError, IndexError):
    pass


class NotUnitModulus(ToeplitzFRError):
    pass


class NotPositive(ToeplitzFRError):
    pass


class NotRealValued(ToeplitzFRError):
    pass


class NotNonnegative(ToeplitzFRError):
    pass


class FactorizationUnstable(ToeplitzFRError, RuntimeError):
    pass


class NotAdjointPreserving(ToeplitzFRError):
    pass


class GramMismatch(ToeplitzFRError):
    pass


class BlockStructureViolated(ToeplitzFRError):
    pass


class BlocksNotCirculant(ToeplitzFRError):
    pass


class InputFormatError(ToeplitzFRError):
    """Raised when a JSON document does not follow the documented schema."""
