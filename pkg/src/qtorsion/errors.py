"""Exception hierarchy shared across the package."""


class TorsionError(Exception):
    """Base class for all package errors."""


class ValidationError(TorsionError, ValueError):
    """Malformed input data (shapes, non-SPD grams, bad config values)."""


class DomainError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonKaehlerInput(ValidationError):
    pass


class KindMismatch(ValidationError):
    pass


class EmptySpectrum(ValidationError):
    pass


class AcyclicityViolation(TorsionError):
    """The twist leaves zero modes, so det' would silently drop cohomology."""


class ConvergenceBudgetExceeded(TorsionError):
    pass


class EigenvalueClusterAmbiguity(TorsionError):
    pass


class MiddleDegreeMissing(TorsionError):
    pass


class NonSmoothFamily(TorsionError):
    pass


class IncompatibleGamma(TorsionError):
    pass


class GammaSquareDrift(TorsionError):
    pass


class NonRealSpectrum(TorsionError):
    pass
