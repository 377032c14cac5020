"""Exception hierarchy shared by every module of the package."""


class BergmanError(Exception):
    """Base class for all errors raised by :mod:`bergman`."""


class JetError(BergmanError, ValueError):
    """Invalid jet arithmetic (shape mismatch, order overflow, bad index)."""


class OrderCapExceeded(JetError):
    pass


class VanishingConstantTerm(JetError, ZeroDivisionError):
    pass


class NonpositiveConstantTerm(JetError):
    pass


class GroupError(BergmanError, ValueError):
    pass


class PointOutsideBall(BergmanError, ValueError):
    pass


class NonpositiveKernel(BergmanError, ValueError):
    pass


class NumericConsistencyError(BergmanError, ArithmeticError):
    """A quantity that must be real (or Hermitian) came out otherwise."""


class NonpositiveMetricDet(NumericConsistencyError):
    pass


class NotPositiveDefinite(NumericConsistencyError):
    pass


class NonpositiveJ(BergmanError, ValueError):
    pass


class FitError(BergmanError, ValueError):
    pass


class InsufficientSamples(FitError):
    pass


class DegenerateFit(FitError):
    pass


class IndeterminateFit(FitError):
    pass


class EvaluationFailed(BergmanError, RuntimeError):
    pass


class ConfigError(BergmanError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
