"""Exception hierarchy shared across the package."""


class EisGlmError(Exception):
    """Base class for all errors raised by eisglm."""


# tableau
class NonUniqueAbscissas(EisGlmError):
    pass


class InconsistentAbscissas(EisGlmError):
    pass


class OrderShortfall(EisGlmError):
    pass


class EisViolation(EisGlmError):
    def __init__(self, failed, residuals):
        self.failed = list(failed)
        self.residuals = dict(residuals)
        detail = ", ".join(f"{k}={self.residuals[k]:.3e}" for k in self.failed)
        super().__init__(f"error-inhibiting condition(s) violated: {detail}")


class ParseError(EisGlmError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class InvariantViolation(EisGlmError):
    def __init__(self, invariant, message=""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}" if message else invariant)


# stepper
class StartupFailure(EisGlmError):
    pass


class NonFinite(EisGlmError):
    pass


class NewtonDivergence(EisGlmError):
    pass


class SingularJacobian(EisGlmError):
    pass


class InvalidWindow(EisGlmError):
    pass


# postproc
class SingularT(EisGlmError):
    pass


class DimensionMismatch(EisGlmError):
    pass


class IllConditioned(UserWarning):
    """Warning: post-processing filter is poorly conditioned."""


# stability
class SingularAmplification(EisGlmError):
    pass


# harness
class ReferenceUnconverged(EisGlmError):
    pass


class InsufficientPoints(EisGlmError):
    pass
