"""Exception hierarchy shared by every module of the package."""


class DeunError(Exception):
    """Base class for all errors raised by this package."""


# -- graph structure -------------------------------------------------------

class InvalidDeun(DeunError):
    """A network violates a structural constraint.

    ``violations`` holds every problem found, not only the first one.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class SelfLoop(InvalidDeun):
    pass


class OrderingViolated(InvalidDeun):
    pass


class CycleDetected(InvalidDeun):
    def __init__(self, message, violations=(), cycle=()):
        super().__init__(message, violations)
        self.cycle = tuple(cycle)


class NotDecomposable(DeunError):
    pass


# -- expression algebra ----------------------------------------------------

class SelfReferentialMean(DeunError):
    pass


class NotConstant(DeunError):
    pass


class PendingVariable(DeunError):
    pass


# -- model and engine ------------------------------------------------------

class DegenerateUtility(DeunError):
    pass


class UnsupportedCombination(DeunError):
    pass


class ExpansionTooLarge(DeunError):
    pass


class OutOfDomain(DeunError):
    pass


class UnknownDecision(DeunError):
    pass


# -- oracles ---------------------------------------------------------------

class TooLarge(DeunError):
    pass


class NonConvergence(DeunError):
    pass


# -- model files -----------------------------------------------------------

class ModelParseError(DeunError):
    pass


class ModelValidationError(DeunError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
