"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`MeanEqError`,
which itself is a :class:`ValueError` so callers that only care about bad
input can catch the builtin.
"""


class MeanEqError(ValueError):
    """Base class for all package errors."""


class IntervalError(MeanEqError):
    """Malformed interval or a set operation whose precondition fails."""


class OutOfDomain(MeanEqError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DegenerateParams(MeanEqError):
    """Parameters violate a non-degeneracy condition (ad != bc, C*D*alpha != 0)."""


class ZeroInDomain(MeanEqError):
    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class DomainViolation(MeanEqError):
    """A domain condition of a triple family fails.

    ``condition`` is 1, 2 or 3, indexing the three conditions attached to
    cases (iv), (v) and (vi) respectively.
    """

    def __init__(self, message, condition, witness):
        super().__init__(message)
        self.condition = condition
        self.witness = witness


class SupportNotContained(MeanEqError):
    pass


class DiscontinuousPhi(MeanEqError):
    def __init__(self, message, point):
        super().__init__(message)
        self.point = point


class TooFewPoints(MeanEqError):
    pass


class FNearZero(MeanEqError):
    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class DegenerateData(MeanEqError):
    pass


class IllConditioned(MeanEqError):
    def __init__(self, message, condition_number):
        super().__init__(message)
        self.condition_number = condition_number


class Unclassifiable(MeanEqError):
    def __init__(self, message, misfit, diagnostics=None):
        super().__init__(message)
        self.misfit = misfit
        self.diagnostics = diagnostics or {}


class NotMonotone(MeanEqError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class NonMonotoneEll(NotMonotone):
    pass


class DomainMismatch(MeanEqError):
    pass


class EmptyJ(MeanEqError):
    pass
