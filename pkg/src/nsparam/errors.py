"""Exception hierarchy.

Argument and range problems subclass :class:`ValueError` so callers that only
care about "bad input" can catch the builtin.
"""


class NsparamError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgumentError(NsparamError, ValueError):
    pass


class RangeError(NsparamError, ValueError):
    pass


class ValidationError(NsparamError, ValueError):
    """A model parameter violates its invariant; ``field`` names it."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class ParseError(NsparamError, ValueError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class FormatError(NsparamError, ValueError):
    pass


class EstimationError(NsparamError):
    """An estimator could not produce a fit; the message states why."""


class NormalizationFailureError(EstimationError):
    pass


class DegenerateRootError(EstimationError):
    pass


class InsufficientPeaksError(EstimationError):
    def __init__(self, found, needed):
        super().__init__(f"insufficient spectral peaks: found {found}, need {needed}")
        self.found = found
        self.needed = needed


class ClusterAmbiguityError(EstimationError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class SegmentationError(EstimationError):
    pass


class InsufficientSupportError(EstimationError):
    pass


class PreconditionError(EstimationError, ValueError):
    pass
