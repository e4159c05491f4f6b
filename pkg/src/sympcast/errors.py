"""Exception hierarchy.

Validation problems (bad input shape, unknown names, degenerate data) derive
from :class:`ValidationError`; the CLI maps those to exit status 2 and every
other :class:`SympcastError` to exit status 1.
"""


class SympcastError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SympcastError, ValueError):
    """Input rejected before any computation happened."""


class ComputationError(SympcastError, ArithmeticError):
    """A numerical routine could not produce a result."""


# panel
class MissingHeader(ValidationError):
    pass


class UnknownTargetColumn(ValidationError):
    pass


class UnknownColumn(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class TargetWouldBeDropped(ValidationError):
    pass


class InsufficientRows(ValidationError):
    pass


# rankcorr
class ConstantInput(ValidationError):
    pass


class DegenerateSample(ValidationError):
    pass


# regress / metrics
class ShapeMismatch(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


# tseries
class SeriesTooShort(ValidationError):
    pass


class ConstantSeries(ValidationError):
    pass


class InsufficientHistory(ValidationError):
    pass


class SingularDesign(ComputationError):
    def __init__(self, message, lag=None):
        super().__init__(message)
        self.lag = lag


class NonFiniteLoss(ComputationError):
    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


# shapecluster
class DimensionMismatch(ValidationError):
    pass


class KTooLarge(ValidationError):
    pass


class CountExceedsClusters(ValidationError):
    pass


class EmptySeries(ValidationError):
    pass
