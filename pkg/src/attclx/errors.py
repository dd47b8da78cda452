"""Exception types raised across the package.

Every error is a ``ValueError`` subclass so callers that only care about
"bad input" can catch one thing. Errors that carry structured context keep
it on attributes as well as in the message.
"""


class AttclxError(ValueError):
    """Base class for all package errors."""


class EmptyInput(AttclxError):
    pass


class DuplicateDate(AttclxError):
    def __init__(self, date):
        self.date = date
        super().__init__(f"duplicate date {date}")


class InvalidBar(AttclxError):
    def __init__(self, index, reason):
        self.index = index
        self.reason = reason
        super().__init__(f"invalid bar at index {index}: {reason}")


class SeriesTooShort(AttclxError):
    pass


class ZeroVariance(AttclxError):
    pass


class SingularRegression(AttclxError):
    pass


class SingularDesignMatrix(SingularRegression):
    pass


class ShapeMismatch(AttclxError):
    def __init__(self, op, got, expected):
        self.op = op
        self.got = got
        self.expected = expected
        super().__init__(f"{op}: got shape {got}, expected {expected}")


class NonFiniteValue(AttclxError):
    def __init__(self, op, detail=""):
        self.op = op
        msg = f"non-finite value produced by {op}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class NonScalarLoss(AttclxError):
    pass


class TapeAlreadyConsumed(AttclxError):
    pass


class EmptyDataset(AttclxError):
    pass


class DegenerateFeatures(AttclxError):
    pass


class FeatureCountMismatch(AttclxError):
    def __init__(self, got, expected):
        self.got = got
        self.expected = expected
        super().__init__(f"feature count {got} does not match training ({expected})")


class LengthMismatch(AttclxError):
    pass


class ZeroRange(AttclxError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} has zero range on the train span")


class SplitOutOfRange(AttclxError):
    pass


class ZeroTruthValue(AttclxError):
    pass


class MissingColumn(AttclxError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing required column {name!r}")


class ParseError(AttclxError):
    def __init__(self, line, column, detail=""):
        self.line = line
        self.column = column
        msg = f"cannot parse line {line}, column {column!r}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class BadParams(AttclxError):
    pass


class CheckpointError(AttclxError):
    pass


class StageError(AttclxError):
    """Wraps a failure inside a pipeline stage, naming the stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
