"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):
``InvariantViolation`` for inputs that are well formed but mathematically
invalid, and ``InputFormatError`` for inputs that cannot be parsed at all.
"""


class StochMapsError(ValueError):
    pass


class InputFormatError(StochMapsError):
    pass


class InvariantViolation(StochMapsError):
    pass


class DimensionMismatch(InvariantViolation):
    pass


class UnknownLabel(InvariantViolation):
    pass


class BadSize(InvariantViolation):
    pass


class NotStochastic(InvariantViolation):
    pass


class NotPositive(InvariantViolation):
    pass


class NotUnital(InvariantViolation):
    pass


class NotAState(InvariantViolation):
    pass


class NotHermitian(InvariantViolation):
    pass


class NotADensityMatrix(InvariantViolation):
    pass


class NotCompletelyPositive(InvariantViolation):
    pass


class BadProbability(InvariantViolation):
    pass


class GridMismatch(InvariantViolation):
    pass


class SpaceMismatch(InvariantViolation):
    pass


class BoundViolated(InvariantViolation):
    pass
