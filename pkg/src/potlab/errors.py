"""Exception hierarchy.

Input errors (bad matrices, bad measures, bad files) derive from
:class:`InputError`; the CLI maps them to exit status 1.
"""


class PotlabError(Exception):
    """Base class for every error raised by the package."""


class InputError(PotlabError):
    pass


class EmptyMatrix(InputError):
    def __init__(self):
        super().__init__("generator matrix is empty")


class NotSquare(InputError):
    def __init__(self, shape):
        self.shape = shape
        super().__init__(f"generator must be square, got shape {shape}")


class NegativeOffDiagonal(InputError):
    def __init__(self, i, j, value):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"off-diagonal rate L[{i},{j}] = {value} is negative")


class PositiveRowSum(InputError):
    def __init__(self, i, value):
        self.i, self.value = i, value
        super().__init__(f"row {i} sums to {value} > 0")


class DimensionMismatch(InputError):
    pass


class InvalidMeasure(InputError):
    pass


class NotSubInvariant(InputError):
    """``m^T L`` has a positive entry; ``column`` is the first offender."""

    def __init__(self, column, value):
        self.column, self.value = column, value
        super().__init__(f"measure is not sub-invariant: (m^T L)[{column}] = {value} > 0")


class NotProbability(InputError):
    pass


class NotFiniteMass(InputError):
    pass


class NonNegativeInputRequired(InputError):
    pass


class NotSupermedianModM(PotlabError):
    def __init__(self, index, value):
        self.index, self.value = index, value
        super().__init__(f"order-0 supermedian test fails on the support at state {index}: {value}")


class NotInessential(PotlabError):
    pass


class MassEscapes(PotlabError):
    pass


class SupportTooLargeForEnumeration(PotlabError):
    pass


class ComparisonFails(PotlabError):
    pass


class UnsupportedCase(PotlabError):
    pass


class Infeasible(PotlabError):
    pass


class SingularSystem(PotlabError):
    pass


class ParseError(InputError):
    pass


class SchemaError(InputError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
