"""Exception hierarchy.

Every numerical failure raised by the library derives from
:class:`NumericalError`; the CLI maps those to exit code 3.
"""


class SchurNevError(Exception):
    """Base class for all library errors."""


class InvalidPoint(SchurNevError, ValueError):
    """A point lies outside the open unit disc."""


class DuplicatePoint(SchurNevError, ValueError):
    """Two points of a sequence are (numerically) coincident."""


class NumericalError(SchurNevError):
    """Base class for failures of a numerical procedure."""


class EvaluationError(NumericalError):
    pass


class SingularityTooClose(EvaluationError):
    pass


class AtomTooClose(EvaluationError):
    pass


class NodeCoincidesWithSingularity(EvaluationError):
    pass


class TerminatedRecursion(NumericalError):
    """The Schur recursion stopped (unimodular coefficient) before the requested depth."""

    def __init__(self, message, at=None):
        super().__init__(message)
        self.at = at


class DegenerateKernel(NumericalError):
    pass


class GridMismatch(NumericalError):
    pass


class NotAnalytic(NumericalError):
    pass


class SymbolSingularOnGrid(NumericalError):
    pass


class IllConditioned(NumericalError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SectionTooLarge(NumericalError):
    pass


class CarlesonTooSmall(NumericalError):
    pass
