"""Exception hierarchy shared by all modules."""


class AbringError(Exception):
    """Base class for every error raised by :mod:`abring`."""


class DomainError(AbringError, ValueError):
    """Input lies outside the domain where an operation is defined."""


class BandEdgeError(DomainError):
    """|sin k| is too small: zero group velocity, scattering is ill-posed."""


class EmptyGridError(DomainError):
    pass


class UnsupportedFluxError(DomainError):
    pass


class NoSolutionError(DomainError):
    pass


class BranchMismatchError(DomainError):
    pass


class TailOverflowError(DomainError):
    """Gaussian packet is not contained in the input lead at t = 0."""


class ReflectionContaminationError(DomainError):
    """Population reached the outer end of a lead before the measurement time."""


class NotCageConditionError(DomainError):
    pass


class AccuracyBudgetExceededError(AbringError, ArithmeticError):
    """Norm drift of a time evolution exceeded the accuracy budget."""
