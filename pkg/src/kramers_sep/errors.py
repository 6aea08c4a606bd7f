"""Exception hierarchy shared by all modules."""


class KramersError(Exception):
    """Base class for all errors raised by kramers_sep."""


class ValidationError(KramersError, ValueError):
    """Invalid parameters, constants or configuration."""


class DomainError(KramersError, ValueError):
    """Evaluation requested outside the admissible domain."""


class NumericalError(KramersError, ArithmeticError):
    """Overflow, non-convergence or instability."""


class EvaluationWarning(UserWarning):
    """Emitted when a solution value was clamped on overflow/underflow."""
