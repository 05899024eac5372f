"""Exception hierarchy shared by every module."""


class FracVolterraError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(FracVolterraError, ValueError):
    pass


class NumericFailureError(FracVolterraError, ArithmeticError):
    pass


class NumericOverflowError(NumericFailureError):
    """A solver produced a non-finite value.

    ``index`` holds the offending grid node (or a ``(t, s)`` node pair for
    two-time fields).
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class CalibrationFailureError(FracVolterraError):
    pass


class DegenerateInputError(FracVolterraError, ValueError):
    pass


class ConfigError(FracVolterraError, ValueError):
    """Raised by the config loader; ``problems`` lists every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
