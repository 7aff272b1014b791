"""Exception hierarchy shared by all modules."""


class BesicovitchError(Exception):
    """Base class for library errors."""


class InvalidArgumentError(BesicovitchError, ValueError):
    """A precondition on an argument does not hold."""


class OutOfRangeError(BesicovitchError, ValueError):
    """Evaluation was requested outside the data a path or grid covers."""


class StabilityViolationError(BesicovitchError, ValueError):
    """A generator spectrum is not exponentially stable."""


class HypothesisViolationError(BesicovitchError, ValueError):
    """The contraction hypothesis fails, so no unique fixed point is guaranteed."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class NonConvergenceError(BesicovitchError, RuntimeError):
    """Picard iteration hit ``max_iter`` before reaching the tolerance.

    The partial report (with the residual trace) is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class FnSpecSyntaxError(BesicovitchError, ValueError):
    """Malformed function-expression text. ``pos`` is a 0-based offset."""

    def __init__(self, message, text, pos):
        self.text = text
        self.pos = pos
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line = line
        self.col = col
        super().__init__(f"{message} at line {line}, column {col}")
