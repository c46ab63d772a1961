"""Exception hierarchy shared by every module."""


class HetRegError(Exception):
    """Base class. ``stage`` is filled in when an estimator stage fails."""

    stage = None

    def __str__(self):
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


class InvalidArgumentError(HetRegError, ValueError):
    pass


class InvalidParameterError(HetRegError, ValueError):
    pass


class InsufficientSamplesError(HetRegError, ValueError):
    pass


class SingularDesignError(HetRegError, ArithmeticError):
    def __init__(self, msg, pivot=None, index=None):
        super().__init__(msg)
        self.pivot = pivot
        self.index = index


class ConvergenceError(HetRegError, ArithmeticError):
    def __init__(self, msg, residual=None, iterations=None):
        super().__init__(msg)
        self.residual = residual
        self.iterations = iterations


class DataFormatError(HetRegError, ValueError):
    def __init__(self, msg, line=None, column=None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line
        self.column = column


def tag_stage(err, stage):
    """Attach a stage label to ``err`` (innermost label wins) and return it."""
    if err.stage is None:
        err.stage = stage
    return err
