"""
Errors - Exception hierarchy for torus_que
"""


class TorusQueError(Exception):
    """Base class for every error raised by torus_que"""


class DimensionMismatchError(TorusQueError, ValueError):
    """Operands live in Hilbert spaces of different dimension"""

    def __init__(self, left: int, right: int) -> None:
        super().__init__(f"dimension mismatch: {left} != {right}")
        self.left = left
        self.right = right


class CommutationError(TorusQueError, ValueError):
    """Operators passed to a joint diagonalization do not commute"""


class UnnormalizedStateError(TorusQueError, ValueError):
    """A state that must be normalized is not"""


class ObservableError(TorusQueError, ValueError):
    """An observable or shear profile violates a precondition"""


class PrecisionExhaustedError(TorusQueError, ArithmeticError):
    """Working precision is insufficient for a certified answer"""


class ConstructionOverflowError(TorusQueError, OverflowError):
    """A continued-fraction construction outgrew its integer guard"""


class NonNormalError(TorusQueError, ValueError):
    """Dense eigensolver input is not a normal matrix"""


class DenseGuardError(TorusQueError, MemoryError):
    """Dense materialization requested above the dimension guard"""


class CalibrationError(TorusQueError, RuntimeError):
    """Shear sign calibration could not single out one convention"""


class ConfigError(TorusQueError, ValueError):
    """Experiment configuration is invalid

    Args:
        message: What is wrong
        field: Offending config field, if known
        line: Line number in the config document, if known
    """

    def __init__(
        self, message: str, field: str | None = None, line: int | None = None
    ) -> None:
        location = ""
        if field is not None:
            location += f" [field: {field}]"
        if line is not None:
            location += f" [line: {line}]"
        super().__init__(f"{message}{location}")
        self.field = field
        self.line = line


class SweepCancelledError(TorusQueError, RuntimeError):
    """A sweep was cancelled before every row finished"""


class LowerBoundViolationError(TorusQueError, ArithmeticError):
    """A simulated slow-convergence level broke its certified lower bound

    Args:
        level: Construction level index
        message: Which bound failed and by how much
    """

    def __init__(self, level: int, message: str) -> None:
        super().__init__(f"level {level}: {message}")
        self.level = level
