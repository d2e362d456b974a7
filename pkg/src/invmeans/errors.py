"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class InvariantMeansError(Exception):
    """Base class for every error raised by this package."""


class DomainError(InvariantMeansError, ValueError):
    """Arguments fall outside the host interval, or the interval itself is invalid."""


class MeanBoundsError(InvariantMeansError, ValueError):
    """A function violated min(x, y) <= K(x, y) <= max(x, y)."""

    def __init__(self, message: str, witness: tuple[float, float] | None = None,
                 step: int | None = None):
        super().__init__(message)
        self.witness = witness
        self.step = step


class MeanSyntaxError(InvariantMeansError, ValueError):
    """Malformed mean expression text."""

    def __init__(self, message: str, line: int, column: int,
                 expected: tuple[str, ...] = ()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        text = f"line {line}, column {column}: {message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        super().__init__(text)


class MeanEvalError(InvariantMeansError, ArithmeticError):
    """Runtime failure while evaluating an expression (division by zero, bad sqrt, ...)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class OrbitError(InvariantMeansError):
    """A mean failed while the orbit was being generated."""

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


class ConvergenceError(InvariantMeansError):
    """Iteration did not stabilize within the allowed number of steps."""


class PreconditionError(InvariantMeansError, ValueError):
    """Inputs do not satisfy an operation's hypotheses."""
