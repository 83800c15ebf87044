"""Exception hierarchy shared by all computational modules."""

from __future__ import annotations


class StarkShellError(Exception):
    """Base class for every error raised by the package."""


class DomainError(StarkShellError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnstableRegimeError(DomainError):
    """Requested order/argument lies outside the validated stability range."""


class ConvergenceError(StarkShellError, RuntimeError):
    """An iterative or adaptive numerical procedure did not converge.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (last iterate, bracket, residual history, ...).
    """

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class AccidentalDegeneracyError(StarkShellError, ArithmeticError):
    """The p-wave channel is (nearly) resonant with the s-wave state."""


class NearPoleError(StarkShellError, ArithmeticError):
    """Boundary factor of a Krein-type formula is numerically singular."""


class TruncationError(StarkShellError, RuntimeError):
    """Result changes too much when the angular truncation is enlarged."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class WidthUnderflowError(StarkShellError, ArithmeticError):
    """Resonance widths are too small to be represented or fitted."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
