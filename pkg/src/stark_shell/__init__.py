"""Spectral and resonance computations for a delta-shell in a constant field."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AccidentalDegeneracyError,
    ConvergenceError,
    DomainError,
    NearPoleError,
    StarkShellError,
    TruncationError,
    UnstableRegimeError,
    WidthUnderflowError,
)
from .zerofield import ShellParams, find_bound_states, mu_ell, mu_prime  # noqa: E402

__all__ = [
    "AccidentalDegeneracyError",
    "ConvergenceError",
    "DomainError",
    "NearPoleError",
    "ShellParams",
    "StarkShellError",
    "TruncationError",
    "UnstableRegimeError",
    "WidthUnderflowError",
    "find_bound_states",
    "mu_ell",
    "mu_prime",
]
