"""
Exception hierarchy shared by the numerical modules and the CLI.

Every error carries the process exit code the CLI reports for it.
"""

from typing import Optional


class TransmutantError(Exception):
    exit_code = 1


class InvalidArgumentError(TransmutantError, ValueError):
    exit_code = 2


class OutOfDomainError(TransmutantError, ValueError):
    exit_code = 2


class InvalidStateError(TransmutantError):
    exit_code = 2


class ConfigError(TransmutantError):
    exit_code = 2


class ConvergenceError(TransmutantError):
    """Picard iteration did not reach the tolerance."""

    exit_code = 3

    def __init__(self, message: str, residual: float, iterations: int, field=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        # Last (unconverged) iterate, kept for diagnostics
        self.field = field


class VanishingSolutionError(TransmutantError):
    """The chosen solution f comes too close to zero on the grid."""

    exit_code = 4

    def __init__(self, message: str, min_abs_f: float, index: Optional[int] = None):
        super().__init__(message)
        self.min_abs_f = min_abs_f
        self.index = index


class InconsistentInputError(TransmutantError):
    exit_code = 2

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual
