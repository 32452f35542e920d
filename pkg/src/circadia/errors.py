"""Exception hierarchy shared by all circadia modules.

Three failure families matter to callers (and to the CLI exit codes):
validation of inputs, refusal on physical-regime grounds, and numerical
non-convergence. Everything raised by this package derives from
:class:`CircadiaError`.
"""

from __future__ import annotations


class CircadiaError(Exception):
    """Base class for all errors raised by circadia."""


class ValidationError(CircadiaError, ValueError):
    """Bad input: wrong value, wrong shape, wrong file format."""


class PhysicalRegimeError(CircadiaError):
    """The request is well formed but sits in a regime the procedure refuses.

    Examples: effective-potential construction at or beyond the multivalued
    threshold, the naive adiabatic ladder inside the gate-charge degeneracy
    window. Maps to CLI exit code 2.
    """

    def __init__(self, message: str, **context: float):
        super().__init__(message)
        self.context = context


class ConvergenceError(CircadiaError):
    """A numerical procedure exhausted its iteration budget.

    Maps to CLI exit code 3. `detail` may carry best-effort residuals.
    """

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.detail = detail


class UnresolvedClusterError(ConvergenceError):
    """Root bracketing found a cluster it could not separate after refinement."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(message, detail=bracket)
        self.bracket = bracket


class StructureMismatchError(CircadiaError):
    """Fitted model structure disagrees with the data (e.g. pole count)."""

    def __init__(self, message: str, detected: list[float]):
        super().__init__(message)
        self.detected = detected
