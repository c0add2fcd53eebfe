"""Exception hierarchy shared by all modules.

Every error raised on purpose by the package derives from :class:`EreError`.
The CLI maps :class:`InputError` subclasses to exit code 1 and
:class:`SolverError` subclasses to exit code 2.
"""

from __future__ import annotations


class EreError(Exception):
    """Base class for all package errors."""


class InputError(EreError, ValueError):
    """A user supplied value is outside the admissible domain."""


class DomainError(InputError):
    """A parameter lies outside its mathematical domain (e.g. ``e >= e_max``)."""


class SolverError(EreError, RuntimeError):
    """A numerical solver failed to reach its target accuracy."""


class RootBracketError(SolverError):
    """A scalar root could not be bracketed or refined."""

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


class DegenerateConfigurationError(SolverError):
    """The massless body collapsed onto the line of the primaries."""


class InconsistencyError(SolverError):
    """A quantity violates an identity that must hold (e.g. ``trace(D) = 3``)."""


class IntegrationError(SolverError):
    """The monodromy integration lost symplecticity beyond the hard limit."""


class ClassificationError(SolverError):
    """The period map does not match any supported normal form."""


class MarginalNormalFormError(SolverError):
    """A splitting-number computation was requested on a marginal normal form."""


class NonConvergenceError(SolverError):
    """The Galerkin index did not stabilise before the maximal cutoff."""


class ThresholdNotFoundError(SolverError):
    """No stability flip was found inside the search interval."""
