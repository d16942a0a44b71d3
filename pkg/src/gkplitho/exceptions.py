"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class GKPLithoError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GKPLithoError, ValueError):
    """An input lies outside the domain of the requested operation."""


class InfeasibleGeometryError(DomainError):
    """The cavity geometry implied by a coupling constant is not realizable."""


class GridError(GKPLithoError, ValueError):
    """A sampling grid is unsuitable (under-resolved, mismatched, too short).

    ``required_points`` carries the minimal admissible point count when the
    refusal is about resolution.
    """

    def __init__(self, message: str, required_points: int | None = None):
        super().__init__(message)
        self.required_points = required_points


class NumericalError(GKPLithoError, RuntimeError):
    """A numerical procedure did not converge.

    ``diagnostics`` is a JSON-serializable dict describing the failure.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
