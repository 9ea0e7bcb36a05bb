"""Exception hierarchy shared by the model modules.

Every computational failure raises a subclass of :class:`ModelError` that
carries a ``diagnostics`` mapping, so the CLI can print a structured report.
"""

from __future__ import annotations

from typing import Any


class ModelError(Exception):
    """Base class for all failures raised by this package."""

    def __init__(self, message: str, **diagnostics: Any):
        super().__init__(message)
        self.diagnostics: dict[str, Any] = dict(diagnostics)

    def to_dict(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self), **self.diagnostics}


class ParameterError(ModelError, ValueError):
    """Invalid or missing model parameter."""


class BoundaryEvaluationError(ModelError):
    """The Filippov field was evaluated on the discontinuity E = 0."""


class InverseMappingError(ModelError):
    """Standard-form targets could not be mapped back to physical parameters."""


class NoRealRootError(InverseMappingError):
    pass


class DegenerateRatioError(InverseMappingError):
    pass


class InfeasibleAmplitudesError(InverseMappingError):
    pass


class BranchSelectionError(InverseMappingError):
    pass


class InconsistentBranchError(ModelError):
    """A branch point does not describe a valid orbit for the given parameters."""


class SlidingEntryError(ModelError):
    """A simulated trajectory reached a sliding interval of E = 0.

    ``trajectory`` holds the samples computed up to the halt.
    """

    def __init__(self, message: str, trajectory=None, **diagnostics: Any):
        super().__init__(message, **diagnostics)
        self.trajectory = trajectory


class IntegrationError(ModelError):
    """Non-finite state encountered while integrating the smoothed system."""


class NotFoundError(ModelError):
    """A scanned residual showed no sign change in the search range."""
