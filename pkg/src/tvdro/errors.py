"""Exception types shared across the library."""

__all__ = [
    "SupportMismatchError",
    "DegenerateSupportError",
    "AssumptionViolationError",
    "BracketingError",
    "EmptyAmbiguitySetError",
    "ResourceLimitError",
    "EmptyDatasetError",
]


class SupportMismatchError(ValueError):
    """Two objects were combined whose supports do not line up."""


class DegenerateSupportError(ValueError):
    """A support is empty, has duplicate points, or has zero diameter
    where a positive diameter is required."""


class AssumptionViolationError(ValueError):
    """A channel fails the structural assumption required by the
    requested operation."""


class BracketingError(ValueError):
    """A threshold search was given endpoints that do not bracket the
    target (the property must fail at the left end and hold at the
    right end)."""


class EmptyAmbiguitySetError(RuntimeError):
    """No clean distribution maps into the observed ball.

    ``min_distance`` carries the smallest achievable total-variation
    distance between the ball's center and the channel's image of the
    simplex, when the caller computed it.
    """

    def __init__(self, message, min_distance=None):
        super().__init__(message)
        self.min_distance = min_distance


class ResourceLimitError(RuntimeError):
    """The operation would exceed the documented desk-scale limits."""


class EmptyDatasetError(ValueError):
    """An input dataset has no usable rows."""
