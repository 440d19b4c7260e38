"""
Exception hierarchy for isoflow.

Every error carries enough context to be reported as a machine-readable object by the CLI
(see ``IsoflowError.to_dict``).
"""

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from isoflow.geometry.iso import IsoExpTrace


class IsoflowError(Exception):
    """Base class for all isoflow errors."""

    kind = "isoflow_error"

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict[str, Any]:
        """
        Machine-readable representation.

        Returns:
            Dictionary with the error kind, message and context
        """
        return {"error": self.kind, "message": self.message, **self.context}


class DomainError(IsoflowError, ValueError):
    """Input is non-finite or outside the domain of a map."""

    kind = "domain_error"


class OutOfImageError(DomainError):
    """A latent point lies outside the image of the diffeomorphism."""

    kind = "out_of_image"

    def __init__(self, message: str, indices: list[int] | None = None, **context: Any) -> None:
        super().__init__(message, indices=indices or [], **context)
        self.indices = indices or []


class IncompleteGeodesicError(IsoflowError, ArithmeticError):
    """Iso-exp stepping left the image of the diffeomorphism before reaching ‖v‖₂."""

    kind = "incomplete_geodesic"

    def __init__(self, message: str, trace: "IsoExpTrace", **context: Any) -> None:
        super().__init__(message, steps=trace.stopping_index, **context)
        self.trace = trace


class StepCapError(IsoflowError, ArithmeticError):
    """Iso-exp stepping exceeded its step cap."""

    kind = "step_cap_exceeded"

    def __init__(self, message: str, trace: "IsoExpTrace", **context: Any) -> None:
        super().__init__(message, steps=trace.stopping_index, **context)
        self.trace = trace


class ConfigError(IsoflowError, ValueError):
    """Invalid flow, training or run configuration."""

    kind = "config_error"


class ShapeError(IsoflowError, ValueError):
    """Array shapes do not match the configured layout."""

    kind = "shape_error"


class ActNormStateError(IsoflowError, RuntimeError):
    """An actnorm layer awaiting data-dependent init was evaluated."""

    kind = "actnorm_state_error"


class DegenerateDenominatorError(IsoflowError, ZeroDivisionError):
    """A relative error was requested for data that all coincide with the base point."""

    kind = "degenerate_denominator"


class DataFormatError(IsoflowError, ValueError):
    """Malformed data file (IDX, CSV, checkpoint)."""

    kind = "data_format_error"


class TrainingDivergedError(IsoflowError, FloatingPointError):
    """Loss or gradient became non-finite during training."""

    kind = "training_diverged"


class ColumnError(IsoflowError):
    """One or more data columns failed; maps column index to the failure message."""

    kind = "column_error"

    def __init__(self, message: str, failures: dict[int, str], **context: Any) -> None:
        super().__init__(message, indices=sorted(failures), failures=failures, **context)
        self.failures = failures


def validation_messages(error: Any) -> list[str]:
    """
    Flatten a ``pydantic.ValidationError`` into "location: message" strings.

    Args:
        error: The validation error

    Returns:
        One string per failed field
    """
    return [
        f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}"
        for err in error.errors()
    ]
