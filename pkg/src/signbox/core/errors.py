"""Exception hierarchy for Signbox.

Every error carries the process exit code the CLI reports for it:
0 success, 1 usage/config error, 2 data error, 3 training failure.
"""

from __future__ import annotations


class SignboxError(Exception):
    """Base class for all Signbox errors."""

    exit_code: int = 1


class ConfigurationError(SignboxError):
    """An invalid configuration value or combination."""

    exit_code = 1


class DataError(SignboxError):
    """Problems with input data: files, rows, frames, batches, checkpoints."""

    exit_code = 2


class ParseError(DataError):
    """A row or line that does not follow the expected grammar."""

    def __init__(
        self,
        message: str,
        *,
        line_number: int | None = None,
        line: str | None = None,
    ) -> None:
        self.line_number = line_number
        self.line = line
        location = f"line {line_number}: " if line_number is not None else ""
        detail = f" (got {line!r})" if line is not None else ""
        super().__init__(f"{location}{message}{detail}")


class RecordingValidationError(DataError):
    """A sensor value or label outside its allowed range."""

    def __init__(self, message: str, *, line_number: int | None = None) -> None:
        self.line_number = line_number
        location = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{location}{message}")


class InputError(DataError):
    """A batch or model input that violates an operation's precondition."""


class CheckpointError(DataError):
    """A checkpoint that cannot be read or does not match its embedded config."""


class TrainingError(SignboxError):
    """Training could not complete."""

    exit_code = 3


class TrainingDivergedError(TrainingError):
    """The loss became non-finite."""

    def __init__(self, *, epoch: int, batch: int, loss: float) -> None:
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(
            f"Training diverged at epoch {epoch}, batch {batch}: loss={loss}"
        )

    def __reduce__(self) -> tuple[object, ...]:
        # fold workers send errors back to the parent process
        return (_rebuild_diverged, (self.epoch, self.batch, self.loss))


class NonFiniteGradientError(TrainingError):
    """A parameter received a NaN or infinite gradient."""

    def __init__(self, path: str, *, bad_values: int) -> None:
        self.path = path
        self.bad_values = bad_values
        super().__init__(
            f"Non-finite gradient for parameter '{path}' ({bad_values} bad values)"
        )

    def __reduce__(self) -> tuple[object, ...]:
        return (_rebuild_gradient, (self.path, self.bad_values))


def _rebuild_diverged(epoch: int, batch: int, loss: float) -> TrainingDivergedError:
    return TrainingDivergedError(epoch=epoch, batch=batch, loss=loss)


def _rebuild_gradient(path: str, bad_values: int) -> NonFiniteGradientError:
    return NonFiniteGradientError(path, bad_values=bad_values)


class TensorError(SignboxError):
    """Contract violation inside the tensor library."""


class ShapeError(TensorError):
    """Operand shapes are incompatible."""


class NonFiniteError(TensorError):
    """An operation produced NaN or infinite values."""


class TensorUsageError(TensorError):
    """The tensor API was called incorrectly."""
