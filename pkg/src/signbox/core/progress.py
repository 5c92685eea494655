"""Progress display columns for training runs."""

import math

from rich.progress import ProgressColumn, Task
from rich.text import Text

from signbox.core.training import EpochRecord


class LossColumn(ProgressColumn):
    """Displays the latest training and held-out loss."""

    def render(self, task: Task) -> Text:
        train_loss = task.fields.get("train_loss")
        val_loss = task.fields.get("val_loss")
        if train_loss is None or val_loss is None:
            return Text("loss -.---- / -.----", style="dim")
        return Text(f"loss {format_loss(train_loss)} / {format_loss(val_loss)}", style="yellow")


class LearningRateColumn(ProgressColumn):
    """Displays the learning rate of the last finished epoch."""

    def render(self, task: Task) -> Text:
        lr = task.fields.get("lr")
        if lr is None:
            return Text("lr -", style="dim")
        return Text(f"lr {lr:.2e}", style="cyan")


def format_loss(loss: float) -> str:
    if not math.isfinite(loss):
        return "nan"
    if loss >= 100.0:
        return f"{loss:.1f}"
    return f"{loss:.4f}"


def epoch_fields(record: EpochRecord) -> dict[str, float]:
    """Task fields read by the loss and learning-rate columns."""
    return {"train_loss": record.train_loss, "val_loss": record.val_loss, "lr": record.lr}
