"""Loss, optimiser, schedule, metrics and the cross-validation protocol."""

from signbox.core.training.loop import (
    EPOCH_LOG_COLUMNS,
    CvResult,
    EpochRecord,
    FoldResult,
    default_workers,
    evaluate,
    run_cv,
    train_fold,
)
from signbox.core.training.loss import cross_entropy_loss
from signbox.core.training.metrics import (
    ClassScore,
    FoldMetrics,
    MetricsReport,
    categorical_accuracy,
    confusion_matrix,
    macro_f1,
    per_class_scores,
    sample_std,
)
from signbox.core.training.optim import (
    OptimizerState,
    SchedulerState,
    adamw_step,
    plateau_step,
)

__all__ = [
    "EPOCH_LOG_COLUMNS",
    "ClassScore",
    "CvResult",
    "EpochRecord",
    "FoldMetrics",
    "FoldResult",
    "MetricsReport",
    "OptimizerState",
    "SchedulerState",
    "adamw_step",
    "categorical_accuracy",
    "confusion_matrix",
    "cross_entropy_loss",
    "default_workers",
    "evaluate",
    "macro_f1",
    "per_class_scores",
    "plateau_step",
    "run_cv",
    "sample_std",
    "train_fold",
]
