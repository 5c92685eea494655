"""Per-fold training and the k-fold evaluation protocol."""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from signbox.core.dataset import (
    VOCAB,
    FoldSplit,
    GestureRecording,
    LabelVocab,
    PaddedBatch,
    model_input,
    stratified_k_fold,
)
from signbox.core.errors import NonFiniteError, TrainingDivergedError
from signbox.core.models import ModelParams, build, forward
from signbox.core.tensor import Mode, no_grad
from signbox.core.training.loss import cross_entropy_loss
from signbox.core.training.metrics import FoldMetrics, MetricsReport, confusion_matrix
from signbox.core.training.optim import (
    OptimizerState,
    SchedulerState,
    adamw_step,
    plateau_step,
)
from signbox.core.types import TrainConfig, model_name_for
from signbox.utils.logging import bind_run_context, clear_run_context, get_logger
from signbox.utils.rng import RngStreams

logger = get_logger(__name__)

EPOCH_LOG_COLUMNS = ("epoch", "train_loss", "val_loss", "val_acc", "lr")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_acc: float
    lr: float

    def row(self) -> tuple[int, float, float, float, float]:
        return (self.epoch, self.train_loss, self.val_loss, self.val_acc, self.lr)


EpochCallback = Callable[[int, EpochRecord], None]


@dataclass
class FoldResult:
    """Best-epoch parameters, held-out metrics and the epoch log of one fold."""

    fold: int
    params: ModelParams
    metrics: FoldMetrics
    epoch_log: list[EpochRecord] = field(default_factory=list)


@dataclass
class CvResult:
    report: MetricsReport
    folds: list[FoldResult]


def evaluate(
    params: ModelParams, batch: PaddedBatch, *, batch_size: int = 512
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and argmax predictions of an eval-mode pass."""
    total = 0.0
    predictions: list[np.ndarray] = []
    with no_grad():
        for start in range(0, len(batch), batch_size):
            chunk = batch.take(np.arange(start, min(start + batch_size, len(batch))))
            logits = forward(params, chunk.data, chunk.mask, Mode.EVAL)
            total += cross_entropy_loss(logits, chunk.labels).item() * len(chunk)
            predictions.append(logits.data.argmax(axis=1))
    return total / len(batch), np.concatenate(predictions)


def _train_epoch(
    params: ModelParams,
    batch: PaddedBatch,
    config: TrainConfig,
    optimizer: OptimizerState,
    lr: float,
    epoch: int,
    shuffle_rng: np.random.Generator,
    dropout_rng: np.random.Generator,
) -> float:
    order = shuffle_rng.permutation(len(batch))
    total = 0.0
    for number, start in enumerate(range(0, len(batch), config.batch_size), start=1):
        sub = batch.take(order[start : start + config.batch_size])
        params.zero_grad()
        try:
            logits = forward(params, sub.data, sub.mask, Mode.TRAIN, dropout_rng)
            loss = cross_entropy_loss(logits, sub.labels)
            loss.backward()
        except NonFiniteError as e:
            logger.error(
                "Non-finite value during training", epoch=epoch, batch=number, error=str(e)
            )
            raise TrainingDivergedError(epoch=epoch, batch=number, loss=math.nan) from e
        value = loss.item()
        adamw_step(
            params,
            optimizer,
            lr,
            beta1=config.beta1,
            beta2=config.beta2,
            eps=config.eps,
            weight_decay=config.weight_decay,
        )
        total += value * len(sub)
    return total / len(batch)


def train_fold(
    dataset: Sequence[GestureRecording],
    split: FoldSplit,
    fold: int,
    config: TrainConfig,
    *,
    on_epoch: EpochCallback | None = None,
) -> FoldResult:
    """Train on every fold but ``fold`` and validate on ``fold`` each epoch.

    The plateau schedule follows held-out loss, and the returned parameters
    are those of the epoch with the lowest held-out loss.

    Raises:
        TrainingDivergedError: If a loss or gradient becomes non-finite.
    """
    streams = RngStreams(config.seed).child(f"fold-{fold}")
    train_set = model_input([dataset[i] for i in split.train_indices(fold)], config.model)
    val_set = model_input([dataset[i] for i in split.validation_indices(fold)], config.model)

    params = build(config.model, streams.integer_seed("init"))
    optimizer = OptimizerState.zeros_like(params)
    scheduler = SchedulerState.initial(config)
    shuffle_rng = streams.generator("shuffle")
    dropout_rng = streams.generator("dropout")

    bind_run_context(fold=fold)
    logger.info(
        "Training fold",
        train_size=len(train_set),
        val_size=len(val_set),
        batch_size=config.batch_size,
        max_epochs=config.max_epochs,
    )

    epoch_log: list[EpochRecord] = []
    best = params.snapshot()
    best_epoch = 0
    try:
        for epoch in range(1, config.max_epochs + 1):
            lr = scheduler.current_lr
            train_loss = _train_epoch(
                params, train_set, config, optimizer, lr, epoch, shuffle_rng, dropout_rng
            )
            val_loss, predictions = evaluate(params, val_set, batch_size=config.eval_batch_size)
            if not math.isfinite(val_loss):
                raise TrainingDivergedError(epoch=epoch, batch=0, loss=val_loss)
            record = EpochRecord(
                epoch=epoch,
                train_loss=train_loss,
                val_loss=val_loss,
                val_acc=float(np.mean(predictions == val_set.labels)),
                lr=lr,
            )
            epoch_log.append(record)

            if val_loss < scheduler.best_val_loss:
                best = params.snapshot()
                best_epoch = epoch
            plateau_step(
                scheduler,
                val_loss,
                factor=config.plateau_factor,
                patience=config.plateau_patience,
                lr_min=config.lr_min,
            )
            logger.info("Epoch complete", **vars(record))
            if on_epoch is not None:
                on_epoch(fold, record)
    finally:
        clear_run_context("fold")

    params.restore(best)
    params.zero_grad()
    _, predictions = evaluate(params, val_set, batch_size=config.eval_batch_size)
    metrics = FoldMetrics.from_confusion(
        fold,
        confusion_matrix(val_set.labels, predictions, config.model.num_classes),
        best_epoch=best_epoch,
        best_val_loss=scheduler.best_val_loss,
        epochs_run=len(epoch_log),
    )
    logger.info(
        "Fold complete",
        fold=fold,
        accuracy=metrics.accuracy,
        macro_f1=metrics.macro_f1,
        best_epoch=best_epoch,
    )
    return FoldResult(fold=fold, params=params, metrics=metrics, epoch_log=epoch_log)


def default_workers(folds: int) -> int:
    return max(1, min(folds, os.cpu_count() or 1))


def run_cv(
    dataset: Sequence[GestureRecording],
    config: TrainConfig,
    *,
    workers: int | None = None,
    vocab: LabelVocab = VOCAB,
    on_epoch: EpochCallback | None = None,
    on_fold: Callable[[FoldResult], None] | None = None,
) -> CvResult:
    """Stratified k-fold cross-validation.

    Folds run in a process pool when ``workers > 1``; each fold draws from
    its own random streams, so results do not depend on the worker count.
    ``on_epoch`` is only called for in-process runs.
    """
    split = stratified_k_fold(list(dataset), config.folds, config.seed)
    workers = default_workers(config.folds) if workers is None else workers
    logger.info("Starting cross-validation", folds=config.folds, workers=workers)

    results: list[FoldResult] = []
    if workers <= 1:
        for fold in range(split.k):
            result = train_fold(dataset, split, fold, config, on_epoch=on_epoch)
            results.append(result)
            if on_fold is not None:
                on_fold(result)
    else:
        records = list(dataset)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(train_fold, records, split, fold, config) for fold in range(split.k)
            ]
            for future in futures:
                result = future.result()
                results.append(result)
                if on_fold is not None:
                    on_fold(result)

    report = MetricsReport.aggregate(
        [r.metrics for r in results],
        model=model_name_for(config.model).value,
        seed=config.seed,
        class_names=list(vocab.names)[: config.model.num_classes],
    )
    logger.info(
        "Cross-validation complete",
        mean_accuracy=report.mean_accuracy,
        std_accuracy=report.std_accuracy,
        mean_macro_f1=report.mean_macro_f1,
    )
    return CvResult(report=report, folds=results)

