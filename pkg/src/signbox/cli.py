"""Command-line interface for Signbox."""

from __future__ import annotations

import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import typer
from rich.console import Console
from rich.markup import escape
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
)
from rich.table import Table

from signbox.core.checkpoint import Checkpoint, CheckpointManager, Provenance
from signbox.core.dataset import (
    VOCAB,
    ColumnMapping,
    GestureRecording,
    dataset_stats,
    import_dataverse,
    load_csv,
    stratified_k_fold,
    synth_generate,
    write_csv,
)
from signbox.core.errors import ConfigurationError, SignboxError
from signbox.core.models import count_parameters, round_to_thousands
from signbox.core.progress import LearningRateColumn, LossColumn, epoch_fields
from signbox.core.report import (
    OutputFormat,
    create_handler,
    write_confusion_csv,
    write_epoch_log,
    write_stream_report,
)
from signbox.core.streaming import (
    Prediction,
    is_dataset_csv,
    parse_lines,
    read_frame_file,
    recording_frames,
    run_replay,
)
from signbox.core.training import (
    EpochRecord,
    FoldResult,
    MetricsReport,
    run_cv,
    train_fold,
)
from signbox.core.types import REFERENCE_SIZES, ModelName, RunConfig, model_config_for
from signbox.utils.config import parse_config_text, resolve_run_config
from signbox.utils.logging import (
    LOG_LEVELS,
    bind_run_context,
    clear_run_context,
    configure_logging,
    get_logger,
)

app = typer.Typer(
    name="signbox",
    help="A benchmark for flex-sensor sign language gesture classifiers",
    add_completion=False,
)
dataset_app = typer.Typer(help="Import, synthesise and summarise gesture datasets.")
app.add_typer(dataset_app, name="dataset")

console = Console()
logger = get_logger()

MODEL_NAMES = ", ".join(m.value for m in ModelName)


def version_callback(value: bool) -> None:
    """Print version information and exit."""
    if value:
        from signbox import __version__

        console.print(f"Signbox version: {__version__}")
        raise typer.Exit(0)


@app.callback()
def main(
    version: bool | None = typer.Option(
        None,
        "--version",
        "-v",
        help="Show version information and exit.",
        callback=version_callback,
        is_eager=True,
    ),
    log_level: str = typer.Option(
        "INFO",
        "--log-level",
        "-l",
        help="Set the logging level.",
    ),
    json_logs: bool = typer.Option(
        False,
        "--json",
        "-j",
        help="Output logs in JSON format.",
    ),
) -> None:
    """Signbox - train, benchmark and stream sign language gesture classifiers."""
    if log_level.upper() not in LOG_LEVELS:
        console.print(
            f"[red]Error:[/red] Unknown log level '{escape(log_level)}'. "
            f"Valid levels: {', '.join(LOG_LEVELS)}"
        )
        raise typer.Exit(1)
    configure_logging(level=log_level, json=json_logs)


@contextmanager
def handle_errors(action: str) -> Iterator[None]:
    """Map errors to a red message and the error's exit code."""
    try:
        yield
    except typer.Exit:
        raise
    except SignboxError as e:
        logger.error(f"{action} failed", error=str(e), kind=type(e).__name__)
        console.print(f"[red]Error:[/red] {escape(str(e))}")
        sys.exit(e.exit_code)
    except Exception as e:
        logger.exception(f"{action} failed")
        console.print(f"[red]Error: {escape(str(e))}[/red]")
        sys.exit(1)
    finally:
        clear_run_context()


def parse_model_name(name: str) -> ModelName:
    """Resolve a ``--model`` value.

    Raises:
        ConfigurationError: If the name is unknown; the message lists valid names.
    """
    try:
        return ModelName(name.strip().lower())
    except ValueError:
        raise ConfigurationError(f"Unknown model '{name}'. Valid models: {MODEL_NAMES}")


def parse_output_format(value: str) -> OutputFormat:
    try:
        return OutputFormat(value.lower())
    except ValueError:
        valid = ", ".join(f.value for f in OutputFormat)
        raise ConfigurationError(f"Unknown report format '{value}'. Valid formats: {valid}")


def require_file(path: Path, what: str) -> Path:
    if not path.is_file():
        raise ConfigurationError(f"{what} {path} does not exist")
    return path


def resolve_config(
    config_file: Path | None,
    *,
    settings: list[str] | None = None,
    seed: int | None = None,
    model: str | None = None,
    workers: int | None = None,
    **extra: object,
) -> RunConfig:
    """Config file, then ``--set`` pairs, then explicit flags."""
    if config_file is not None:
        require_file(config_file, "Config file")
    overrides: dict[str, object] = dict(
        parse_config_text("\n".join(settings or []), source="--set")
    )
    flags: dict[str, object | None] = {
        "seed": seed,
        "model.name": parse_model_name(model).value if model else None,
        "workers": workers,
        **extra,
    }
    overrides.update({key: value for key, value in flags.items() if value is not None})
    return resolve_run_config(config_file, overrides)


def training_progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        LossColumn(),
        LearningRateColumn(),
        TimeElapsedColumn(),
        console=console,
    )


def load_dataset(path: Path, **window: int) -> list[GestureRecording]:
    result = load_csv(require_file(path, "Dataset"), **window)
    for line in result.rejection_lines():
        logger.debug(line)
    return result.recordings


def display_report(report: MetricsReport) -> None:
    table = Table(title=f"Results: {report.model}", show_header=False)
    table.add_column("Metric", style="bold blue")
    table.add_column("Value")
    table.add_row("Folds", str(len(report.folds)))
    table.add_row("Accuracy", f"{report.mean_accuracy:.4f} ± {report.std_accuracy:.4f}")
    table.add_row("Macro F1", f"{report.mean_macro_f1:.4f} ± {report.std_macro_f1:.4f}")
    console.print(table)


def save_fold_artifacts(
    result: FoldResult,
    config: RunConfig,
    out_dir: Path,
    *,
    fold_in_name: bool,
) -> Path:
    """Checkpoint and epoch log of one trained fold."""
    model = config.model.name.value
    provenance = config.provenance_lines()
    manager = CheckpointManager(out_dir)
    checkpoint = Checkpoint(
        params=result.params,
        provenance=Provenance(
            seed=config.seed,
            epochs_run=result.metrics.epochs_run,
            best_val_loss=result.metrics.best_val_loss,
            fold=result.fold,
            run_config=provenance,
        ),
        vocab=VOCAB,
    )
    stem = f"{model}_fold{result.fold}" if fold_in_name else model
    path = manager.save(checkpoint, out_dir / f"{stem}.ckpt")
    write_epoch_log(
        result.epoch_log,
        out_dir / f"{stem}_epochs.csv",
        provenance=[*provenance, f"fold={result.fold}"],
    )
    return path


def save_report(
    report: MetricsReport,
    config: RunConfig,
    out_dir: Path,
    output_format: OutputFormat,
) -> Path:
    model = config.model.name.value
    provenance = config.provenance_lines()
    suffix = "json" if output_format is OutputFormat.JSON else "txt"
    path = out_dir / f"{model}_metrics.{suffix}"
    create_handler(output_format).write(report, provenance, path)
    write_confusion_csv(
        report.total_confusion, out_dir / f"{model}_confusion.csv", provenance=provenance
    )
    for fold in report.folds:
        write_confusion_csv(
            fold.confusion,
            out_dir / f"{model}_fold{fold.fold}_confusion.csv",
            provenance=[*provenance, f"fold={fold.fold}"],
        )
    return path


CONFIG_OPTION = typer.Option(
    None, "--config", "-c", help="Flat key=value config file (e.g. train.lr0=0.001)."
)
SET_OPTION = typer.Option(
    None, "--set", "-s", help="Override one config key, e.g. --set train.max_epochs=20."
)
SEED_OPTION = typer.Option(None, "--seed", help="Random seed for every stochastic step.")
OUT_DIR_OPTION = typer.Option(
    Path("runs"), "--out-dir", "-o", help="Directory for checkpoints and reports."
)
MODEL_OPTION = typer.Option(None, "--model", "-m", help=f"Architecture: {MODEL_NAMES}.")
WORKERS_OPTION = typer.Option(
    None, "--workers", "-w", help="Parallel fold workers (default: min(folds, cores))."
)
FORMAT_OPTION = typer.Option("text", "--format", "-F", help="Metrics report format (text or json).")


@dataset_app.command("import")
def dataset_import(
    source: Path = typer.Argument(..., help="Downloaded CSV file or directory of CSVs."),
    output: Path = typer.Option(..., "--out", help="Canonical dataset CSV to write."),
    recording_column: str | None = typer.Option(None, "--recording-column"),
    time_column: str | None = typer.Option(None, "--time-column"),
    label_column: str | None = typer.Option(None, "--label-column"),
    channel_columns: str | None = typer.Option(
        None, "--channel-columns", help="Five comma-separated sensor column names."
    ),
) -> None:
    """Convert an upstream dataset download to the canonical CSV format."""
    with handle_errors("Import"):
        channels = [c.strip() for c in channel_columns.split(",")] if channel_columns else None
        try:
            mapping = ColumnMapping(
                recording=recording_column,
                time=time_column,
                channels=channels,
                label=label_column,
            )
        except ValueError as e:
            raise ConfigurationError(f"Invalid column mapping: {e}")
        if not source.exists():
            raise ConfigurationError(f"Import source {source} does not exist")
        recordings = import_dataverse(source, mapping=mapping)
        write_csv(recordings, output, provenance=[f"source={source.name}"])
        console.print(f"Imported {len(recordings)} recordings to {output}")


@dataset_app.command("synth")
def dataset_synth(
    output: Path = typer.Option(..., "--out", help="Dataset CSV to write."),
    n_per_class: int = typer.Option(200, "--n-per-class", "-n"),
    noise_std: float = typer.Option(20.0, "--noise-std"),
    seed: int = typer.Option(0, "--seed"),
) -> None:
    """Write a synthetic dataset of noisy class templates."""
    with handle_errors("Synthesis"):
        recordings = synth_generate(n_per_class, noise_std, seed)
        write_csv(
            recordings,
            output,
            provenance=[
                f"seed={seed}",
                f"synth.n_per_class={n_per_class}",
                f"synth.noise_std={noise_std}",
            ],
        )
        console.print(f"Wrote {len(recordings)} synthetic recordings to {output}")


@dataset_app.command("stats")
def dataset_stats_command(
    dataset: Path = typer.Argument(..., help="Canonical dataset CSV."),
    output: Path | None = typer.Option(None, "--out", help="Also write the report here."),
) -> None:
    """Print class counts, length histogram and rejected recordings."""
    with handle_errors("Stats"):
        result = load_csv(require_file(dataset, "Dataset"))
        lines = [f"# {line}" for line in result.provenance] + dataset_stats(result).lines()
        for line in lines:
            typer.echo(line)
        if output is not None:
            output.parent.mkdir(parents=True, exist_ok=True)
            output.write_text("\n".join(lines) + "\n", encoding="utf-8")


@app.command()
def train(
    dataset: Path = typer.Argument(..., help="Canonical dataset CSV."),
    fold: int = typer.Option(0, "--fold", help="Held-out fold for validation."),
    config_file: Path | None = CONFIG_OPTION,
    settings: list[str] | None = SET_OPTION,
    seed: int | None = SEED_OPTION,
    out_dir: Path = OUT_DIR_OPTION,
    model: str | None = MODEL_OPTION,
    workers: int | None = WORKERS_OPTION,
    output_format: str = FORMAT_OPTION,
) -> None:
    """Train one model on all folds but one and validate on the held-out fold."""
    with handle_errors("Training"):
        report_format = parse_output_format(output_format)
        config = resolve_config(
            config_file, settings=settings, seed=seed, model=model, workers=workers
        )
        train_config = config.train_config()
        if not 0 <= fold < train_config.folds:
            raise ConfigurationError(f"--fold must be in [0, {train_config.folds})")
        recordings = load_dataset(dataset)
        split = stratified_k_fold(recordings, train_config.folds, config.seed)
        bind_run_context(seed=config.seed, model=config.model.name.value)

        with training_progress() as progress:
            task = progress.add_task(f"Fold {fold}", total=train_config.max_epochs)

            def on_epoch(_: int, record: EpochRecord) -> None:
                progress.update(task, advance=1, **epoch_fields(record))

            result = train_fold(recordings, split, fold, train_config, on_epoch=on_epoch)

        out_dir.mkdir(parents=True, exist_ok=True)
        checkpoint_path = save_fold_artifacts(result, config, out_dir, fold_in_name=False)
        report = MetricsReport.aggregate(
            [result.metrics],
            model=config.model.name.value,
            seed=config.seed,
            class_names=list(VOCAB.names),
        )
        report_path = save_report(report, config, out_dir, report_format)
        display_report(report)
        console.print(f"Checkpoint: {checkpoint_path}\nReport: {report_path}")


@app.command()
def cv(
    dataset: Path = typer.Argument(..., help="Canonical dataset CSV."),
    config_file: Path | None = CONFIG_OPTION,
    settings: list[str] | None = SET_OPTION,
    seed: int | None = SEED_OPTION,
    out_dir: Path = OUT_DIR_OPTION,
    model: str | None = MODEL_OPTION,
    workers: int | None = WORKERS_OPTION,
    output_format: str = FORMAT_OPTION,
) -> None:
    """Run stratified k-fold cross-validation and write the metrics report."""
    with handle_errors("Cross-validation"):
        report_format = parse_output_format(output_format)
        config = resolve_config(
            config_file, settings=settings, seed=seed, model=model, workers=workers
        )
        train_config = config.train_config()
        recordings = load_dataset(dataset)
        bind_run_context(seed=config.seed, model=config.model.name.value)
        out_dir.mkdir(parents=True, exist_ok=True)

        with training_progress() as progress:
            task = progress.add_task(
                "Cross-validation", total=train_config.folds * train_config.max_epochs
            )

            shown: dict[int, int] = {}

            def on_epoch(fold: int, record: EpochRecord) -> None:
                shown[fold] = shown.get(fold, 0) + 1
                progress.update(task, advance=1, **epoch_fields(record))

            def on_fold(result: FoldResult) -> None:
                save_fold_artifacts(result, config, out_dir, fold_in_name=True)
                # pooled folds report no epochs until they finish
                remaining = len(result.epoch_log) - shown.get(result.fold, 0)
                if remaining and result.epoch_log:
                    progress.update(
                        task, advance=remaining, **epoch_fields(result.epoch_log[-1])
                    )

            outcome = run_cv(
                recordings,
                train_config,
                workers=config.workers,
                on_epoch=on_epoch,
                on_fold=on_fold,
            )

        report_path = save_report(outcome.report, config, out_dir, report_format)
        display_report(outcome.report)
        console.print(f"Report: {report_path}")


@app.command()
def params(
    model: str | None = MODEL_OPTION,
    show_all: bool = typer.Option(False, "--all", "-a", help="List every architecture."),
) -> None:
    """Print exact and rounded trainable parameter counts."""
    with handle_errors("Params"):
        if model is not None and show_all:
            raise ConfigurationError("Use either --model or --all, not both")
        names = [parse_model_name(model)] if model is not None else list(ModelName)

        table = Table(title="Trainable parameters")
        table.add_column("Model", style="cyan")
        table.add_column("Parameters", justify="right")
        table.add_column("Rounded", justify="right")
        table.add_column("Reference", justify="right")
        for name in names:
            count = count_parameters(model_config_for(name))
            table.add_row(
                name.value, f"{count:,}", round_to_thousands(count), REFERENCE_SIZES[name]
            )
        console.print(table)


@app.command()
def stream(
    checkpoint: Path = typer.Argument(..., help="Trained model checkpoint."),
    source: str = typer.Argument(
        ..., help="Frame file (s1,..,s5 per line), dataset CSV to replay, or '-' for stdin."
    ),
    rate: float | None = typer.Option(
        None, "--rate", "-r", help="Replay rate in Hz; 0 replays as fast as possible."
    ),
    config_file: Path | None = CONFIG_OPTION,
    settings: list[str] | None = SET_OPTION,
    seed: int | None = SEED_OPTION,
    out_dir: Path = OUT_DIR_OPTION,
    report: Path | None = typer.Option(
        None, "--report", help="Statistics report path (default: <out-dir>/stream_report.txt)."
    ),
) -> None:
    """Replay frames through segmentation and classification.

    Prints one ``<t_start> <label> <p_max>`` line per emitted segment.
    """
    with handle_errors("Stream"):
        config = resolve_config(
            config_file, settings=settings, seed=seed, **{"stream.rate_hz": rate}
        )
        loaded = CheckpointManager(checkpoint.parent).load(require_file(checkpoint, "Checkpoint"))
        model_settings = config.model.model_copy(update={"name": ModelName(loaded.model_name)})
        config = config.model_copy(update={"model": model_settings})
        bind_run_context(seed=config.seed, model=loaded.model_name)

        if source == "-":
            frames = list(parse_lines(sys.stdin))
        else:
            path = require_file(Path(source), "Stream source")
            if is_dataset_csv(path):
                # the segmenter, not the loader, rejects out-of-window recordings
                recordings = load_dataset(path, min_frames=1, max_frames=sys.maxsize)
                frames = list(
                    recording_frames(
                        recordings,
                        rest_frames=config.stream.rest_frames,
                        rest_value=config.stream.rest_value,
                    )
                )
            else:
                frames = read_frame_file(path)

        def sink(prediction: Prediction) -> None:
            typer.echo(prediction.line())

        _, stats = run_replay(
            frames,
            loaded.params,
            segmenter_config=config.segmenter,
            settings=config.stream,
            sink=sink,
            vocab=loaded.vocab,
        )
        write_stream_report(
            stats,
            report or out_dir / "stream_report.txt",
            provenance=[
                *config.provenance_lines(),
                f"checkpoint={checkpoint.name}",
            ],
        )


if __name__ == "__main__":
    app()
