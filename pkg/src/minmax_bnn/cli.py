"""CLI entry point for min-max Bayesian encoder training."""

from __future__ import annotations

from pathlib import Path

import click
from rich.console import Console

from .config import DATA_DIR, MNIST_FILES, PRESETS_DIR, RunConfig, load_run_config, parse_overrides
from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    EmptySetError,
    IdxParseError,
    MetricsFormatError,
    NumericAbort,
)

console = Console()
err_console = Console(stderr=True)

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_CHECKPOINT = 5
EXIT_METRICS = 6


def _fail(kind: str, error: Exception | str, code: int):
    err_console.print(f"error: {kind}: {error}", markup=False, highlight=False, soft_wrap=True)
    raise click.exceptions.Exit(code)


def _resolve_config_path(config: Path) -> Path:
    """A config argument may also name a preset under configs/."""
    if config.exists():
        return config
    for suffix in (".yaml", ".yml", ".json"):
        preset = PRESETS_DIR / f"{config.name}{suffix}"
        if preset.exists():
            return preset
    return config


def _load_views(
    train_images: Path,
    train_labels: Path,
    test_images: Path,
    test_labels: Path,
    classes: list[int],
    train_per_class: int | None = None,
    test_per_class: int | None = None,
):
    from .data.idx import load_split
    from .data.views import limit_per_class, make_view
    from .training.runner import TrainingData

    train = make_view(*load_split(train_images, train_labels), classes)
    test = make_view(*load_split(test_images, test_labels), classes)
    return TrainingData(
        train=limit_per_class(train, train_per_class),
        test=limit_per_class(test, test_per_class),
    )


def load_run_data(config: RunConfig):
    config.check_data_paths()
    return _load_views(
        config.train_images,
        config.train_labels,
        config.test_images,
        config.test_labels,
        config.classes,
        config.train_per_class,
        config.test_per_class,
    )


DATA_ERRORS = (DataError, IdxParseError, EmptySetError, FileNotFoundError)


@click.group()
@click.version_option(version="0.1.0")
def cli():
    """Min-max Bayesian encoder training.

    Trains a mean network (NetD) and a variance network (NetV) against a
    coding-rate objective, and evaluates NetD and sampled NetG encoders
    with kNN in feature space.
    """


@cli.command(context_settings={"ignore_unknown_options": True, "allow_extra_args": True})
@click.argument("config", type=click.Path(path_type=Path))
@click.argument("overrides", nargs=-1, type=click.UNPROCESSED)
def train(config: Path, overrides: tuple[str, ...]):
    """Train from a CONFIG file (JSON or YAML, or a preset name).

    Any config key can be overridden with --key value after the config
    path. Writes metrics.csv, resolved-config.json and checkpoints to the
    run's output_dir.
    """
    from .encoders.manifest import build_manifest
    from .reporting.checkpoint import CheckpointHeader, save_checkpoint
    from .reporting.results import (
        ConsoleProgressSink,
        CsvMetricsSink,
        print_run_summary,
        write_resolved_config,
    )
    from .training.runner import run

    try:
        run_config = load_run_config(_resolve_config_path(config), parse_overrides(list(overrides)))
        manifest = build_manifest(run_config.arch, run_config.feature_dim)
    except ConfigError as e:
        _fail("config", e, EXIT_CONFIG)

    try:
        data = load_run_data(run_config)
    except DATA_ERRORS as e:
        _fail("data", e, EXIT_DATA)

    out = run_config.output_dir
    console.print(
        f"[bold]Training[/bold] (arch={run_config.arch}, d={run_config.feature_dim}, "
        f"ns={run_config.ns}, numsteps={run_config.numsteps}, seed={run_config.seed})"
    )
    console.print(f"Classes: {run_config.classes}  train={len(data.train)}  test={len(data.test)}")
    console.print(f"Output: {out}")
    write_resolved_config(out / "resolved-config.json", run_config.resolved())

    def header(step: int) -> CheckpointHeader:
        return CheckpointHeader(
            arch=run_config.arch,
            feature_dim=run_config.feature_dim,
            classes=list(run_config.classes),
            step=step,
            seed=run_config.seed,
            zero_sigma=run_config.zero_sigma,
        )

    def on_checkpoint(step, mu, var):
        save_checkpoint(out / "checkpoints" / f"step-{step:05d}.json", header(step), mu, var)

    try:
        result = run(
            run_config.train_config(),
            run_config.rate_config(),
            manifest,
            data,
            sinks=[CsvMetricsSink(out / "metrics.csv"), ConsoleProgressSink(run_config.numsteps)],
            k_nn=run_config.k_nn,
            eval_every=run_config.eval_every,
            checkpoint_every=run_config.checkpoint_every,
            on_checkpoint=on_checkpoint,
            record_wall_clock=run_config.record_wall_clock,
        )
    except NumericAbort as e:
        _fail("numeric", e, EXIT_NUMERIC)
    except ConfigError as e:
        _fail("config", e, EXIT_CONFIG)

    save_checkpoint(out / "checkpoint.json", header(run_config.numsteps), result.mu, result.var)
    print_run_summary(result.metrics)


@cli.command("eval")
@click.argument("checkpoint", type=click.Path(path_type=Path))
@click.option("--train-images", type=click.Path(path_type=Path), default=None)
@click.option("--train-labels", type=click.Path(path_type=Path), default=None)
@click.option("--test-images", type=click.Path(path_type=Path), default=None)
@click.option("--test-labels", type=click.Path(path_type=Path), default=None)
@click.option(
    "--classes",
    default=None,
    help="Comma-separated class subset. Defaults to the checkpoint's classes.",
)
@click.option("--train-per-class", type=int, default=None)
@click.option("--test-per-class", type=int, default=None)
@click.option("--k", "k", type=int, default=5, show_default=True, help="Neighbors in the kNN vote.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for NetG draws.")
@click.option("--draws", type=int, default=1, show_default=True, help="Number of NetG draws.")
@click.option("--zero-sigma", is_flag=True, help="Evaluate NetG with sigma forced to 0.")
@click.option("--table", is_flag=True, help="Also print a rich table of the draws.")
def eval_checkpoint(
    checkpoint: Path,
    train_images: Path | None,
    train_labels: Path | None,
    test_images: Path | None,
    test_labels: Path | None,
    classes: str | None,
    train_per_class: int | None,
    test_per_class: int | None,
    k: int,
    seed: int,
    draws: int,
    zero_sigma: bool,
    table: bool,
):
    """Evaluate NetD and NetG draws from a CHECKPOINT with kNN.

    Prints one JSON line per NetG draw on standard output.
    """
    from .eval_knn.runner import evaluate_draws
    from .reporting.checkpoint import load_checkpoint
    from .reporting.results import eval_report_json, print_eval_report
    from .stochastic.sampling import NoiseSource

    try:
        ckpt = load_checkpoint(checkpoint)
    except CheckpointError as e:
        _fail("checkpoint", e, EXIT_CHECKPOINT)

    paths = {
        "train_images": train_images,
        "train_labels": train_labels,
        "test_images": test_images,
        "test_labels": test_labels,
    }
    for key, value in paths.items():
        if value is None:
            paths[key] = DATA_DIR / MNIST_FILES[key]
    try:
        subset = (
            [int(c) for c in classes.split(",") if c.strip()] if classes else ckpt.header.classes
        )
    except ValueError:
        _fail("config", f"--classes must be comma-separated integers, got {classes!r}", EXIT_CONFIG)
    if not subset:
        _fail("config", "no classes given and the checkpoint names none", EXIT_CONFIG)

    try:
        data = _load_views(**paths, classes=subset, train_per_class=train_per_class,
                           test_per_class=test_per_class)
    except DATA_ERRORS as e:
        _fail("data", e, EXIT_DATA)

    try:
        results = evaluate_draws(
            ckpt.mu,
            ckpt.var,
            ckpt.manifest,
            data.train,
            data.test,
            k,
            NoiseSource(seed),
            draws=draws,
            step=ckpt.header.step,
            zero_sigma=zero_sigma or ckpt.header.zero_sigma,
        )
    except ValueError as e:
        _fail("config", e, EXIT_CONFIG)

    for report in results.reports:
        click.echo(eval_report_json(report))
    if table:
        print_eval_report(results)


@cli.command()
@click.argument("metrics", type=click.Path(path_type=Path))
@click.argument("out", type=click.Path(path_type=Path))
def plot(metrics: Path, out: Path):
    """Draw NetD and NetG accuracy from a METRICS csv into an SVG at OUT."""
    from .reporting.plot import write_accuracy_plot
    from .reporting.results import read_metrics_csv

    try:
        run_metrics = read_metrics_csv(metrics)
        write_accuracy_plot(run_metrics, out)
    except FileNotFoundError as e:
        _fail("data", e, EXIT_DATA)
    except MetricsFormatError as e:
        _fail("metrics", e, EXIT_METRICS)
    console.print(f"Wrote {out} ({len(run_metrics.eval_rows)} evaluations)")


@cli.command()
@click.argument("run_dirs", nargs=-1, required=True, type=click.Path(path_type=Path))
def summarize(run_dirs: tuple[Path, ...]):
    """Compare finished runs side by side (final accuracies, gap, correlation)."""
    import json

    from .reporting.results import print_run_comparison, read_metrics_csv

    runs = []
    for run_dir in run_dirs:
        config_path = run_dir / "resolved-config.json"
        try:
            run_metrics = read_metrics_csv(run_dir / "metrics.csv")
            resolved = json.loads(config_path.read_text(encoding="utf-8"))
        except (FileNotFoundError, json.JSONDecodeError) as e:
            _fail("data", e, EXIT_DATA)
        except MetricsFormatError as e:
            _fail("metrics", f"{run_dir}: {e}", EXIT_METRICS)
        runs.append((run_dir.name, resolved, run_metrics))
    print_run_comparison(runs)


if __name__ == "__main__":
    cli()
