"""Main CLI interface for the fraud detection pipeline."""

from contextlib import nullcontext
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from src import __version__
from src.config import settings
from src.data.synthetic import generate_synthetic
from src.evaluation.reporting import comparison_table, cv_table, render_report
from src.explain.permutation import METRICS
from src.pipeline.evaluate import run_evaluate
from src.pipeline.explain import METHODS, SHAP_MODELS, run_explain
from src.pipeline.prepare import run_prepare
from src.pipeline.report import run_report
from src.pipeline.run_config import TUNING_TARGETS, RunConfig
from src.pipeline.train import run_train, run_tune
from src.utils.errors import StageError
from src.utils.logger import app_logger as logger
from src.utils.logger import progress_enabled

console = Console()

DEFAULT_CONFIG = Path("config/pipeline.yaml")


def _fail(e: Exception, what: str) -> None:
    """Print a stage-tagged error, log it and abort with a non-zero exit code."""
    if isinstance(e, StageError):
        console.print(f"[red]Error: {escape(f'[{e.stage}] {e.detail}')}[/red]")
    else:
        console.print(f"[red]Error: {escape(str(e))}[/red]")
    logger.error(f"{what} failed: {e}")
    raise click.Abort()


def _load_config(ctx: click.Context, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    opts = ctx.obj
    merged: Dict[str, Any] = {"seed": opts["seed"]}
    if opts["out"] is not None:
        merged["output_dir"] = str(Path(opts["out"]).resolve())
    merged.update(overrides or {})
    return RunConfig.from_yaml(opts["config"], overrides=merged, default_seed=settings.seed)


def _jobs(ctx: click.Context) -> int:
    return ctx.obj["jobs"] or settings.effective_jobs


@click.group()
@click.version_option(version=__version__)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=DEFAULT_CONFIG,
              show_default=True, help="Run configuration (YAML)")
@click.option("--seed", type=int, default=None, help="Random seed (overrides the config file)")
@click.option("--jobs", type=click.IntRange(min=0), default=None,
              help="Worker threads (0 = all cores). Use --jobs 1 for byte-identical artifacts across runs.")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Artifact directory")
@click.pass_context
def cli(ctx: click.Context, config_path: Path, seed: Optional[int], jobs: Optional[int], out: Optional[Path]):
    """Explainable stacked gradient boosting for transaction fraud detection."""
    ctx.ensure_object(dict)
    ctx.obj.update({"config": config_path, "seed": seed, "jobs": jobs, "out": out})


@cli.command("synth-data")
@click.option("--rows", type=click.IntRange(min=100), default=10_000, show_default=True,
              help="Number of transactions")
@click.option("--dir", "out_dir", type=click.Path(path_type=Path), default=None,
              help="Output directory (default: settings data_dir)")
@click.pass_context
def synth_data(ctx: click.Context, rows: int, out_dir: Optional[Path]):
    """Generate the bundled imbalanced synthetic dataset."""
    seed = ctx.obj["seed"] if ctx.obj["seed"] is not None else settings.seed
    out_dir = out_dir or settings.data_dir
    console.print(f"[bold blue]Generating {rows} synthetic transactions (seed {seed})...[/bold blue]")
    try:
        dataset = generate_synthetic(out_dir, n_rows=rows, seed=seed)
        console.print(f"[green]Wrote {dataset.transaction_path}[/green]")
        console.print(f"[green]Wrote {dataset.identity_path}[/green]")
        console.print(f"[green]Wrote {dataset.schema_path}[/green]")
        console.print(f"[cyan]Fraud rate: {dataset.n_positive}/{dataset.n_rows}[/cyan]")
    except Exception as e:
        _fail(e, "Synthetic data generation")


@cli.command()
@click.option("--paper-faithful-order", "--smote-before-split", "smote_before_split", is_flag=True,
              help="Apply SMOTE before the train/test split (synthetic rows reach the test set)")
@click.option("--smote-k", type=click.IntRange(min=1), default=None, help="SMOTE neighbours")
@click.option("--smote-ratio", type=click.FloatRange(0, 1, min_open=True), default=None,
              help="Target minority/majority ratio")
@click.pass_context
def prepare(ctx: click.Context, smote_before_split: bool, smote_k: Optional[int],
            smote_ratio: Optional[float]):
    """Load, join, impute, encode and split the raw CSVs."""
    console.print("[bold blue]Preparing dataset...[/bold blue]")
    try:
        cfg = _load_config(ctx, {
            "smote_before_split": smote_before_split or None,
            "smote.k_neighbors": smote_k,
            "smote.target_ratio": smote_ratio,
        })
        prepared = run_prepare(cfg, max_workers=_jobs(ctx))
        console.print(f"[green]Train rows: {prepared.train.n_rows}, test rows: {prepared.test.n_rows}[/green]")
        console.print(f"[green]Location: {prepared.layout.prepared_dir}[/green]")
    except Exception as e:
        _fail(e, "Prepare")


@cli.command()
@click.option("--skip-tune", is_flag=True, help="Use configured hyperparameters without searching")
@click.option("--threshold", default=None, help="Decision threshold policy: f1_optimal or fixed:V")
@click.option("--naive-stacking", is_flag=True,
              help="Train the meta-learner on in-sample base predictions")
@click.option("--smote-k", type=click.IntRange(min=1), default=None, help="SMOTE neighbours")
@click.option("--smote-ratio", type=click.FloatRange(0, 1, min_open=True), default=None,
              help="Target minority/majority ratio")
@click.option("--folds", type=click.IntRange(min=2), default=None, help="Stacking folds")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Tuning trials")
@click.option("--strategy", type=click.Choice(["random", "adaptive"]), default=None, help="Tuning strategy")
@click.option("--target", type=click.Choice(TUNING_TARGETS), default=None, help="Component to tune")
@click.pass_context
def train(ctx: click.Context, skip_tune: bool, threshold: Optional[str], naive_stacking: bool,
          smote_k: Optional[int], smote_ratio: Optional[float], folds: Optional[int], trials: Optional[int],
          strategy: Optional[str], target: Optional[str]):
    """Select features, tune, and train the stacking ensemble and baselines."""
    console.print("[bold blue]Training stacking ensemble...[/bold blue]")
    try:
        cfg = _load_config(ctx, {
            "threshold": threshold,
            "naive_stacking": naive_stacking or None,
            "smote.k_neighbors": smote_k,
            "smote.target_ratio": smote_ratio,
            "folds": folds,
            "tuning.trials": trials,
            "tuning.strategy": strategy,
            "tuning.target": target,
        })
        with console.status("[bold green]Training in progress...") if not progress_enabled() else nullcontext():
            outcome = run_train(cfg, max_workers=_jobs(ctx), skip_tune=skip_tune, progress=progress_enabled())
        result = outcome.stacking
        console.print(f"[green]Selected {len(outcome.selected)} features[/green]")
        if outcome.tuning is not None:
            console.print(f"[cyan]Best tuning score: {outcome.tuning.best_score:.4f}[/cyan]")
        console.print(cv_table(result.fold_aucs))
        console.print(f"[cyan]Decision threshold: {result.model.threshold:.4f}[/cyan]")
        console.print(f"[green]Model: {outcome.layout.stacking_model}[/green]")
    except Exception as e:
        _fail(e, "Training")


@cli.command()
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Number of trials")
@click.option("--strategy", type=click.Choice(["random", "adaptive"]), default=None, help="Search strategy")
@click.option("--target", type=click.Choice(TUNING_TARGETS), default=None, help="Component to tune")
@click.pass_context
def tune(ctx: click.Context, trials: Optional[int], strategy: Optional[str], target: Optional[str]):
    """Run a hyperparameter search and write the trial log."""
    console.print("[bold blue]Tuning hyperparameters...[/bold blue]")
    try:
        cfg = _load_config(ctx, {"tuning.trials": trials, "tuning.strategy": strategy, "tuning.target": target})
        result = run_tune(cfg, max_workers=_jobs(ctx), progress=progress_enabled())
        table = Table(show_header=True, header_style="bold magenta")
        table.add_column("Parameter", style="cyan")
        table.add_column("Best value", style="green")
        for name, value in result.best_params.items():
            table.add_row(name, f"{value:.4g}" if isinstance(value, float) else str(value))
        console.print(table)
        failed = sum(t.failed for t in result.trials)
        console.print(f"[green]Best score {result.best_score:.4f} over {len(result.trials)} trials "
                      f"({failed} failed)[/green]")
    except Exception as e:
        _fail(e, "Tuning")


@cli.command()
@click.pass_context
def evaluate(ctx: click.Context):
    """Score the test set and write metrics, curves and the comparison table."""
    console.print("[bold blue]Evaluating...[/bold blue]")
    try:
        cfg = _load_config(ctx)
        outcome = run_evaluate(cfg)
        render_report(console, outcome.test, "test")
        render_report(console, outcome.balanced_train, "balanced train")
        console.print(comparison_table(outcome.comparison))
    except Exception as e:
        _fail(e, "Evaluation")


@cli.command()
@click.option("--method", type=click.Choice(METHODS), required=True, help="Explanation method")
@click.option("--row", "rows", type=click.IntRange(min=0), multiple=True, help="Test row to explain (repeatable)")
@click.option("--feature", "features", multiple=True, help="Feature for partial dependence (repeatable)")
@click.option("--summary", is_flag=True, help="Write the global SHAP summary")
@click.option("--model", "model_name", type=click.Choice(SHAP_MODELS), default="selection", show_default=True,
              help="Model explained by SHAP")
@click.option("--metric", type=click.Choice(METRICS), default="auc", show_default=True,
              help="Permutation importance metric")
@click.pass_context
def explain(ctx: click.Context, method: str, rows: Tuple[int, ...], features: Tuple[str, ...], summary: bool,
            model_name: str, metric: str):
    """Write SHAP, LIME, partial dependence or permutation importance artifacts."""
    console.print(f"[bold blue]Explaining with {method}...[/bold blue]")
    try:
        cfg = _load_config(ctx)
        written = run_explain(cfg, method, rows=list(rows), features=list(features), summary=summary,
                              model_name=model_name, metric=metric, max_workers=_jobs(ctx))
        for path in written:
            console.print(f"[green]Wrote {path}[/green]")
    except Exception as e:
        _fail(e, "Explanation")


@cli.command()
@click.pass_context
def report(ctx: click.Context):
    """Gather run artifacts into report.json and print a summary."""
    console.print(Panel("[bold cyan]Fraud detection run report[/bold cyan]"))
    try:
        cfg = _load_config(ctx)
        run_report(cfg, console=console)
    except Exception as e:
        _fail(e, "Report")


if __name__ == "__main__":
    cli()
