"""Reporting utilities for training runs: metrics files and console tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.table import Table

from ..errors import MetricsFormatError
from ..eval_knn.metrics import EvalDrawSet, EvalReport
from ..training.metrics import METRICS_HEADER, PHASES, MetricsRow, RunMetrics

console = Console()

INT_COLUMNS = ("step", "inner", "draw_id")
EVAL_COLUMNS = ("acc_netd", "acc_netg", "gap")


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_metrics_row(row: MetricsRow) -> list[str]:
    return [_format_cell(getattr(row, column)) for column in METRICS_HEADER]


class CsvMetricsSink:
    """Writes metrics.csv with the fixed header, flushing after every row."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(METRICS_HEADER)

    def write(self, row: MetricsRow) -> None:
        self._writer.writerow(format_metrics_row(row))
        self._file.flush()

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()


class ConsoleProgressSink:
    """One progress line per NetV update and per evaluation."""

    def __init__(self, numsteps: int, out: Console | None = None):
        self.numsteps = numsteps
        self.console = out or console

    def write(self, row: MetricsRow) -> None:
        prefix = f"[dim][{row.step}/{self.numsteps}][/dim]"
        if row.phase == "V":
            self.console.print(
                f"{prefix} tau={row.tau:.4f} dR(Z)={row.dr_z:.4f} "
                f"dR(Zhat)={row.dr_zhat:.4f} pairwise={row.pairwise_sum:.4f} "
                f"sigma={row.sigma_mean:.3g}"
            )
        elif row.phase == "E":
            self.console.print(
                f"{prefix} [green]acc_netd={row.acc_netd:.4f}[/green] "
                f"[yellow]acc_netg={row.acc_netg:.4f}[/yellow] gap={row.gap:.4f}"
            )

    def close(self) -> None:
        pass


def _parse_cell(column: str, text: str, line: int) -> Any:
    if column == "phase":
        if text not in PHASES:
            raise MetricsFormatError(f"unknown phase {text!r}", line)
        return text
    if text == "":
        if column in INT_COLUMNS:
            raise MetricsFormatError(f"{column} is empty", line)
        return None
    try:
        return int(text) if column in INT_COLUMNS else float(text)
    except ValueError:
        raise MetricsFormatError(f"{column}: not a number: {text!r}", line) from None


def read_metrics_csv(path: Path) -> RunMetrics:
    """Parse a metrics.csv; errors carry the 1-based line number."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"metrics file not found: {path}")
    metrics = RunMetrics()
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise MetricsFormatError("file is empty", 1) from None
        except csv.Error as e:
            raise MetricsFormatError(str(e), 1) from None
        if tuple(header) != METRICS_HEADER:
            raise MetricsFormatError(f"unexpected header {','.join(header)!r}", 1)
        while True:
            try:
                cells = next(reader)
            except StopIteration:
                break
            except csv.Error as e:
                raise MetricsFormatError(str(e), reader.line_num) from None
            line = reader.line_num
            if not cells:
                continue
            if len(cells) != len(METRICS_HEADER):
                raise MetricsFormatError(
                    f"expected {len(METRICS_HEADER)} fields, got {len(cells)}", line
                )
            values = {
                column: _parse_cell(column, text, line)
                for column, text in zip(METRICS_HEADER, cells)
            }
            if values["phase"] == "E":
                for column in EVAL_COLUMNS:
                    if values[column] is None:
                        raise MetricsFormatError(f"E row has no {column}", line)
            metrics.record(MetricsRow(**values))
    return metrics


def write_resolved_config(path: Path, resolved: dict[str, Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(resolved, indent=2, sort_keys=True), encoding="utf-8")


def _fmt(value: float | None, spec: str = ".4f") -> str:
    return "-" if value is None else format(value, spec)


def print_run_summary(metrics: RunMetrics) -> None:
    """Print a training run summary to console."""
    console.print("\n[bold]Training Summary[/bold]\n")

    summary = Table(title="Summary")
    summary.add_column("Metric", style="cyan")
    summary.add_column("Value", style="green")

    summary.add_row("NetD Updates", str(metrics.d_updates))
    summary.add_row("NetV Updates", str(metrics.v_updates))
    summary.add_row("Evaluations", str(len(metrics.eval_rows)))
    summary.add_row("Final tau", _fmt(metrics.final_tau))
    final = metrics.final_eval
    if final is not None:
        summary.add_row("Final Acc NetD", _fmt(final.acc_netd))
        summary.add_row("Final Acc NetG", _fmt(final.acc_netg))
        summary.add_row("Final Gap", _fmt(final.gap))
    summary.add_row("Acc Correlation", _fmt(metrics.accuracy_correlation, ".3f"))
    console.print(summary)


def print_eval_report(results: EvalDrawSet) -> None:
    """Print a per-draw table of NetG accuracy against NetD."""
    console.print("\n[bold]kNN Evaluation[/bold]\n")
    table = Table()
    table.add_column("Draw", style="dim")
    table.add_column("Acc NetD", style="green")
    table.add_column("Acc NetG", style="yellow")
    table.add_column("Gap", style="cyan")
    for report in results.reports:
        table.add_row(
            str(report.draw_id),
            f"{report.acc_netd:.4f}",
            f"{report.acc_netg:.4f}",
            f"{report.gap:.4f}",
        )
    console.print(table)
    if results.total_draws > 1:
        console.print(
            f"mean acc_netg={results.mean_acc_netg:.4f}  "
            f"range={results.netg_range:.4f}  max gap={results.max_gap:.4f}"
        )


def eval_report_json(report: EvalReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True)


def print_run_comparison(runs: list[tuple[str, dict[str, Any], RunMetrics]]) -> None:
    """Side-by-side table of several runs (e.g. ns=5 against ns=1)."""
    table = Table(title="Run Comparison")
    table.add_column("Run", style="cyan")
    table.add_column("ns", style="dim")
    table.add_column("lr", style="dim")
    table.add_column("Steps", style="dim")
    table.add_column("Acc NetD", style="green")
    table.add_column("Acc NetG", style="yellow")
    table.add_column("Gap")
    table.add_column("Pearson")

    for name, resolved, metrics in runs:
        final = metrics.final_eval
        table.add_row(
            name,
            str(resolved.get("ns", "-")),
            str(resolved.get("lr", "-")),
            str(metrics.v_updates),
            _fmt(final.acc_netd if final else None),
            _fmt(final.acc_netg if final else None),
            _fmt(final.gap if final else None),
            _fmt(metrics.accuracy_correlation, ".3f"),
        )
    console.print(table)
