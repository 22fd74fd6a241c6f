"""Metrics rows emitted by the alternating training loop."""

from __future__ import annotations

from dataclasses import dataclass, field

from scipy.stats import pearsonr

from ..eval_knn.metrics import EvalReport

METRICS_HEADER = (
    "step",
    "inner",
    "phase",
    "tau",
    "dr_z",
    "dr_zhat",
    "pairwise_sum",
    "sigma_mean",
    "acc_netd",
    "acc_netg",
    "gap",
    "draw_id",
    "ms",
)

PHASES = ("D", "V", "E")


@dataclass
class MetricsRow:
    """One NetD update (D), NetV update (V) or evaluation (E).

    ``inner`` is the row's position inside its outer step: D rows take
    0..ns-1, the V row takes ns and the E row ns + 1.
    """

    step: int
    inner: int
    phase: str  # "D", "V" or "E"
    draw_id: int
    tau: float | None = None
    dr_z: float | None = None
    dr_zhat: float | None = None
    pairwise_sum: float | None = None
    sigma_mean: float | None = None
    acc_netd: float | None = None
    acc_netg: float | None = None
    gap: float | None = None
    ms: float | None = None

    @classmethod
    def from_eval(cls, report: EvalReport, inner: int, ms: float | None = None) -> "MetricsRow":
        return cls(
            step=report.step,
            inner=inner,
            phase="E",
            draw_id=report.draw_id,
            acc_netd=report.acc_netd,
            acc_netg=report.acc_netg,
            gap=report.gap,
            ms=ms,
        )

    @property
    def is_update(self) -> bool:
        return self.phase in ("D", "V")


@dataclass
class RunMetrics:
    """Aggregated rows of one training run."""

    rows: list[MetricsRow] = field(default_factory=list)

    def record(self, row: MetricsRow) -> None:
        self.rows.append(row)

    @property
    def total_rows(self) -> int:
        return len(self.rows)

    @property
    def d_updates(self) -> int:
        return sum(1 for r in self.rows if r.phase == "D")

    @property
    def v_updates(self) -> int:
        return sum(1 for r in self.rows if r.phase == "V")

    @property
    def phase_sequence(self) -> str:
        """Phases of the update rows in order, e.g. "DDDDDV" per outer step."""
        return "".join(r.phase for r in self.rows if r.is_update)

    @property
    def eval_rows(self) -> list[MetricsRow]:
        return [r for r in self.rows if r.phase == "E"]

    @property
    def final_eval(self) -> MetricsRow | None:
        evals = self.eval_rows
        return evals[-1] if evals else None

    @property
    def final_tau(self) -> float | None:
        updates = [r for r in self.rows if r.is_update]
        return updates[-1].tau if updates else None

    @property
    def accuracy_correlation(self) -> float | None:
        """Pearson correlation of the NetD and NetG accuracy series.

        None with fewer than two E rows or a constant series.
        """
        evals = self.eval_rows
        if len(evals) < 2:
            return None
        netd = [r.acc_netd for r in evals]
        netg = [r.acc_netg for r in evals]
        if len(set(netd)) < 2 or len(set(netg)) < 2:
            return None
        return float(pearsonr(netd, netg).statistic)
