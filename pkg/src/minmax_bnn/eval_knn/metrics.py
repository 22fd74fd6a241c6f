"""Metrics for kNN evaluation of NetD and NetG features."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


def compute_accuracy(predicted: np.ndarray, expected: np.ndarray) -> float:
    """Fraction of predictions equal to the expected labels."""
    predicted = np.asarray(predicted)
    expected = np.asarray(expected)
    if predicted.shape != expected.shape:
        raise ValueError(f"prediction shape {predicted.shape} vs labels {expected.shape}")
    if expected.size == 0:
        return 0.0
    return float(np.count_nonzero(predicted == expected)) / expected.size


@dataclass
class EvalReport:
    """kNN accuracy of NetD and one NetG draw on the same split."""

    step: int
    acc_netd: float
    acc_netg: float
    k: int
    n_train: int
    n_test: int
    draw_id: int

    @property
    def gap(self) -> float:
        return abs(self.acc_netd - self.acc_netg)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["gap"] = self.gap
        return data


@dataclass
class EvalDrawSet:
    """Reports from several NetG draws against one NetD."""

    reports: list[EvalReport] = field(default_factory=list)

    def record(self, report: EvalReport) -> None:
        self.reports.append(report)

    @property
    def total_draws(self) -> int:
        return len(self.reports)

    @property
    def acc_netd(self) -> float:
        return self.reports[0].acc_netd if self.reports else 0.0

    @property
    def netg_accuracies(self) -> list[float]:
        return [r.acc_netg for r in self.reports]

    @property
    def mean_acc_netg(self) -> float:
        if not self.reports:
            return 0.0
        return sum(self.netg_accuracies) / len(self.reports)

    @property
    def netg_range(self) -> float:
        """max - min NetG accuracy over the draws."""
        if not self.reports:
            return 0.0
        return max(self.netg_accuracies) - min(self.netg_accuracies)

    @property
    def max_gap(self) -> float:
        if not self.reports:
            return 0.0
        return max(r.gap for r in self.reports)
