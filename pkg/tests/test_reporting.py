"""Tests for metrics files, checkpoints and plots."""

import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from rich.console import Console

from minmax_bnn.encoders.manifest import build_manifest
from minmax_bnn.errors import CheckpointError, MetricsFormatError
from minmax_bnn.eval_knn.metrics import EvalReport
from minmax_bnn.reporting.checkpoint import (
    CheckpointHeader,
    blob_path_for,
    load_checkpoint,
    save_checkpoint,
)
from minmax_bnn.reporting.plot import accuracy_chart, write_accuracy_plot
from minmax_bnn.reporting.results import (
    ConsoleProgressSink,
    CsvMetricsSink,
    eval_report_json,
    format_metrics_row,
    read_metrics_csv,
)
from minmax_bnn.stochastic.sampling import init_params
from minmax_bnn.training.metrics import METRICS_HEADER, MetricsRow, RunMetrics

SVG = "{http://www.w3.org/2000/svg}"


def update_row(step, inner, phase, tau=1.5):
    return MetricsRow(
        step=step, inner=inner, phase=phase, draw_id=step * 10 + inner,
        tau=tau, dr_z=0.5, dr_zhat=0.75, pairwise_sum=0.25, sigma_mean=0.02,
    )


def eval_row(step, acc_netd, acc_netg):
    return MetricsRow(
        step=step, inner=2, phase="E", draw_id=step * 10 + 2,
        acc_netd=acc_netd, acc_netg=acc_netg, gap=abs(acc_netd - acc_netg),
    )


def sample_metrics():
    metrics = RunMetrics()
    for step, (d, g) in enumerate([(0.5, 0.4), (0.6, 0.6), (0.7, 0.65)], start=1):
        metrics.record(update_row(step, 0, "D"))
        metrics.record(update_row(step, 1, "V", tau=2.0 + step))
        metrics.record(eval_row(step, d, g))
    return metrics


class TestRunMetrics:
    def test_ledger(self):
        metrics = sample_metrics()
        assert metrics.total_rows == 9
        assert metrics.d_updates == 3
        assert metrics.v_updates == 3
        assert metrics.phase_sequence == "DVDVDV"
        assert metrics.final_tau == 5.0
        assert metrics.final_eval.acc_netd == 0.7

    def test_accuracy_correlation(self):
        assert sample_metrics().accuracy_correlation == pytest.approx(0.944911, abs=1e-5)

    def test_correlation_needs_two_evaluations(self):
        metrics = RunMetrics()
        metrics.record(eval_row(1, 0.5, 0.4))
        assert metrics.accuracy_correlation is None


class TestMetricsCsv:
    def test_header_and_rows(self, tmp_path):
        path = tmp_path / "metrics.csv"
        sink = CsvMetricsSink(path)
        for row in sample_metrics().rows[:3]:
            sink.write(row)
        sink.close()

        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(METRICS_HEADER)
        assert len(lines) == 4
        assert lines[1] == "1,0,D,1.5,0.5,0.75,0.25,0.02,,,,10,"
        assert lines[3].startswith("1,2,E,,,,,,0.5,0.4,")

    def test_reads_back_rows(self, tmp_path):
        path = tmp_path / "metrics.csv"
        sink = CsvMetricsSink(path)
        for row in sample_metrics().rows:
            sink.write(row)
        sink.close()
        assert read_metrics_csv(path).rows == sample_metrics().rows

    def test_float_text_is_exact(self):
        row = update_row(1, 0, "D", tau=0.1 + 0.2)
        assert float(format_metrics_row(row)[3]) == 0.1 + 0.2

    def test_bad_phase_reports_line(self, tmp_path):
        path = tmp_path / "metrics.csv"
        path.write_text(
            ",".join(METRICS_HEADER) + "\n"
            "1,0,D,1.5,0.5,0.75,0.25,0.02,,,,10,\n"
            "1,1,Q,1.5,0.5,0.75,0.25,0.02,,,,11,\n",
            encoding="utf-8",
        )
        with pytest.raises(MetricsFormatError) as exc:
            read_metrics_csv(path)
        assert exc.value.line == 3
        assert "line 3" in str(exc.value)

    def test_field_count(self, tmp_path):
        path = tmp_path / "metrics.csv"
        path.write_text(",".join(METRICS_HEADER) + "\n1,0,D\n", encoding="utf-8")
        with pytest.raises(MetricsFormatError) as exc:
            read_metrics_csv(path)
        assert exc.value.line == 2

    def test_not_a_number(self, tmp_path):
        path = tmp_path / "metrics.csv"
        path.write_text(
            ",".join(METRICS_HEADER) + "\n1,0,D,abc,0.5,0.75,0.25,0.02,,,,10,\n",
            encoding="utf-8",
        )
        with pytest.raises(MetricsFormatError):
            read_metrics_csv(path)

    def test_evaluation_row_needs_accuracies(self, tmp_path):
        path = tmp_path / "metrics.csv"
        path.write_text(
            ",".join(METRICS_HEADER) + "\n1,2,E,,,,,,,0.5,0.1,3,\n", encoding="utf-8"
        )
        with pytest.raises(MetricsFormatError, match="acc_netd") as exc:
            read_metrics_csv(path)
        assert exc.value.line == 2

    def test_bad_header(self, tmp_path):
        path = tmp_path / "metrics.csv"
        path.write_text("step,inner\n", encoding="utf-8")
        with pytest.raises(MetricsFormatError) as exc:
            read_metrics_csv(path)
        assert exc.value.line == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_metrics_csv(tmp_path / "absent.csv")


class TestConsoleProgress:
    def test_prints_v_and_e_rows_only(self):
        out = Console(record=True, width=200)
        sink = ConsoleProgressSink(3, out=out)
        for row in sample_metrics().rows[:3]:
            sink.write(row)
        text = out.export_text()
        assert "tau=3.0000" in text
        assert "acc_netd=0.5000" in text
        assert len(text.strip().splitlines()) == 2


class TestCheckpoint:
    @pytest.fixture
    def saved(self, tmp_path):
        manifest = build_manifest("mlp", 8)
        mu, var = init_params(manifest, 0.02, 0.3, np.random.default_rng(0))
        header = CheckpointHeader(arch="mlp", feature_dim=8, classes=[0, 1, 2], step=40, seed=3)
        path = save_checkpoint(tmp_path / "checkpoint.json", header, mu, var)
        return path, mu, var

    def test_values_are_fp32_exact(self, saved):
        path, mu, var = saved
        ckpt = load_checkpoint(path)
        assert ckpt.header.step == 40
        assert ckpt.header.classes == [0, 1, 2]
        assert ckpt.manifest.feature_dim == 8
        for name in mu:
            np.testing.assert_array_equal(ckpt.mu[name], mu[name].astype(np.float32))
            np.testing.assert_array_equal(ckpt.var[name], var[name].astype(np.float32))
            assert ckpt.mu[name].dtype == np.float64

    def test_layout(self, saved):
        path, mu, _ = saved
        document = json.loads(path.read_text(encoding="utf-8"))
        names = [entry["name"] for entry in document["arrays"]]
        assert names[: len(mu)] == [f"netd/{name}" for name in mu]
        assert names[len(mu) :] == [f"netv/{name}" for name in mu]
        assert document["arrays"][0]["byte_offset"] == 0
        assert blob_path_for(path).stat().st_size == 2 * 4 * mu.num_elements

    def _rewrite(self, path, edit):
        document = json.loads(path.read_text(encoding="utf-8"))
        edit(document)
        path.write_text(json.dumps(document), encoding="utf-8")

    def test_corrupted_offset(self, saved):
        path, _, _ = saved
        self._rewrite(path, lambda d: d["arrays"][1].update(byte_offset=d["arrays"][1]["byte_offset"] + 4))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_array(self, saved):
        path, _, _ = saved
        blob = blob_path_for(path)

        def drop_last(document):
            last = document["arrays"].pop()
            blob.write_bytes(blob.read_bytes()[: last["byte_offset"]])

        self._rewrite(path, drop_last)
        with pytest.raises(CheckpointError, match="mirror"):
            load_checkpoint(path)

    def test_truncated_blob(self, saved):
        path, _, _ = saved
        blob = blob_path_for(path)
        blob.write_bytes(blob.read_bytes()[:-4])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_wrong_format(self, saved):
        path, _, _ = saved
        self._rewrite(path, lambda d: d.update(format="something-else"))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_unknown_arch(self, saved):
        path, _, _ = saved
        self._rewrite(path, lambda d: d["header"].update(arch="vit"))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.json")


class TestPlot:
    def test_one_vertex_per_evaluation(self):
        svg = accuracy_chart(sample_metrics())
        lines = {p.get("data-series"): p.get("points") for p in svg.iter("polyline")}
        assert set(lines) == {"acc_netd", "acc_netg"}
        assert all(len(points.split()) == 3 for points in lines.values())

    def test_written_file_is_svg(self, tmp_path):
        out = write_accuracy_plot(sample_metrics(), tmp_path / "plots" / "acc.svg")
        root = ET.parse(out).getroot()
        assert root.tag == f"{SVG}svg"
        texts = [t.text for t in root.iter(f"{SVG}text")]
        assert "outer step" in texts
        assert "kNN accuracy" in texts
        assert len(list(root.iter(f"{SVG}polyline"))) == 2

    def test_tick_marks_share_the_axes_group(self):
        svg = accuracy_chart(sample_metrics())
        assert [child.tag for child in svg].count("line") == 0
        axes = next(g for g in svg.iter("g") if g.get("stroke") == "black")
        assert len(axes.findall("line")) == 2 + 6
        assert all(line.get("stroke") is None for line in axes.findall("line"))

    def test_single_evaluation(self):
        metrics = RunMetrics()
        metrics.record(eval_row(1, 0.5, 0.4))
        svg = accuracy_chart(metrics)
        assert [len(p.get("points").split()) for p in svg.iter("polyline")] == [1, 1]

    def test_no_evaluations(self):
        metrics = RunMetrics()
        metrics.record(update_row(1, 0, "D"))
        with pytest.raises(MetricsFormatError):
            accuracy_chart(metrics)


def test_eval_report_json():
    report = EvalReport(step=3, acc_netd=0.5, acc_netg=0.25, k=5, n_train=10, n_test=4, draw_id=9)
    data = json.loads(eval_report_json(report))
    assert data["gap"] == 0.25
    assert list(data) == sorted(data)
