"""Runner for kNN evaluation in the learned feature subspace."""

from __future__ import annotations

import numpy as np

from ..config import EVAL_CHUNK
from ..data.views import DatasetView
from ..encoders.manifest import ArchitectureManifest
from ..encoders.networks import forward
from ..stochastic.params import MeanParams, ParamSet, VarianceParams
from ..stochastic.sampling import NoiseSource, sample_net
from .knn import knn_predict
from .metrics import EvalDrawSet, EvalReport, compute_accuracy


def embed(
    manifest: ArchitectureManifest,
    params: ParamSet,
    images: np.ndarray,
    chunk: int = EVAL_CHUNK,
) -> np.ndarray:
    """Unit-norm d x N features for a whole image set, without a tape."""
    parts = [
        forward(manifest, params, images[start : start + chunk]).data
        for start in range(0, images.shape[0], chunk)
    ]
    return np.concatenate(parts, axis=1)


def knn_accuracy(
    manifest: ArchitectureManifest,
    params: ParamSet,
    train_view: DatasetView,
    test_view: DatasetView,
    k: int,
) -> float:
    train_feats = embed(manifest, params, train_view.images)
    test_feats = embed(manifest, params, test_view.images)
    predicted = knn_predict(train_feats, train_view.labels, test_feats, k)
    return compute_accuracy(predicted, test_view.labels)


def evaluate(
    mu: MeanParams,
    var: VarianceParams,
    manifest: ArchitectureManifest,
    train_view: DatasetView,
    test_view: DatasetView,
    k: int,
    noise: NoiseSource,
    step: int = 0,
    zero_sigma: bool = False,
) -> EvalReport:
    """kNN accuracy of NetD and of one fresh NetG draw on the same split."""
    if len(train_view) == 0 or len(test_view) == 0:
        raise ValueError("evaluation needs non-empty train and test views")
    acc_netd = knn_accuracy(manifest, mu, train_view, test_view, k)
    netg = sample_net(mu, var, noise, zero_sigma=zero_sigma)
    acc_netg = knn_accuracy(manifest, netg.params, train_view, test_view, k)
    return EvalReport(
        step=step,
        acc_netd=acc_netd,
        acc_netg=acc_netg,
        k=k,
        n_train=len(train_view),
        n_test=len(test_view),
        draw_id=netg.draw_id,
    )


def evaluate_draws(
    mu: MeanParams,
    var: VarianceParams,
    manifest: ArchitectureManifest,
    train_view: DatasetView,
    test_view: DatasetView,
    k: int,
    noise: NoiseSource,
    draws: int,
    step: int = 0,
    zero_sigma: bool = False,
) -> EvalDrawSet:
    """One report per fresh NetG draw; NetD accuracy is computed once."""
    if draws < 1:
        raise ValueError(f"draws must be >= 1, got {draws}")
    acc_netd = knn_accuracy(manifest, mu, train_view, test_view, k)
    results = EvalDrawSet()
    for _ in range(draws):
        netg = sample_net(mu, var, noise, zero_sigma=zero_sigma)
        results.record(
            EvalReport(
                step=step,
                acc_netd=acc_netd,
                acc_netg=knn_accuracy(manifest, netg.params, train_view, test_view, k),
                k=k,
                n_train=len(train_view),
                n_test=len(test_view),
                draw_id=netg.draw_id,
            )
        )
    return results
