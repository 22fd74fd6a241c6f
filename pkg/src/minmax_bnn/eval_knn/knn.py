"""Brute-force k-nearest-neighbor label prediction on feature columns."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

QUERY_CHUNK = 1024


def knn_predict(
    train_feats: np.ndarray,
    train_labels: np.ndarray,
    query_feats: np.ndarray,
    k: int,
) -> np.ndarray:
    """Majority vote among the k nearest training columns (Euclidean).

    Ties in the vote go to the label with the smaller summed distance, then
    to the smaller label id. Equidistant neighbors are taken in training order.
    """
    train_labels = np.asarray(train_labels, dtype=np.int64)
    n_train = train_feats.shape[1]
    if not 1 <= k <= n_train:
        raise ValueError(f"k must lie in [1, {n_train}], got {k}")
    if train_feats.shape[0] != query_feats.shape[0]:
        raise ValueError(
            f"feature dims differ: train {train_feats.shape[0]}, query {query_feats.shape[0]}"
        )
    num_labels = int(train_labels.max()) + 1
    train_rows = np.ascontiguousarray(train_feats.T)
    predictions = np.empty(query_feats.shape[1], dtype=np.int64)

    for start in range(0, query_feats.shape[1], QUERY_CHUNK):
        queries = np.ascontiguousarray(query_feats[:, start : start + QUERY_CHUNK].T)
        dist = cdist(queries, train_rows, metric="euclidean")
        order = np.argsort(dist, axis=1, kind="stable")[:, :k]
        nn_dist = np.take_along_axis(dist, order, axis=1)
        nn_labels = train_labels[order]

        rows = np.repeat(np.arange(queries.shape[0]), k)
        votes = np.zeros((queries.shape[0], num_labels))
        summed = np.zeros((queries.shape[0], num_labels))
        np.add.at(votes, (rows, nn_labels.ravel()), 1.0)
        np.add.at(summed, (rows, nn_labels.ravel()), nn_dist.ravel())

        leaders = votes == votes.max(axis=1, keepdims=True)
        predictions[start : start + queries.shape[0]] = np.argmin(
            np.where(leaders, summed, np.inf), axis=1
        )
    return predictions
