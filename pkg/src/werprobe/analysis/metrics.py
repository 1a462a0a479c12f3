"""Pure evaluation metrics: MAE, Kendall tau-b, confusion matrices,
prediction combination, duration bucketing, and silhouette score."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from werprobe.errors import (
    AlignmentError,
    ConfigError,
    EmptyBatchError,
    LabelError,
    NumericError,
    ShapeError,
)


def mae(predicted, truth) -> float:
    """Mean absolute deviation, accumulated with compensated summation."""
    p = np.asarray(predicted, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeError(f"mae: shapes {p.shape} and {t.shape} differ")
    if p.size == 0:
        raise EmptyBatchError("mae: empty input")
    return math.fsum(np.abs(p - t).tolist()) / p.size


def kendall_tau(x, y) -> float:
    """Kendall tau-b by exact pair enumeration.

    tau-b = (C - D) / sqrt((C + D + Tx) (C + D + Ty)) where C/D count
    concordant/discordant pairs, Tx pairs tied only in x, Ty tied only in y.
    Pairs tied in both are dropped. All-tied input on either side leaves the
    correlation undefined and raises.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ShapeError(f"kendall_tau: need equal-length vectors, got {xa.shape}, {ya.shape}")
    n = xa.size
    if n < 2:
        raise ShapeError(f"kendall_tau: need at least 2 items, got {n}")
    iu = np.triu_indices(n, k=1)
    sx = np.sign(xa[:, None] - xa[None, :])[iu]
    sy = np.sign(ya[:, None] - ya[None, :])[iu]
    prod = sx * sy
    c = int((prod > 0).sum())
    d = int((prod < 0).sum())
    tx = int(((sx == 0) & (sy != 0)).sum())
    ty = int(((sy == 0) & (sx != 0)).sum())
    nx = c + d + tx
    ny = c + d + ty
    if nx == 0 or ny == 0:
        raise NumericError("kendall_tau: undefined (all pairs tied on one side)")
    return (c - d) / math.sqrt(nx * ny)


@dataclass
class ConfusionMatrix:
    """Row = true label, column = predicted label."""

    labels: list
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total

    def row_normalized(self) -> np.ndarray:
        sums = self.counts.sum(axis=1, keepdims=True)
        out = np.zeros(self.counts.shape, dtype=np.float64)
        np.divide(self.counts, sums, out=out, where=sums > 0)
        return out

    def to_csv(self) -> str:
        lines = ["true\\pred," + ",".join(str(l) for l in self.labels)]
        for i, label in enumerate(self.labels):
            lines.append(str(label) + "," + ",".join(str(int(v)) for v in self.counts[i]))
        return "\n".join(lines) + "\n"


def confusion_matrix(truths, predictions, labels) -> ConfusionMatrix:
    labels = list(labels)
    index = {label: i for i, label in enumerate(labels)}
    if len(index) != len(labels):
        raise LabelError("confusion_matrix: duplicate labels")
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(truths, predictions, strict=True):
        if t not in index:
            raise LabelError(f"confusion_matrix: unknown true label {t!r}")
        if p not in index:
            raise LabelError(f"confusion_matrix: unknown predicted label {p!r}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(labels=labels, counts=counts)


def combine_predictions(per_system: list[dict]) -> dict:
    """Utterance-level arithmetic mean across systems keyed by utterance id."""
    if not per_system:
        raise EmptyBatchError("combine_predictions: no systems given")
    base = per_system[0]
    for k, system in enumerate(per_system[1:], start=2):
        if set(system) != set(base):
            diverging = sorted(set(system) ^ set(base))[0]
            raise AlignmentError(
                f"combine_predictions: system {k} disagrees on utterance id {diverging!r}"
            )
    return {
        uid: math.fsum(system[uid] for system in per_system) / len(per_system)
        for uid in base
    }


def duration_bucket(utterances, lo_s: float, hi_s: float):
    """Utterances whose duration d satisfies lo_s <= d < hi_s."""
    if not lo_s < hi_s:
        raise ConfigError(f"duration bucket needs lo < hi, got [{lo_s}, {hi_s})")
    return [u for u in utterances if lo_s <= u.duration < hi_s]


def silhouette_score(points, labels) -> float:
    """Mean silhouette over all points with pairwise Euclidean distances."""
    x = np.asarray(points, dtype=np.float64)
    y = np.asarray(labels)
    if x.ndim != 2 or y.shape[0] != x.shape[0]:
        raise ShapeError(f"silhouette: points {x.shape} vs labels {y.shape}")
    classes = np.unique(y)
    if classes.size < 2:
        raise ConfigError("silhouette needs at least 2 clusters")
    sq = (x**2).sum(axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (x @ x.T), 0.0)
    dist = np.sqrt(d2)
    n = x.shape[0]
    scores = np.zeros(n)
    for i in range(n):
        same = (y == y[i]) & (np.arange(n) != i)
        if not same.any():
            continue  # singleton cluster contributes 0 by convention
        a = dist[i, same].mean()
        b = min(dist[i, y == c].mean() for c in classes if c != y[i])
        scores[i] = (b - a) / max(a, b)
    return float(scores.mean())
