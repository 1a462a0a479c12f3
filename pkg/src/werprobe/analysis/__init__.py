"""Evaluation metrics, t-SNE projection, and minimal SVG figure emission."""

from werprobe.analysis.metrics import (
    ConfusionMatrix,
    combine_predictions,
    confusion_matrix,
    duration_bucket,
    kendall_tau,
    mae,
    silhouette_score,
)
from werprobe.analysis.tsne import TsneConfig, TsneResult, conditional_probabilities, tsne_project

__all__ = [
    "ConfusionMatrix",
    "TsneConfig",
    "TsneResult",
    "combine_predictions",
    "conditional_probabilities",
    "confusion_matrix",
    "duration_bucket",
    "kendall_tau",
    "mae",
    "silhouette_score",
    "tsne_project",
]
