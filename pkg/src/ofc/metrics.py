"""Confusion counts and classification measures.

Counts are real-valued: they come either from hard predictions or from
density integrals against a smoothed step function, and the same measure
formulas serve both.  The smoothed step H and impulse d are

    H(y) = 1/2 * (1 + (2/pi) * arctan(y / eps))
    d(y) = (1/pi) * eps / (eps**2 + y**2)

so H(y) + H(-y) == 1 exactly and d = H'.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import DensityPair
from .errors import EmptyConfusionError, GridMismatchError
from .field import ScalarField, integrate


def smoothed_heaviside(y, eps: float):
    """Smooth step rising from 0 to 1 over a width of roughly ``eps``."""
    return 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(np.asarray(y) / eps))


def smoothed_delta(y, eps: float):
    """Derivative of :func:`smoothed_heaviside`; even, mass 1, peak 1/(pi*eps)."""
    y = np.asarray(y)
    return (eps / np.pi) / (eps**2 + y**2)


@dataclass
class ConfusionCounts:
    """True/false positive/negative masses (not necessarily integers)."""

    tp: float
    fp: float
    fn: float
    tn: float

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < -1e-9:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")
            setattr(self, name, max(v, 0.0))

    @property
    def total(self) -> float:
        return self.tp + self.fp + self.fn + self.tn


CSV_HEADER = "beta,f_beta_pct,accuracy_pct,recall_pct,precision_pct,epsilon"


@dataclass
class MetricsReport:
    """Sensitivity measures for one confusion table at one beta."""

    beta: float
    f_beta: float
    accuracy: float
    recall: float
    precision: float
    epsilon: float
    degenerate: bool = False

    def to_csv_row(self) -> str:
        """Percentages with two decimals, one row matching CSV_HEADER."""
        eps = "inf" if np.isinf(self.epsilon) else f"{self.epsilon:.6g}"
        return (
            f"{self.beta!r},{100 * self.f_beta:.2f},{100 * self.accuracy:.2f},"
            f"{100 * self.recall:.2f},{100 * self.precision:.2f},{eps}"
        )


def metrics_from_counts(counts: ConfusionCounts, beta: float = 1.0) -> MetricsReport:
    """All measures from one confusion table.

    A table with tp == 0 is degenerate, not an error: recall, precision and
    F-beta are 0 and the misclassification ratio epsilon is infinite.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if counts.total <= 0:
        raise EmptyConfusionError("confusion table is empty")
    tp, fp, fn, tn = counts.tp, counts.fp, counts.fn, counts.tn
    accuracy = (tp + tn) / counts.total
    if tp > 0:
        recall = tp / (tp + fn)
        precision = tp / (tp + fp)
        b2 = beta * beta
        f_beta = (1.0 + b2) * recall * precision / (b2 * precision + recall)
        epsilon = (b2 * fn + fp) / tp
        degenerate = False
    else:
        recall = precision = f_beta = 0.0
        epsilon = np.inf
        degenerate = True
    return MetricsReport(beta, f_beta, accuracy, recall, precision, epsilon, degenerate)


def confusion_from_predictions(labels, predictions) -> ConfusionCounts:
    """Hard counts from boolean arrays (True = positive class)."""
    labels = np.asarray(labels, dtype=bool)
    predictions = np.asarray(predictions, dtype=bool)
    if labels.shape != predictions.shape:
        raise ValueError(
            f"labels have shape {labels.shape}, predictions {predictions.shape}"
        )
    return ConfusionCounts(
        tp=float(np.sum(labels & predictions)),
        fp=float(np.sum(~labels & predictions)),
        fn=float(np.sum(labels & ~predictions)),
        tn=float(np.sum(~labels & ~predictions)),
    )


def smoothed_confusion(u: ScalarField, d: DensityPair, eps: float) -> ConfusionCounts:
    """Count masses of the regions u > 0 / u < 0 under the class densities.

    Uses the smoothed step, so tp + fn == p_count and fp + tn == n_count
    hold to quadrature accuracy regardless of eps.
    """
    if u.grid != d.grid:
        raise GridMismatchError("decision field and densities live on different grids")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    h_pos = smoothed_heaviside(u.values, eps)
    h_neg = 1.0 - h_pos
    return ConfusionCounts(
        tp=d.p_count * integrate(u.with_values(h_pos * d.f_pos.values)),
        fn=d.p_count * integrate(u.with_values(h_neg * d.f_pos.values)),
        fp=d.n_count * integrate(u.with_values(h_pos * d.f_neg.values)),
        tn=d.n_count * integrate(u.with_values(h_neg * d.f_neg.values)),
    )
