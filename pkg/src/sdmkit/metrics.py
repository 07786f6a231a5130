"""Confusion counts, thresholded classification metrics, and rank-based AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    """Threshold metrics plus AUC; ``degenerate`` names the metrics whose
    denominator was zero and were reported as 0."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    confusion: ConfusionMatrix
    degenerate: tuple[str, ...] = ()


def _binary_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not set(np.unique(arr).tolist()) <= {0, 1}:
        raise ValueError(f"{name} must contain only 0/1 entries")
    return arr.astype(int).ravel()


def confusion(y_true, y_pred) -> ConfusionMatrix:
    """Counts of the four (true, predicted) combinations."""
    yt = _binary_vector(y_true, "y_true")
    yp = _binary_vector(y_pred, "y_pred")
    if yt.size != yp.size:
        raise ValueError(f"length mismatch: {yt.size} true vs {yp.size} predicted")
    return ConfusionMatrix(
        tp=int(np.sum((yt == 1) & (yp == 1))),
        fp=int(np.sum((yt == 0) & (yp == 1))),
        fn=int(np.sum((yt == 1) & (yp == 0))),
        tn=int(np.sum((yt == 0) & (yp == 0))),
    )


def _tied_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, ties averaged."""
    n = values.size
    order = np.argsort(values, kind="mergesort")
    sv = values[order]
    starts = np.nonzero(np.r_[True, sv[1:] != sv[:-1]])[0]
    ends = np.r_[starts[1:], n]
    avg = (starts + ends + 1) / 2.0  # mean of 1-based ranks start+1 .. end
    ranks = np.empty(n, dtype=float)
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def auc_roc(y_true, probs) -> float:
    """Probability a random positive outranks a random negative, ties worth
    half; computed with the rank-sum form of the pairwise count."""
    yt = _binary_vector(y_true, "y_true")
    p = np.asarray(probs, dtype=float).ravel()
    if yt.size != p.size:
        raise ValueError(f"length mismatch: {yt.size} labels vs {p.size} scores")
    n_pos = int(np.sum(yt == 1))
    n_neg = yt.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: y_true holds a single class")
    ranks = _tied_ranks(p)
    pos_rank_sum = float(ranks[yt == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def classification_report(y_true, probs, theta: float = 0.5) -> MetricsReport:
    """Threshold ``probs`` at ``theta`` and compute accuracy, precision,
    recall, F1, and AUC. A metric whose denominator is zero is reported as 0
    and listed in ``degenerate``."""
    yt = _binary_vector(y_true, "y_true")
    p = np.asarray(probs, dtype=float).ravel()
    if yt.size != p.size:
        raise ValueError(f"length mismatch: {yt.size} labels vs {p.size} scores")
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("probabilities must lie in [0, 1]")

    preds = (p >= theta).astype(int)
    cm = confusion(yt, preds)
    degenerate = []

    accuracy = (cm.tp + cm.tn) / cm.total
    if cm.tp + cm.fp > 0:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision = 0.0
        degenerate.append("precision")
    if cm.tp + cm.fn > 0:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall = 0.0
        degenerate.append("recall")
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        degenerate.append("f1")

    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        auc=auc_roc(yt, p),
        confusion=cm,
        degenerate=tuple(degenerate),
    )


def report_to_dict(report: MetricsReport, species: str, model: str,
                   split: str) -> dict:
    """The metrics JSON document, field order fixed for byte-stable output."""
    return {
        "species": species,
        "model": model,
        "split": split,
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "auc": report.auc,
        "confusion": {
            "tp": report.confusion.tp,
            "fp": report.confusion.fp,
            "fn": report.confusion.fn,
            "tn": report.confusion.tn,
        },
        "degenerate": list(report.degenerate),
    }
