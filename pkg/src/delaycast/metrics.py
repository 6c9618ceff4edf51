"""Binary-classification metrics: confusion counts, accuracy/precision/
recall/F1 (reported in percent), ROC curves and trapezoidal AUC.

Class 1 ("delayed") is the positive class throughout.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class Report:
    accuracy: float  # percent
    precision: float
    recall: float
    f1: float
    confusion: Confusion

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "confusion": {
                "tp": self.confusion.tp,
                "fp": self.confusion.fp,
                "tn": self.confusion.tn,
                "fn": self.confusion.fn,
            },
            "positive_class": 1,
        }


def _safe_div(num, den, name):
    if den == 0:
        warnings.warn(f"{name} denominator is zero; reporting 0")
        return 0.0
    return num / den


def classification_report(pred, labels):
    """Accuracy, precision, recall, F1 (percent) plus the confusion matrix."""
    pred = np.asarray(pred).ravel()
    labels = np.asarray(labels).ravel()
    if pred.shape != labels.shape or pred.size == 0:
        raise ShapeError(
            f"predictions ({pred.shape}) and labels ({labels.shape}) must be "
            "equal-length and non-empty"
        )
    tp = int(np.sum((pred == 1) & (labels == 1)))
    fp = int(np.sum((pred == 1) & (labels == 0)))
    tn = int(np.sum((pred == 0) & (labels == 0)))
    fn = int(np.sum((pred == 0) & (labels == 1)))
    conf = Confusion(tp, fp, tn, fn)
    precision = _safe_div(tp, tp + fp, "precision")
    recall = _safe_div(tp, tp + fn, "recall")
    f1 = _safe_div(2 * precision * recall, precision + recall, "f1")
    accuracy = (tp + tn) / conf.total
    return Report(
        accuracy=100.0 * accuracy,
        precision=100.0 * precision,
        recall=100.0 * recall,
        f1=100.0 * f1,
        confusion=conf,
    )


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def roc_curve(scores, labels):
    """ROC sweep over distinct score thresholds (descending), ties grouped."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ShapeError("scores and labels must have equal length")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise DomainError("ROC needs at least one positive and one negative label")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    # indices where a threshold group ends (last occurrence of each score)
    distinct = np.nonzero(np.diff(s))[0]
    cut = np.concatenate([distinct, [s.size - 1]])
    tps = np.cumsum(y == 1)[cut]
    fps = np.cumsum(y == 0)[cut]
    tpr = np.concatenate([[0.0], tps / n_pos])
    fpr = np.concatenate([[0.0], fps / n_neg])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, auc=auc)


def per_class_roc(scores, labels):
    """(class-1 curve, class-0 curve); class 0 uses inverted labels and 1-score."""
    labels = np.asarray(labels).ravel()
    curve1 = roc_curve(scores, labels)
    curve0 = roc_curve(1.0 - np.asarray(scores, dtype=np.float64).ravel(), 1 - labels)
    return curve1, curve0


def roc_to_csv(curve, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("fpr,tpr\n")
        for f, t in zip(curve.fpr, curve.tpr):
            fh.write(f"{f!r},{t!r}\n")
