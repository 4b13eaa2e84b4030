"""Empirical ROC curve, tie-aware AUC and DeLong structural components."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from core.errors import SingleClassError
from core.state import RocAnalysis


def split_classes(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError(f"scores {scores.shape} and labels {labels.shape} differ in shape")
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise SingleClassError(f"AUC needs both classes, got {pos.size} positive / {neg.size} negative")
    return pos, neg


def structural_components(pos: np.ndarray, neg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """V10 per positive and V01 per negative, from midranks in O(n log n).

    V10ᵢ = mean over negatives of ψ(sᵢ⁺, s⁻), V01ⱼ = mean over positives of
    ψ(s⁺, sⱼ⁻), with ψ = 1 / 0.5 / 0 for greater / tied / smaller.
    """
    m, n = pos.size, neg.size
    combined = rankdata(np.concatenate([pos, neg]))
    v10 = (combined[:m] - rankdata(pos)) / n
    v01 = 1.0 - (combined[m:] - rankdata(neg)) / m
    return v10, v01


def auc(scores, labels) -> float:
    """Mann-Whitney AUC with ties counted 1/2."""
    pos, neg = split_classes(scores, labels)
    return mann_whitney(pos, neg)


def mann_whitney(pos: np.ndarray, neg: np.ndarray) -> float:
    m, n = pos.size, neg.size
    # U is an exact half-integer in floating point
    u = rankdata(np.concatenate([pos, neg]))[:m].sum() - m * (m + 1) / 2.0
    return float(u / (m * n))


def roc_points(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """(FPR, TPR) at every distinct threshold, from (0, 0) to (1, 1)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos, neg = split_classes(scores, labels)
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    # last index of each run of equal scores
    cut = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    tp = np.cumsum(y == 1)[cut]
    fp = np.cumsum(y == 0)[cut]
    fpr = np.r_[0.0, fp / neg.size]
    tpr = np.r_[0.0, tp / pos.size]
    return fpr, tpr


def trapezoid_area(fpr: np.ndarray, tpr: np.ndarray) -> float:
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def roc_analysis(scores, labels) -> RocAnalysis:
    pos, neg = split_classes(scores, labels)
    v10, v01 = structural_components(pos, neg)
    fpr, tpr = roc_points(scores, labels)
    return RocAnalysis(fpr=fpr, tpr=tpr, auc=mann_whitney(pos, neg), v10=v10, v01=v01)
