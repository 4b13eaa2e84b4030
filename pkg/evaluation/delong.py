"""Paired DeLong test for two correlated AUCs on the same patients."""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.stats import norm

from core.errors import DegenerateComparisonError
from core.state import DeLongResult
from evaluation.roc import mann_whitney, split_classes, structural_components

logger = logging.getLogger(__name__)


def delong_paired(scores_a, scores_b, labels) -> DeLongResult:
    """Two-sided DeLong test of AUC(a) - AUC(b).

    var(Δ) = var(V10ᵃ - V10ᵇ)/m + var(V01ᵃ - V01ᵇ)/n with sample variances,
    m positives and n negatives. Raises DegenerateComparisonError when the
    variance is zero (e.g. rank-identical score vectors).
    """
    scores_a = np.asarray(scores_a, dtype=np.float64)
    scores_b = np.asarray(scores_b, dtype=np.float64)
    if scores_a.shape != scores_b.shape:
        raise ValueError(f"paired scores differ in shape: {scores_a.shape} vs {scores_b.shape}")

    pos_a, neg_a = split_classes(scores_a, labels)
    pos_b, neg_b = split_classes(scores_b, labels)
    m, n = pos_a.size, neg_a.size
    if m < 2 or n < 2:
        raise DegenerateComparisonError(f"DeLong variance needs >= 2 patients per class, got {m}/{n}")

    v10_a, v01_a = structural_components(pos_a, neg_a)
    v10_b, v01_b = structural_components(pos_b, neg_b)
    auc_a = mann_whitney(pos_a, neg_a)
    auc_b = mann_whitney(pos_b, neg_b)

    variance = float(np.var(v10_a - v10_b, ddof=1) / m + np.var(v01_a - v01_b, ddof=1) / n)
    if not variance > 0:
        raise DegenerateComparisonError("zero variance of the AUC difference: no detectable difference")

    difference = auc_a - auc_b
    z = difference / math.sqrt(variance)
    p = float(min(1.0, 2.0 * norm.sf(abs(z))))
    return DeLongResult(auc_a=auc_a, auc_b=auc_b, difference=difference, variance=variance, z=z, p=p)


def compare_or_degenerate(scores_a, scores_b, labels) -> DeLongResult:
    """delong_paired, with a degenerate comparison recorded as z = 0, p = 1."""
    try:
        return delong_paired(scores_a, scores_b, labels)
    except DegenerateComparisonError as e:
        logger.warning("Degenerate comparison recorded as no detectable difference: %s", e)
        pos_a, neg_a = split_classes(scores_a, labels)
        pos_b, neg_b = split_classes(scores_b, labels)
        auc_a = mann_whitney(pos_a, neg_a)
        auc_b = mann_whitney(pos_b, neg_b)
        return DeLongResult(
            auc_a=auc_a, auc_b=auc_b, difference=auc_a - auc_b,
            variance=0.0, z=0.0, p=1.0, degenerate=True,
        )
