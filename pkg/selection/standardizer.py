"""Training-set standardization of feature columns."""

from __future__ import annotations

import logging

import numpy as np
import pandas as pd

from core.state import Standardizer
from core.table import require_columns

logger = logging.getLogger(__name__)


def fit_standardizer(table: pd.DataFrame, feature_names: list[str]) -> Standardizer:
    """Column means and population stds; constant columns are dropped."""
    require_columns(table, feature_names)
    values = table[feature_names].to_numpy(dtype=np.float64)
    constant = np.ptp(values, axis=0) == 0

    kept = [n for n, c in zip(feature_names, constant) if not c]
    dropped = [n for n, c in zip(feature_names, constant) if c]
    block = values[:, ~constant]
    if dropped:
        logger.info("Dropped %d zero-variance features of %d", len(dropped), len(feature_names))
    return Standardizer(
        feature_names=kept,
        means=block.mean(axis=0).tolist(),
        stds=block.std(axis=0).tolist(),
        dropped=dropped,
    )


def transform(standardizer: Standardizer, table: pd.DataFrame, names: list[str] | None = None) -> np.ndarray:
    """Standardized matrix for `names` (default: every retained feature), training statistics only."""
    names = standardizer.feature_names if names is None else names
    require_columns(table, names)
    index = {n: k for k, n in enumerate(standardizer.feature_names)}
    cols = [index[n] for n in names]
    means = np.asarray(standardizer.means, dtype=np.float64)[cols]
    stds = np.asarray(standardizer.stds, dtype=np.float64)[cols]
    return (table[names].to_numpy(dtype=np.float64) - means) / stds
