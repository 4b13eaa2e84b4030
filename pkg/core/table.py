"""Feature table helpers.

A feature table is a pandas DataFrame whose first three columns are
id / visit_time / label, followed by catalog feature columns. CSV files use
17 significant digits and are parsed back with round-trip precision.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from core.errors import DataIOError, FeatureMismatchError

logger = logging.getLogger(__name__)

META_COLUMNS = ["id", "visit_time", "label"]
FLOAT_FORMAT = "%.17g"


def make_feature_table(
    ids: list[str],
    visit_times: list[str],
    labels: list[int],
    features: np.ndarray,
    feature_names: list[str],
) -> pd.DataFrame:
    """Assemble a feature table from aligned columns."""
    if features.shape != (len(ids), len(feature_names)):
        raise ValueError(f"feature block shape {features.shape} does not match {len(ids)}x{len(feature_names)}")
    meta = pd.DataFrame({"id": ids, "visit_time": visit_times, "label": np.asarray(labels, dtype=np.int64)})
    block = pd.DataFrame(np.asarray(features, dtype=np.float64), columns=feature_names)
    return pd.concat([meta, block], axis=1)


def feature_columns(table: pd.DataFrame) -> list[str]:
    return [c for c in table.columns if c not in META_COLUMNS]


def require_columns(table: pd.DataFrame, names: list[str]) -> None:
    missing = [n for n in names if n not in table.columns]
    if missing:
        raise FeatureMismatchError(f"missing feature columns: {missing[:5]}{' ...' if len(missing) > 5 else ''}")


def labels_of(table: pd.DataFrame) -> np.ndarray:
    return table["label"].to_numpy(dtype=np.int64)


def sort_by_id(table: pd.DataFrame) -> pd.DataFrame:
    """Canonical row order: ascending patient id."""
    return table.sort_values("id", kind="mergesort").reset_index(drop=True)


def write_feature_table(table: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Saved feature table (%d rows x %d features): %s", len(table), len(feature_columns(table)), path)
    return path


def read_feature_table(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataIOError(f"feature table not found: {path}")
    table = pd.read_csv(path, dtype={"id": str, "visit_time": str}, float_precision="round_trip")
    missing = [c for c in META_COLUMNS if c not in table.columns]
    if missing:
        raise DataIOError(f"{path} lacks columns {missing}")
    table["label"] = table["label"].astype(np.int64)
    return table
