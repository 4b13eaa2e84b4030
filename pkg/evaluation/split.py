"""Time-ordered train/validation split of a cohort."""

from __future__ import annotations

import logging
import math

import pandas as pd

from core.errors import CohortTooSmallError, ConfigError, SingleClassError
from core.state import CohortSplit

logger = logging.getLogger(__name__)

MIN_COHORT = 4


def train_size(n: int, ratio: float) -> int:
    """round(ratio·n) with halves rounded up."""
    return int(math.floor(ratio * n + 0.5))


def split_by_time(table: pd.DataFrame, ratio: float = 0.7) -> CohortSplit:
    """Earliest round(ratio·n) patients train, the rest validate.

    Patients are ordered by (visit_time, id); the training part must hold both classes.
    """
    if not 0 < ratio < 1:
        raise ConfigError(f"split ratio must lie in (0, 1), got {ratio}")
    n = len(table)
    if n < MIN_COHORT:
        raise CohortTooSmallError(f"cohort of {n} patients is below the minimum of {MIN_COHORT}")

    times = pd.to_datetime(table["visit_time"], format="ISO8601")
    order = (
        pd.DataFrame({"time": times.to_numpy(), "id": table["id"].astype(str).to_numpy(),
                      "label": table["label"].to_numpy()})
        .sort_values(["time", "id"], kind="mergesort")
        .reset_index(drop=True)
    )
    n_train = train_size(n, ratio)
    ordered = order["id"].tolist()
    if len(set(ordered)) != n:
        raise ConfigError("patient ids must be unique within a cohort")

    train_labels = set(order["label"].iloc[:n_train].tolist())
    if train_labels != {0, 1}:
        raise SingleClassError(f"training part of the split holds only class {sorted(train_labels)}")

    logger.info("Split %d patients: %d train / %d validation", n, n_train, n - n_train)
    return CohortSplit(ordered_ids=ordered, train_ids=ordered[:n_train], val_ids=ordered[n_train:], ratio=ratio)


def select_rows(table: pd.DataFrame, ids: list[str]) -> pd.DataFrame:
    """Rows of `table` for `ids`, in the order given."""
    indexed = table.set_index(table["id"].astype(str), drop=False)
    return indexed.loc[ids].reset_index(drop=True)
