"""Feature-space cohorts with an informative direction and a hard-sample stratum.

Every cohort shares one unit informative direction û. A patient with latent
class sign s = ±1 is drawn as

    x = s · margin · û + ε + ((1 + s·e) / 2) · shift,     ε ~ N(0, I)

where margin is δ for easy patients (e = 1) and δ/4 for hard ones (e = 0).
The cohort's nuisance shift is therefore class-associated among easy
patients only; hard patients all receive half of it. Shifts must be
orthogonal to û.
"""

from __future__ import annotations

import logging
from datetime import date, timedelta

import numpy as np
import pandas as pd

from core.errors import ConfigError
from core.rng import item_stream, stream
from core.state import ExperimentSpec, SyntheticCohortSpec
from core.table import make_feature_table

logger = logging.getLogger(__name__)

HARD_MARGIN_FACTOR = 0.25
MIN_PER_CLASS_ALL_HARD = 4


def feature_names(p: int) -> list[str]:
    width = max(3, len(str(p - 1)))
    return [f"f{j:0{width}d}" for j in range(p)]


def informative_direction(spec: SyntheticCohortSpec) -> np.ndarray:
    u = np.zeros(spec.p)
    u[: len(spec.informative_weights)] = spec.informative_weights
    return u / np.linalg.norm(u)


def nuisance_vector(spec: SyntheticCohortSpec) -> np.ndarray:
    shift = np.asarray(spec.nuisance_shift, dtype=np.float64) if spec.nuisance_shift else np.zeros(spec.p)
    if abs(float(shift @ informative_direction(spec))) > 1e-12:
        raise ConfigError(f"cohort {spec.name}: nuisance shift must be orthogonal to the informative direction")
    return shift


def _balanced_labels(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(np.arange(n) % 2)


def _hard_flags(n: int, fraction: float, rng: np.random.Generator) -> np.ndarray:
    n_hard = int(np.floor(fraction * n + 0.5))
    flags = np.zeros(n, dtype=bool)
    flags[:n_hard] = True
    return rng.permutation(flags)


def make_cohort(spec: SyntheticCohortSpec, seed: int) -> pd.DataFrame:
    """One labeled feature table with monotone synthetic visit times."""
    if spec.hard_fraction == 1.0 and spec.n < 2 * MIN_PER_CLASS_ALL_HARD:
        raise ConfigError(
            f"cohort {spec.name}: an all-hard cohort needs >= {MIN_PER_CLASS_ALL_HARD} patients per class"
        )
    u = informative_direction(spec)
    shift = nuisance_vector(spec)

    latent = _balanced_labels(spec.n, stream(seed, spec.seed, spec.name, "labels"))
    hard = _hard_flags(spec.n, spec.hard_fraction, stream(seed, spec.seed, spec.name, "hard"))

    features = np.empty((spec.n, spec.p))
    labels = np.empty(spec.n, dtype=np.int64)
    for i in range(spec.n):
        rng = item_stream(seed, f"{spec.seed}/{spec.name}/patient", i)
        noise = rng.standard_normal(spec.p)
        flip = rng.random() < spec.label_noise

        sign = 1.0 if latent[i] == 1 else -1.0
        easy = 0.0 if hard[i] else 1.0
        margin = spec.delta * (HARD_MARGIN_FACTOR if hard[i] else 1.0)
        features[i] = sign * margin * u + noise + (1.0 + sign * easy) / 2.0 * shift
        labels[i] = 1 - latent[i] if flip else latent[i]

    start = date.fromisoformat(spec.start_date)
    visit_times = [(start + timedelta(days=i * spec.visit_interval_days)).isoformat() for i in range(spec.n)]
    ids = [f"{spec.name}-{i:04d}" for i in range(spec.n)]

    logger.info(
        "Simulated cohort %s: n=%d (%d positive, %d hard), p=%d",
        spec.name, spec.n, int(labels.sum()), int(hard.sum()), spec.p,
    )
    return make_feature_table(ids, visit_times, labels.tolist(), features, feature_names(spec.p))


def make_cohorts(spec: ExperimentSpec, seed: int) -> dict[str, pd.DataFrame]:
    """The experiment's three cohorts, keyed by name in spec order."""
    return {c.name: make_cohort(c, seed) for c in spec.cohorts}
