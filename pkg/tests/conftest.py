"""Shared test fixtures for the radiomic biomarker test suite."""

from __future__ import annotations

import numpy as np
import pandas as pd
import pytest

from core.state import (
    DiscretizedRoi,
    ExperimentSpec,
    FeatureCatalogConfig,
    PipelineConfig,
    RoiMask,
    SelectionConfig,
    SequenceImage,
    Study,
    SyntheticCohortSpec,
    Volume,
)
from core.table import make_feature_table


def box_mask(dims, lo, hi) -> RoiMask:
    """Mask with the half-open box [lo, hi) set."""
    flags = np.zeros(dims, dtype=bool)
    flags[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = True
    return RoiMask(flags=flags)


def level_roi(grid) -> DiscretizedRoi:
    """DiscretizedRoi straight from a level grid (0 = outside)."""
    grid = np.asarray(grid, dtype=np.int64)
    ng = max(int(grid.max()), 2)
    return DiscretizedRoi(grid=grid, n_levels=ng, bin_edges=tuple(float(k) for k in range(ng + 1)))


def random_level_roi(rng: np.random.Generator, max_dims=(6, 6, 4), max_levels=8) -> DiscretizedRoi:
    """Random ROI with random levels; (0,0,0) and (1,0,0) are always inside."""
    dims = tuple(int(rng.integers(2 if k == 0 else 1, n + 1)) for k, n in enumerate(max_dims))
    ng = int(rng.integers(2, max_levels + 1))
    inside = rng.random(dims) < 0.75
    inside[0, 0, 0] = inside[1, 0, 0] = True
    grid = np.where(inside, rng.integers(1, ng + 1, size=dims), 0)
    return DiscretizedRoi(grid=grid, n_levels=ng, bin_edges=tuple(float(k) for k in range(ng + 1)))


def make_table(X: np.ndarray, y, prefix: str = "p", start: str = "2020-01-01") -> pd.DataFrame:
    """Feature table with ids `<prefix>000..`, daily visit times and columns f0, f1, ..."""
    n, p = X.shape
    times = pd.date_range(start, periods=n, freq="D").strftime("%Y-%m-%d").tolist()
    return make_feature_table(
        ids=[f"{prefix}{i:03d}" for i in range(n)],
        visit_times=times,
        labels=list(np.asarray(y, dtype=int)),
        features=X,
        feature_names=[f"f{j}" for j in range(p)],
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def textured_volume(rng) -> Volume:
    return Volume(voxels=rng.normal(100.0, 10.0, size=(10, 9, 7)), spacing=(1.0, 1.0, 1.0))


@pytest.fixture
def central_mask() -> RoiMask:
    return box_mask((10, 9, 7), (2, 2, 1), (8, 7, 6))


@pytest.fixture
def small_catalog() -> FeatureCatalogConfig:
    """Full default catalog without resampling, so tests stay on the native grid."""
    return FeatureCatalogConfig(resample_spacing=None)


@pytest.fixture
def two_sequence_study(rng) -> Study:
    mask = box_mask((8, 8, 6), (1, 2, 1), (7, 7, 5))
    return Study(
        patient_id="S001",
        visit_time="2021-03-04",
        label=1,
        sequences={
            "T2W": SequenceImage(volume=Volume(voxels=rng.normal(50, 8, (8, 8, 6)), spacing=(0.8, 0.8, 1.5)), mask=mask),
            "ADC": SequenceImage(volume=Volume(voxels=rng.normal(900, 60, (8, 8, 6)), spacing=(0.8, 0.8, 1.5)), mask=mask),
        },
    )


@pytest.fixture
def separable_table(rng) -> pd.DataFrame:
    """n = 80, p = 6; f0 carries the label, the rest is noise."""
    n = 80
    y = np.arange(n) % 2
    X = rng.normal(size=(n, 6))
    X[:, 0] += 2.5 * (2 * y - 1)
    return make_table(X, y)


@pytest.fixture
def fast_selection() -> SelectionConfig:
    return SelectionConfig(folds=3, grid_size=12, grid_ratio=1e-2)


def cohort_spec(name: str, n: int, shift_at: int | None, hard: float, seed: int, p: int = 12) -> SyntheticCohortSpec:
    shift = [0.0] * p
    if shift_at is not None:
        for k in range(shift_at, shift_at + 2):
            shift[k] = 3.0
    return SyntheticCohortSpec(
        name=name, n=n, p=p, informative_weights=[1.0, 1.0],
        nuisance_shift=shift, delta=3.0, hard_fraction=hard, seed=seed,
    )


@pytest.fixture
def small_experiment() -> ExperimentSpec:
    return ExperimentSpec(cohorts=[
        cohort_spec("hard", 40, 2, 1.0, 1),
        cohort_spec("mixed_a", 90, 5, 0.3, 2),
        cohort_spec("mixed_b", 60, 8, 0.3, 3),
    ])


@pytest.fixture
def pipeline_config(tmp_path, small_experiment, fast_selection) -> PipelineConfig:
    return PipelineConfig(
        simulation=small_experiment,
        selection=fast_selection,
        output_dir=str(tmp_path / "run"),
        seed=11,
    )
