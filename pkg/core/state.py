"""Pipeline state and data model definitions.

Defines the pydantic models shared across imaging, feature extraction,
biomarker selection, evaluation and synthesis, plus ExperimentState
(TypedDict) carried through the LangGraph experiment graph.
"""

from __future__ import annotations

import math
from datetime import datetime
from enum import Enum
from functools import cached_property
from typing import Any, Literal, TypedDict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# --- Enums ---

class SelectionRule(str, Enum):
    MIN = "MIN"
    ONE_SE = "ONE_SE"


class TextureFamily(str, Enum):
    GLCM = "GLCM"
    GLRLM = "GLRLM"
    GLSZM = "GLSZM"
    NGTDM = "NGTDM"
    GLDM = "GLDM"


FILTER_NAMES = ("original", "wavelet")
FEATURE_CLASSES = ("first_order", "glcm", "glrlm", "glszm", "ngtdm", "gldm")
SHAPE_CLASS = "shape"


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# --- Imaging ---

class Volume(BaseModel):
    """3D scalar grid indexed [x, y, z] with physical spacing in mm."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    voxels: np.ndarray
    spacing: tuple[float, float, float]

    @field_validator("voxels", mode="before")
    @classmethod
    def _as_float_grid(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.float64)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ValueError(f"voxels must be a non-empty 3D grid, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("voxels contain non-finite values")
        return _readonly(arr)

    @field_validator("spacing")
    @classmethod
    def _positive_spacing(cls, v: tuple[float, float, float]) -> tuple[float, float, float]:
        if any(not (s > 0 and math.isfinite(s)) for s in v):
            raise ValueError(f"spacing must be positive and finite, got {v}")
        return v

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.voxels.shape)  # type: ignore[return-value]

    @property
    def voxel_volume(self) -> float:
        return self.spacing[0] * self.spacing[1] * self.spacing[2]


class RoiMask(BaseModel):
    """Binary ROI aligned with a Volume."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    flags: np.ndarray

    @field_validator("flags", mode="before")
    @classmethod
    def _as_bool_grid(cls, v: Any) -> np.ndarray:
        arr = np.array(v) != 0
        if arr.ndim != 3:
            raise ValueError(f"mask must be 3D, got shape {arr.shape}")
        return _readonly(arr)

    @cached_property
    def voxel_count(self) -> int:
        return int(np.count_nonzero(self.flags))

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.flags.shape)  # type: ignore[return-value]


class DiscretizedRoi(BaseModel):
    """ROI gray levels in 1..n_levels on the volume grid; 0 marks voxels outside the ROI."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: np.ndarray
    n_levels: int = Field(ge=1)
    bin_edges: tuple[float, ...]

    @field_validator("grid", mode="before")
    @classmethod
    def _as_level_grid(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.int64)
        if arr.ndim != 3:
            raise ValueError(f"level grid must be 3D, got shape {arr.shape}")
        return _readonly(arr)

    @model_validator(mode="after")
    def _check_levels(self) -> DiscretizedRoi:
        inside = self.grid[self.grid > 0]
        if inside.size == 0:
            raise ValueError("discretized ROI is empty")
        if inside.max() > self.n_levels or self.grid.min() < 0:
            raise ValueError("gray levels outside [1, n_levels]")
        if any(b <= a for a, b in zip(self.bin_edges, self.bin_edges[1:])):
            raise ValueError("bin edges must be strictly increasing")
        return self

    @property
    def coords(self) -> np.ndarray:
        return np.argwhere(self.grid > 0)

    @property
    def levels(self) -> np.ndarray:
        return self.grid[self.grid > 0]


class SequenceImage(BaseModel):
    """One MRI sequence of a study: volume plus its aligned ROI."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    volume: Volume
    mask: RoiMask

    @model_validator(mode="after")
    def _aligned(self) -> SequenceImage:
        if self.volume.dims != self.mask.dims:
            raise ValueError(f"mask dims {self.mask.dims} != volume dims {self.volume.dims}")
        return self


class Study(BaseModel):
    """One patient visit with its labeled sequences."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    patient_id: str = Field(min_length=1)
    visit_time: str
    label: Literal[0, 1]
    sequences: dict[str, SequenceImage]

    @field_validator("visit_time")
    @classmethod
    def _iso_time(cls, v: str) -> str:
        datetime.fromisoformat(v)
        return v

    @field_validator("sequences")
    @classmethod
    def _non_empty(cls, v: dict[str, SequenceImage]) -> dict[str, SequenceImage]:
        if not v:
            raise ValueError("study needs at least one sequence")
        return v


# --- Features ---

class FeatureVector(BaseModel):
    """Ordered (name, value) pairs; names unique, values finite."""
    names: list[str] = Field(default_factory=list)
    values: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _consistent(self) -> FeatureVector:
        if len(self.names) != len(self.values):
            raise ValueError("names and values differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")
        bad = [n for n, v in zip(self.names, self.values) if not math.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite feature values: {bad[:5]}")
        return self

    @classmethod
    def from_mapping(cls, mapping: dict[str, float]) -> FeatureVector:
        """Build a class block with names sorted lexicographically."""
        names = sorted(mapping)
        return cls(names=names, values=[float(mapping[n]) for n in names])

    @classmethod
    def concat(cls, vectors: list[FeatureVector]) -> FeatureVector:
        names: list[str] = []
        values: list[float] = []
        for vec in vectors:
            names.extend(vec.names)
            values.extend(vec.values)
        return cls(names=names, values=values)

    def prefixed(self, prefix: str) -> FeatureVector:
        return FeatureVector(names=[f"{prefix}__{n}" for n in self.names], values=list(self.values))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))

    def __len__(self) -> int:
        return len(self.names)


class FeatureCatalogConfig(BaseModel):
    """Which filters/classes to extract and how to preprocess."""
    model_config = ConfigDict(extra="forbid")

    filters: list[Literal["original", "wavelet"]] = Field(default_factory=lambda: list(FILTER_NAMES))
    classes: list[Literal["shape", "first_order", "glcm", "glrlm", "glszm", "ngtdm", "gldm"]] = Field(
        default_factory=lambda: [SHAPE_CLASS, *FEATURE_CLASSES]
    )
    bin_count: int = Field(default=32, ge=2)
    wavelet_level: int = Field(default=1, ge=1)
    resample_spacing: tuple[float, float, float] | None = (1.0, 1.0, 1.0)
    crop_margin: int = Field(default=1, ge=1)

    @field_validator("resample_spacing")
    @classmethod
    def _positive(cls, v: tuple[float, float, float] | None) -> tuple[float, float, float] | None:
        if v is not None and any(s <= 0 for s in v):
            raise ValueError(f"resample spacing must be positive, got {v}")
        return v


class TextureMatrix(BaseModel):
    """Dense nonnegative count grid of one texture family for one direction."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    family: TextureFamily
    n_levels: int
    counts: np.ndarray

    @field_validator("counts", mode="before")
    @classmethod
    def _nonnegative(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.float64)
        if (arr < 0).any():
            raise ValueError("texture matrix entries must be nonnegative")
        return _readonly(arr)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.counts.sum()


# --- Biomarker selection ---

class SelectionConfig(BaseModel):
    """Cross-validated L1 logistic selection settings."""
    model_config = ConfigDict(extra="forbid")

    folds: int = Field(default=5, ge=2)
    rule: SelectionRule = SelectionRule.ONE_SE
    grid_size: int = Field(default=100, ge=2)
    grid_ratio: float = Field(default=1e-3, gt=0.0, lt=1.0)
    tol: float = Field(default=1e-7, gt=0.0)
    max_iter: int = Field(default=200, ge=1)
    lambda_floor: float = Field(default=0.0, ge=0.0)


class Standardizer(BaseModel):
    """Training-set column statistics; zero-variance columns listed in `dropped`."""
    feature_names: list[str]
    means: list[float]
    stds: list[float]
    dropped: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _positive_stds(self) -> Standardizer:
        if not (len(self.feature_names) == len(self.means) == len(self.stds)):
            raise ValueError("standardizer columns misaligned")
        if any(not s > 0 for s in self.stds):
            raise ValueError("retained features need positive std")
        return self


class CvCurve(BaseModel):
    """Cross-validated loss along a descending λ grid."""
    lambdas: list[float]
    mean_loss: list[float]
    se_loss: list[float]
    rule: SelectionRule
    lambda_min: float
    lambda_1se: float
    chosen_lambda: float

    @model_validator(mode="after")
    def _valid_grid(self) -> CvCurve:
        if any(b >= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise ValueError("λ grid must be strictly decreasing")
        if self.chosen_lambda not in self.lambdas:
            raise ValueError("chosen λ must lie on the grid")
        return self


class Provenance(BaseModel):
    cohort_id: str
    config_hash: str
    seed: int
    fold_seed: int
    n_train: int
    n_features_in: int
    empty_selection: bool


class BiomarkerModel(BaseModel):
    """Sparse logistic biomarker; signature = sigmoid(intercept + x̃ᵀβ)."""
    feature_names: list[str]
    coefficients: list[float]
    intercept: float
    lambda_: float = Field(alias="lambda")
    standardizer: Standardizer
    provenance: Provenance

    model_config = ConfigDict(populate_by_name=True)

    @model_validator(mode="after")
    def _sparse(self) -> BiomarkerModel:
        if len(self.feature_names) != len(self.coefficients):
            raise ValueError("one coefficient per selected feature")
        if any(c == 0.0 for c in self.coefficients):
            raise ValueError("selected features must have nonzero coefficients")
        missing = set(self.feature_names) - set(self.standardizer.feature_names)
        if missing:
            raise ValueError(f"selected features absent from training catalog: {sorted(missing)[:5]}")
        return self


# --- Evaluation ---

class EvaluationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    split_ratio: float = Field(default=0.7, gt=0.0, lt=1.0)
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    write_roc_points: bool = False


class CohortSplit(BaseModel):
    """Time-ordered train/validation partition of one cohort."""
    ordered_ids: list[str]
    train_ids: list[str]
    val_ids: list[str]
    ratio: float

    @model_validator(mode="after")
    def _partition(self) -> CohortSplit:
        if set(self.train_ids) & set(self.val_ids):
            raise ValueError("train and validation overlap")
        if self.train_ids + self.val_ids != self.ordered_ids:
            raise ValueError("split must partition the ordered cohort")
        return self


class RocAnalysis(BaseModel):
    """Empirical ROC curve plus DeLong structural components."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    fpr: np.ndarray
    tpr: np.ndarray
    auc: float = Field(ge=0.0, le=1.0)
    v10: np.ndarray
    v01: np.ndarray


class DeLongResult(BaseModel):
    auc_a: float
    auc_b: float
    difference: float
    variance: float = Field(ge=0.0)
    z: float
    p: float = Field(ge=0.0, le=1.0)
    degenerate: bool = False


class PairwiseComparison(BaseModel):
    column: str
    model_a: str
    model_b: str
    result: DeLongResult
    significant: bool


class TransferMatrix(BaseModel):
    """Validation AUC for each (biomarker source, validation cohort) pair."""
    row_names: list[str]
    column_names: list[str]
    aucs: list[list[float]]
    comparisons: list[PairwiseComparison] = Field(default_factory=list)
    alpha: float = 0.05
    trained_on: str | None = None

    @model_validator(mode="after")
    def _cells_in_range(self) -> TransferMatrix:
        if len(self.aucs) != len(self.row_names) or any(len(r) != len(self.column_names) for r in self.aucs):
            raise ValueError("AUC grid shape does not match names")
        if any(not 0.0 <= a <= 1.0 for row in self.aucs for a in row):
            raise ValueError("AUC cells must lie in [0, 1]")
        return self

    def mean_off_diagonal(self, row: int) -> float:
        """Mean AUC of a biomarker on the cohorts it was not built from."""
        source = self.row_names[row]
        cells = [a for name, a in zip(self.column_names, self.aucs[row]) if name != source]
        return sum(cells) / len(cells) if cells else float("nan")


# --- Synthesis ---

class PhantomSpec(BaseModel):
    """Ellipsoidal ROI over smoothed noise; label 1 adds a textured lesion."""
    model_config = ConfigDict(extra="forbid")

    dims: tuple[int, int, int] = (24, 24, 16)
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    background: float = 100.0
    noise_std: float = Field(default=5.0, ge=0.0)
    center: tuple[float, float, float] = (11.5, 11.5, 7.5)
    semi_axes: tuple[float, float, float] = (8.0, 7.0, 5.0)
    lesion_offset: float = 20.0
    correlation_length: float = Field(default=2.0, gt=0.0)
    label: Literal[0, 1] = 0
    seed: int = 0

    @model_validator(mode="after")
    def _fits(self) -> PhantomSpec:
        for c, a, n in zip(self.center, self.semi_axes, self.dims):
            if a <= 0 or c - a < 0 or c + a > n - 1:
                raise ValueError(
                    f"ellipsoid (center {self.center}, semi-axes {self.semi_axes}) exceeds grid {self.dims}"
                )
        return self


class SyntheticCohortSpec(BaseModel):
    """Feature-space cohort with an informative direction and a hard-sample stratum."""
    model_config = ConfigDict(extra="forbid")

    name: str
    n: int = Field(ge=1)
    p: int = Field(default=40, ge=2)
    informative_weights: list[float] = Field(default_factory=lambda: [1.0, 1.0, 1.0, 1.0])
    nuisance_shift: list[float] = Field(default_factory=list)
    delta: float = Field(default=4.0, ge=0.0)
    hard_fraction: float = Field(default=0.3, ge=0.0, le=1.0)
    label_noise: float = Field(default=0.0, ge=0.0, le=0.5)
    seed: int = 0
    start_date: str = "2015-01-01"
    visit_interval_days: int = Field(default=3, ge=1)

    @model_validator(mode="after")
    def _shapes(self) -> SyntheticCohortSpec:
        if len(self.informative_weights) > self.p:
            raise ValueError("more informative weights than features")
        if not any(w != 0 for w in self.informative_weights):
            raise ValueError("informative direction must be nonzero")
        if self.nuisance_shift and len(self.nuisance_shift) != self.p:
            raise ValueError(f"nuisance_shift needs {self.p} entries")
        datetime.fromisoformat(self.start_date)
        return self


class ExperimentSpec(BaseModel):
    """Three cohorts sharing one informative direction."""
    model_config = ConfigDict(extra="forbid")

    cohorts: list[SyntheticCohortSpec] = Field(min_length=3, max_length=3)

    @model_validator(mode="after")
    def _shared_direction(self) -> ExperimentSpec:
        first = self.cohorts[0]
        for c in self.cohorts[1:]:
            if c.informative_weights != first.informative_weights or c.p != first.p:
                raise ValueError("cohorts must share the informative direction and feature dimension")
        names = [c.name for c in self.cohorts]
        if len(set(names)) != len(names):
            raise ValueError("cohort names must be distinct")
        shifts = [tuple(c.nuisance_shift) for c in self.cohorts if any(c.nuisance_shift)]
        if len(set(shifts)) != len(shifts):
            raise ValueError("nuisance shifts must be distinct across cohorts")
        return self


class PhantomBatchConfig(BaseModel):
    """Phantom cohort written as raw volumes plus a manifest."""
    model_config = ConfigDict(extra="forbid")

    count: int = Field(default=0, ge=0)
    sequences: list[str] = Field(default_factory=lambda: ["T2W"])
    template: PhantomSpec = Field(default_factory=PhantomSpec)


class PipelineConfig(BaseModel):
    """Effective configuration of one CLI invocation; echoed to the output dir."""
    model_config = ConfigDict(extra="forbid")

    manifest: str | None = None
    simulation: ExperimentSpec | None = None
    catalog: FeatureCatalogConfig = Field(default_factory=FeatureCatalogConfig)
    selection: SelectionConfig = Field(default_factory=SelectionConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    phantoms: PhantomBatchConfig = Field(default_factory=PhantomBatchConfig)
    output_dir: str = "output"
    seed: int | None = None
    workers: int = Field(default=1, ge=1)


# --- Experiment State (TypedDict for LangGraph) ---

class ExperimentState(TypedDict, total=False):
    """State shared across the experiment graph nodes.

    Each node reads its inputs and writes only its own fields.
    """
    # Configuration
    config: PipelineConfig
    out_dir: str

    # Simulation outputs (cohort name -> feature table)
    cohorts: dict[str, Any]

    # Phantom extraction outputs
    phantom_features: Any

    # Build outputs
    splits: dict[str, CohortSplit]
    models: dict[str, BiomarkerModel]

    # Transfer outputs
    transfer: TransferMatrix

    # Report
    report_text: str

    # Pipeline metadata
    current_step: str
