"""Base class for texture feature classes.

A texture class builds one TextureMatrix per direction (or a single matrix
for direction-free families), computes its features on every non-empty
matrix and averages them over matrices.
"""

from __future__ import annotations

import logging

import numpy as np

from core.errors import DegenerateMatrixError
from core.state import DiscretizedRoi, FeatureVector, TextureFamily, TextureMatrix

logger = logging.getLogger(__name__)


def entropy2(p: np.ndarray) -> float:
    """Base-2 entropy with 0·log0 := 0."""
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


class TextureFeatureClass:
    """Base class for all texture feature classes.

    Subclasses must set `class_name`, `family` and `feature_names`, and
    implement `matrices()` and `compute()`.
    """

    class_name: str = "base"
    family: TextureFamily
    feature_names: tuple[str, ...] = ()

    def matrices(self, droi: DiscretizedRoi) -> list[TextureMatrix]:
        raise NotImplementedError

    def compute(self, matrix: TextureMatrix, droi: DiscretizedRoi) -> dict[str, float]:
        """Features of one matrix, keyed by the names in `feature_names`."""
        raise NotImplementedError

    def run(self, droi: DiscretizedRoi) -> FeatureVector:
        matrices = self.matrices(droi)
        usable = [m for m in matrices if m.total > 0]
        if not usable:
            raise DegenerateMatrixError(f"{self.class_name}: every matrix is empty")
        if len(usable) < len(matrices):
            logger.warning(
                "[%s] skipped %d of %d empty matrices",
                self.class_name, len(matrices) - len(usable), len(matrices),
            )

        per_matrix = [self.compute(m, droi) for m in usable]
        averaged = {
            name: float(np.mean([row[name] for row in per_matrix]))
            for name in self.feature_names
        }
        logger.debug("[%s] %d features over %d matrices", self.class_name, len(averaged), len(usable))
        return FeatureVector.from_mapping(averaged)


# --- Size-emphasis features shared by GLRLM / GLSZM / GLDM ---

# Generic keys; each family maps them to its own names (run / zone / dependence)
EMPHASIS_KEYS = (
    "small_emphasis", "large_emphasis",
    "gln", "glnn", "size_nu", "size_nun", "percentage",
    "gl_variance", "size_variance", "entropy",
    "low_gl", "high_gl",
    "small_low_gl", "small_high_gl", "large_low_gl", "large_high_gl",
)


def size_emphasis(counts: np.ndarray, n_voxels: int) -> dict[str, float]:
    """Emphasis statistics of a (gray level × size) count matrix.

    Rows are levels 1..Ng, columns sizes 1..Ns; `n_voxels` is the number of
    ROI voxels used by the percentage statistic.
    """
    total = counts.sum()
    p = counts / total
    levels = np.arange(1, counts.shape[0] + 1, dtype=np.float64)[:, None]
    sizes = np.arange(1, counts.shape[1] + 1, dtype=np.float64)[None, :]

    p_level = p.sum(axis=1)
    p_size = p.sum(axis=0)
    mu_level = float(np.sum(p * levels))
    mu_size = float(np.sum(p * sizes))

    return {
        "small_emphasis": float(np.sum(p / sizes**2)),
        "large_emphasis": float(np.sum(p * sizes**2)),
        "gln": float(np.sum(counts.sum(axis=1) ** 2) / total),
        "glnn": float(np.sum(p_level**2)),
        "size_nu": float(np.sum(counts.sum(axis=0) ** 2) / total),
        "size_nun": float(np.sum(p_size**2)),
        "percentage": float(total / n_voxels),
        "gl_variance": float(np.sum(p * (levels - mu_level) ** 2)),
        "size_variance": float(np.sum(p * (sizes - mu_size) ** 2)),
        "entropy": entropy2(p),
        "low_gl": float(np.sum(p / levels**2)),
        "high_gl": float(np.sum(p * levels**2)),
        "small_low_gl": float(np.sum(p / (levels**2 * sizes**2))),
        "small_high_gl": float(np.sum(p * levels**2 / sizes**2)),
        "large_low_gl": float(np.sum(p * sizes**2 / levels**2)),
        "large_high_gl": float(np.sum(p * levels**2 * sizes**2)),
    }


def rename(values: dict[str, float], names: dict[str, str]) -> dict[str, float]:
    """Select generic emphasis keys and rename them to family feature names."""
    return {name: values[key] for key, name in names.items()}
