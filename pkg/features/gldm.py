"""Gray-level dependence matrix (GLDM) features.

Dependence of a voxel = 1 + number of 26-neighbours in the ROI whose level
differs from its own by at most α (α = 0: equal levels).
"""

from __future__ import annotations

import numpy as np

from core.state import DiscretizedRoi, FeatureVector, TextureFamily, TextureMatrix
from features.base import TextureFeatureClass, rename, size_emphasis
from features.neighborhood import neighbour_counts

MAX_DEPENDENCE = 27

_NAMES = {
    "small_emphasis": "small_dependence_emphasis",
    "large_emphasis": "large_dependence_emphasis",
    "gln": "gray_level_non_uniformity",
    "size_nu": "dependence_non_uniformity",
    "size_nun": "dependence_non_uniformity_normalized",
    "gl_variance": "gray_level_variance",
    "size_variance": "dependence_variance",
    "entropy": "dependence_entropy",
    "low_gl": "low_gray_level_emphasis",
    "high_gl": "high_gray_level_emphasis",
    "small_low_gl": "small_dependence_low_gray_level_emphasis",
    "small_high_gl": "small_dependence_high_gray_level_emphasis",
    "large_low_gl": "large_dependence_low_gray_level_emphasis",
    "large_high_gl": "large_dependence_high_gray_level_emphasis",
}

FEATURE_NAMES = tuple(sorted(_NAMES.values()))


def dependence_sizes(grid: np.ndarray) -> np.ndarray:
    """Per-voxel dependence (0 outside the ROI)."""
    dependence = np.zeros(grid.shape, dtype=np.int64)
    for level in np.unique(grid[grid > 0]):
        same = grid == level
        dependence[same] = neighbour_counts(same)[same] + 1
    return dependence


def dependence_matrix(grid: np.ndarray, n_levels: int) -> np.ndarray:
    """Voxel counts per (level, dependence), shape (Ng, 27)."""
    inside = grid > 0
    dependence = dependence_sizes(grid)[inside]
    flat = (grid[inside] - 1) * MAX_DEPENDENCE + (dependence - 1)
    counts = np.bincount(flat, minlength=n_levels * MAX_DEPENDENCE)
    return counts.reshape(n_levels, MAX_DEPENDENCE).astype(np.float64)


class GldmFeatures(TextureFeatureClass):
    class_name = "gldm"
    family = TextureFamily.GLDM
    feature_names = FEATURE_NAMES

    def matrices(self, droi: DiscretizedRoi) -> list[TextureMatrix]:
        return [TextureMatrix(family=self.family, n_levels=droi.n_levels,
                              counts=dependence_matrix(droi.grid, droi.n_levels))]

    def compute(self, matrix: TextureMatrix, droi: DiscretizedRoi) -> dict[str, float]:
        n_voxels = int(np.count_nonzero(droi.grid))
        return rename(size_emphasis(matrix.counts, n_voxels), _NAMES)


def gldm(droi: DiscretizedRoi) -> FeatureVector:
    return GldmFeatures().run(droi)
