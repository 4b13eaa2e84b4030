"""Gray-level size-zone matrix (GLSZM) features with 26-connected zones."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from core.state import DiscretizedRoi, FeatureVector, TextureFamily, TextureMatrix
from features.base import TextureFeatureClass, rename, size_emphasis
from features.neighborhood import CONNECTIVITY_26

_NAMES = {
    "small_emphasis": "small_area_emphasis",
    "large_emphasis": "large_area_emphasis",
    "gln": "gray_level_non_uniformity",
    "glnn": "gray_level_non_uniformity_normalized",
    "size_nu": "size_zone_non_uniformity",
    "size_nun": "size_zone_non_uniformity_normalized",
    "percentage": "zone_percentage",
    "gl_variance": "gray_level_variance",
    "size_variance": "zone_variance",
    "entropy": "zone_entropy",
    "low_gl": "low_gray_level_zone_emphasis",
    "high_gl": "high_gray_level_zone_emphasis",
    "small_low_gl": "small_area_low_gray_level_emphasis",
    "small_high_gl": "small_area_high_gray_level_emphasis",
    "large_low_gl": "large_area_low_gray_level_emphasis",
    "large_high_gl": "large_area_high_gray_level_emphasis",
}

FEATURE_NAMES = tuple(sorted(_NAMES.values()))


def size_zones(grid: np.ndarray, n_levels: int) -> np.ndarray:
    """Zone counts, shape (Ng, ROI voxel count); column k holds zones of size k+1."""
    n_voxels = int(np.count_nonzero(grid))
    counts = np.zeros((n_levels, n_voxels), dtype=np.float64)
    for level in np.unique(grid[grid > 0]):
        labels, n_zones = ndimage.label(grid == level, structure=CONNECTIVITY_26)
        sizes = np.bincount(labels.ravel(), minlength=n_zones + 1)[1:]
        counts[level - 1] += np.bincount(sizes - 1, minlength=n_voxels)[:n_voxels]
    return counts


class GlszmFeatures(TextureFeatureClass):
    class_name = "glszm"
    family = TextureFamily.GLSZM
    feature_names = FEATURE_NAMES

    def matrices(self, droi: DiscretizedRoi) -> list[TextureMatrix]:
        return [TextureMatrix(family=self.family, n_levels=droi.n_levels,
                              counts=size_zones(droi.grid, droi.n_levels))]

    def compute(self, matrix: TextureMatrix, droi: DiscretizedRoi) -> dict[str, float]:
        n_voxels = int(np.count_nonzero(droi.grid))
        return rename(size_emphasis(matrix.counts, n_voxels), _NAMES)


def glszm(droi: DiscretizedRoi) -> FeatureVector:
    return GlszmFeatures().run(droi)
