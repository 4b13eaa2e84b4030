"""Gray-level run-length matrix (GLRLM) features over 13 directions."""

from __future__ import annotations

import numpy as np

from core.state import DiscretizedRoi, FeatureVector, TextureFamily, TextureMatrix
from features.base import TextureFeatureClass, rename, size_emphasis
from features.neighborhood import DIRECTIONS, shift

_NAMES = {
    "small_emphasis": "short_run_emphasis",
    "large_emphasis": "long_run_emphasis",
    "gln": "gray_level_non_uniformity",
    "glnn": "gray_level_non_uniformity_normalized",
    "size_nu": "run_length_non_uniformity",
    "size_nun": "run_length_non_uniformity_normalized",
    "percentage": "run_percentage",
    "gl_variance": "gray_level_variance",
    "size_variance": "run_variance",
    "entropy": "run_entropy",
    "low_gl": "low_gray_level_run_emphasis",
    "high_gl": "high_gray_level_run_emphasis",
    "small_low_gl": "short_run_low_gray_level_emphasis",
    "small_high_gl": "short_run_high_gray_level_emphasis",
    "large_low_gl": "long_run_low_gray_level_emphasis",
    "large_high_gl": "long_run_high_gray_level_emphasis",
}

FEATURE_NAMES = tuple(sorted(_NAMES.values()))


def run_lengths(grid: np.ndarray, n_levels: int, direction: tuple[int, int, int]) -> np.ndarray:
    """Run-length counts along one direction, shape (Ng, longest possible run).

    A run is a maximal chain x, x+d, x+2d, ... of ROI voxels sharing a level.
    """
    inside = grid > 0
    same_next = inside & (grid == shift(grid, direction))
    back = tuple(-c for c in direction)
    starts = inside & ~shift(same_next, back, fill=False)

    max_len = max(grid.shape)
    at_least = np.zeros((n_levels + 1, max_len + 2), dtype=np.int64)
    alive = starts
    length = 1
    while alive.any():
        at_least[:, length] = np.bincount(grid[alive], minlength=n_levels + 1)
        step = tuple(c * (length - 1) for c in direction)
        alive = alive & shift(same_next, step, fill=False)
        length += 1

    # exactly r = (at least r) - (at least r + 1)
    exact = at_least[1:, 1:max_len + 1] - at_least[1:, 2:max_len + 2]
    return exact.astype(np.float64)


class GlrlmFeatures(TextureFeatureClass):
    class_name = "glrlm"
    family = TextureFamily.GLRLM
    feature_names = FEATURE_NAMES

    def __init__(self, directions: tuple[tuple[int, int, int], ...] = DIRECTIONS) -> None:
        self.directions = directions

    def matrices(self, droi: DiscretizedRoi) -> list[TextureMatrix]:
        return [
            TextureMatrix(family=self.family, n_levels=droi.n_levels,
                          counts=run_lengths(droi.grid, droi.n_levels, d))
            for d in self.directions
        ]

    def compute(self, matrix: TextureMatrix, droi: DiscretizedRoi) -> dict[str, float]:
        n_voxels = int(np.count_nonzero(droi.grid))
        return rename(size_emphasis(matrix.counts, n_voxels), _NAMES)


def glrlm(droi: DiscretizedRoi) -> FeatureVector:
    return GlrlmFeatures().run(droi)
