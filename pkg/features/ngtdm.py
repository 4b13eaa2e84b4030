"""Neighbouring gray-tone difference matrix (NGTDM) features.

For every ROI voxel with at least one ROI voxel among its 26 neighbours, the
neighbourhood average Ā is the mean level of those neighbours. Per level i:
n_i voxels, s_i = Σ |i - Ā|. Voxels without ROI neighbours are excluded.
"""

from __future__ import annotations

import numpy as np

from core.state import DiscretizedRoi, FeatureVector, TextureFamily, TextureMatrix
from features.base import TextureFeatureClass
from features.neighborhood import neighbour_counts, neighbour_sums

COARSENESS_CAP = 1e6

FEATURE_NAMES = ("busyness", "coarseness", "complexity", "contrast", "strength")


def gray_tone_differences(grid: np.ndarray, n_levels: int) -> np.ndarray:
    """Columns [n_i, s_i] per level, shape (Ng, 2)."""
    inside = grid > 0
    n_neighbours = neighbour_counts(inside)
    valid = inside & (n_neighbours > 0)

    levels = grid[valid]
    mean_neighbour = neighbour_sums(grid)[valid] / n_neighbours[valid]
    out = np.zeros((n_levels, 2), dtype=np.float64)
    out[:, 0] = np.bincount(levels - 1, minlength=n_levels)[:n_levels]
    out[:, 1] = np.bincount(levels - 1, weights=np.abs(levels - mean_neighbour), minlength=n_levels)[:n_levels]
    return out


class NgtdmFeatures(TextureFeatureClass):
    class_name = "ngtdm"
    family = TextureFamily.NGTDM
    feature_names = FEATURE_NAMES

    def matrices(self, droi: DiscretizedRoi) -> list[TextureMatrix]:
        return [TextureMatrix(family=self.family, n_levels=droi.n_levels,
                              counts=gray_tone_differences(droi.grid, droi.n_levels))]

    def compute(self, matrix: TextureMatrix, droi: DiscretizedRoi) -> dict[str, float]:
        n = matrix.counts[:, 0]
        s = matrix.counts[:, 1]
        present = n > 0
        n_vp = n.sum()
        p = n[present] / n_vp
        s = s[present]
        i = np.arange(1, matrix.n_levels + 1, dtype=np.float64)[present]
        n_gp = int(present.sum())

        ps = p * s
        sum_ps = float(ps.sum())
        sum_s = float(s.sum())
        sq_diff = (i[:, None] - i[None, :]) ** 2

        coarseness = COARSENESS_CAP if sum_ps == 0 else min(1.0 / sum_ps, COARSENESS_CAP)

        if n_gp > 1:
            contrast = float(np.sum(p[:, None] * p[None, :] * sq_diff)) / (n_gp * (n_gp - 1)) * (sum_s / n_vp)
        else:
            contrast = 0.0

        busy_denominator = float(np.sum(np.abs((i * p)[:, None] - (i * p)[None, :])))
        busyness = sum_ps / busy_denominator if busy_denominator > 0 else 0.0

        p_pair = p[:, None] + p[None, :]
        complexity = float(
            np.sum(np.sqrt(sq_diff) * (ps[:, None] + ps[None, :]) / p_pair)
        ) / n_vp

        strength = float(np.sum(p_pair * sq_diff)) / sum_s if sum_s > 0 else 0.0

        return {
            "coarseness": coarseness,
            "contrast": contrast,
            "busyness": busyness,
            "complexity": complexity,
            "strength": strength,
        }


def ngtdm(droi: DiscretizedRoi) -> FeatureVector:
    return NgtdmFeatures().run(droi)
