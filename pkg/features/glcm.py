"""Gray-level co-occurrence matrix (GLCM) features.

One symmetric matrix per direction at distance 1; both voxels of a pair must
lie in the ROI. Features are averaged over non-empty directions.
"""

from __future__ import annotations

import numpy as np

from core.state import DiscretizedRoi, FeatureVector, TextureFamily, TextureMatrix
from features.base import TextureFeatureClass, entropy2
from features.neighborhood import DIRECTIONS, pairs

FEATURE_NAMES = (
    "autocorrelation",
    "cluster_prominence",
    "cluster_shade",
    "cluster_tendency",
    "contrast",
    "correlation",
    "difference_average",
    "difference_entropy",
    "difference_variance",
    "imc1",
    "imc2",
    "inverse_difference",
    "inverse_difference_moment",
    "inverse_variance",
    "joint_average",
    "joint_energy",
    "joint_entropy",
    "maximum_probability",
    "sum_entropy",
)


def cooccurrence(grid: np.ndarray, n_levels: int, offset: tuple[int, int, int]) -> np.ndarray:
    """Symmetric co-occurrence counts for one offset, shape (Ng, Ng)."""
    a, b = pairs(grid, offset)
    flat = np.bincount((a - 1) * n_levels + (b - 1), minlength=n_levels * n_levels)
    counts = flat.reshape(n_levels, n_levels).astype(np.float64)
    return counts + counts.T


class GlcmFeatures(TextureFeatureClass):
    class_name = "glcm"
    family = TextureFamily.GLCM
    feature_names = FEATURE_NAMES

    def __init__(self, offsets: tuple[tuple[int, int, int], ...] = DIRECTIONS) -> None:
        self.offsets = offsets

    def matrices(self, droi: DiscretizedRoi) -> list[TextureMatrix]:
        return [
            TextureMatrix(family=self.family, n_levels=droi.n_levels,
                          counts=cooccurrence(droi.grid, droi.n_levels, d))
            for d in self.offsets
        ]

    def compute(self, matrix: TextureMatrix, droi: DiscretizedRoi) -> dict[str, float]:
        p = matrix.probabilities
        ng = matrix.n_levels
        levels = np.arange(1, ng + 1, dtype=np.float64)
        i = levels[:, None]
        j = levels[None, :]

        px = p.sum(axis=1)
        py = p.sum(axis=0)
        ux = float(np.sum(px * levels))
        uy = float(np.sum(py * levels))
        sigx = float(np.sqrt(np.sum(px * (levels - ux) ** 2)))
        sigy = float(np.sqrt(np.sum(py * (levels - uy) ** 2)))

        diff = np.abs(i - j)
        # p_{x+y}(k) for k = 2..2Ng and p_{x-y}(k) for k = 0..Ng-1
        idx_sum = (i + j - 2).astype(np.int64).ravel()
        p_sum = np.bincount(idx_sum, weights=p.ravel(), minlength=2 * ng - 1)
        p_diff = np.bincount(diff.astype(np.int64).ravel(), weights=p.ravel(), minlength=ng)
        k_diff = np.arange(ng, dtype=np.float64)

        hx = entropy2(px)
        hy = entropy2(py)
        hxy = entropy2(p)
        pxpy = px[:, None] * py[None, :]
        log_pxpy = np.zeros_like(pxpy)
        np.log2(pxpy, out=log_pxpy, where=pxpy > 0)
        hxy1 = float(-np.sum(p * log_pxpy))
        hxy2 = float(-np.sum(pxpy * log_pxpy))

        centered = i + j - ux - uy
        diff_avg = float(np.sum(k_diff * p_diff))

        if sigx * sigy == 0:
            correlation = 1.0
        else:
            correlation = float((np.sum(p * i * j) - ux * uy) / (sigx * sigy))

        h_max = max(hx, hy)
        imc1 = (hxy - hxy1) / h_max if h_max > 0 else 0.0
        imc2 = float(np.sqrt(max(1.0 - np.exp(-2.0 * (hxy2 - hxy)), 0.0)))

        off_diag = diff > 0
        return {
            "autocorrelation": float(np.sum(p * i * j)),
            "joint_average": ux,
            "cluster_prominence": float(np.sum(p * centered**4)),
            "cluster_shade": float(np.sum(p * centered**3)),
            "cluster_tendency": float(np.sum(p * centered**2)),
            "contrast": float(np.sum(p * diff**2)),
            "correlation": correlation,
            "difference_average": diff_avg,
            "difference_entropy": entropy2(p_diff),
            "difference_variance": float(np.sum(p_diff * (k_diff - diff_avg) ** 2)),
            "joint_energy": float(np.sum(p**2)),
            "joint_entropy": hxy,
            "imc1": float(imc1),
            "imc2": imc2,
            "inverse_difference": float(np.sum(p / (1.0 + diff))),
            "inverse_difference_moment": float(np.sum(p / (1.0 + diff**2))),
            "inverse_variance": float(np.sum(p[off_diag] / diff[off_diag] ** 2)),
            "maximum_probability": float(p.max()),
            "sum_entropy": entropy2(p_sum),
        }


def glcm(droi: DiscretizedRoi, offsets: tuple[tuple[int, int, int], ...] = DIRECTIONS) -> FeatureVector:
    return GlcmFeatures(offsets).run(droi)
