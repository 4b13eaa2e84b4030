"""Voxel-based 3D shape descriptors of the ROI in physical units (mm)."""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from core.errors import EmptyMaskError
from core.state import FeatureVector, RoiMask

FEATURE_NAMES = (
    "compactness2",
    "elongation",
    "flatness",
    "least_axis_length",
    "major_axis_length",
    "maximum_3d_diameter",
    "sphericity",
    "surface_area",
    "surface_volume_ratio",
    "voxel_volume",
)


def exposed_face_area(flags: np.ndarray, spacing: tuple[float, float, float]) -> float:
    """Total area of voxel faces separating ROI from non-ROI (grid border counts as outside)."""
    padded = np.pad(flags, 1, constant_values=False)
    sx, sy, sz = spacing
    face_area = (sy * sz, sx * sz, sx * sy)
    return float(sum(
        np.count_nonzero(np.diff(padded, axis=axis)) * face_area[axis]
        for axis in range(3)
    ))


def _extreme_voxels(flags: np.ndarray) -> np.ndarray:
    """First and last ROI voxel on every axis-parallel line; contains all hull vertices."""
    found = []
    for axis in range(3):
        moved = np.moveaxis(flags, axis, -1)
        hit = moved.any(axis=-1)
        first = np.argmax(moved, axis=-1)
        last = moved.shape[-1] - 1 - np.argmax(moved[..., ::-1], axis=-1)
        for pos in (first, last):
            a, b = np.nonzero(hit)
            coords = np.stack([a, b, pos[a, b]], axis=1)
            order = [0, 1, 2]
            order.insert(axis, order.pop(2))
            found.append(coords[:, order])
    return np.unique(np.concatenate(found), axis=0)


def maximum_diameter(flags: np.ndarray, spacing: tuple[float, float, float]) -> float:
    """Largest distance between ROI voxel centres."""
    points = _extreme_voxels(flags) * np.asarray(spacing)
    if len(points) < 2:
        return 0.0
    try:
        points = points[ConvexHull(points).vertices]
    except (QhullError, ValueError):
        # coplanar or collinear ROI: the candidate set is already small
        pass
    return float(pdist(points).max())


def principal_variances(flags: np.ndarray, spacing: tuple[float, float, float]) -> np.ndarray:
    """Eigenvalues of the voxel-centre covariance, descending, clipped at 0."""
    coords = np.argwhere(flags) * np.asarray(spacing)
    centered = coords - coords.mean(axis=0)
    cov = centered.T @ centered / len(coords)
    return np.clip(np.linalg.eigvalsh(cov)[::-1], 0.0, None)


def shape(mask: RoiMask, spacing: tuple[float, float, float]) -> FeatureVector:
    """10 shape features.

    A single-voxel ROI has diameter 0; degenerate covariance gives
    elongation = flatness = 1.
    """
    if mask.voxel_count == 0:
        raise EmptyMaskError("shape features need a non-empty ROI")
    flags = mask.flags
    volume = mask.voxel_count * spacing[0] * spacing[1] * spacing[2]
    area = exposed_face_area(flags, spacing)

    lam1, lam2, lam3 = principal_variances(flags, spacing)
    if lam1 > 0:
        elongation = math.sqrt(lam2 / lam1)
        flatness = math.sqrt(lam3 / lam1)
    else:
        elongation = flatness = 1.0

    values = {
        "voxel_volume": volume,
        "surface_area": area,
        "surface_volume_ratio": area / volume,
        "sphericity": (math.pi ** (1 / 3) * (6 * volume) ** (2 / 3)) / area,
        "compactness2": 36 * math.pi * volume**2 / area**3,
        "maximum_3d_diameter": maximum_diameter(flags, spacing),
        "major_axis_length": 4 * math.sqrt(lam1),
        "least_axis_length": 4 * math.sqrt(lam3),
        "elongation": elongation,
        "flatness": flatness,
    }
    return FeatureVector.from_mapping(values)
