"""Resampling, ROI cropping and gray-level discretization.

Voxel i along an axis with spacing s covers [i*s, (i+1)*s) in physical space;
sample positions are voxel centers.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import ndimage

from core.errors import ConfigError, DegenerateExtentError, EmptyMaskError
from core.state import DiscretizedRoi, RoiMask, Volume

logger = logging.getLogger(__name__)

# relative slack so that n*s/s does not round up to n+1
_EXTENT_RTOL = 1e-9


def _output_dims(dims: tuple[int, int, int], spacing, target) -> tuple[int, int, int]:
    out = []
    for n, s, t in zip(dims, spacing, target):
        ratio = n * s / t
        out.append(math.ceil(ratio * (1.0 - _EXTENT_RTOL)))
    return tuple(out)  # type: ignore[return-value]


def _source_coords(n_out: int, spacing: float, target: float) -> np.ndarray:
    """Source-index coordinate of each output voxel center along one axis."""
    k = np.arange(n_out, dtype=np.float64)
    return (k + 0.5) * (target / spacing) - 0.5


def resample(
    volume: Volume,
    mask: RoiMask,
    target_spacing: tuple[float, float, float],
) -> tuple[Volume, RoiMask]:
    """Resample onto a grid of `target_spacing` covering the original extent.

    Intensities use trilinear interpolation with edge clamping; the mask uses
    nearest neighbour (ties round up) so it stays binary.
    """
    if len(target_spacing) != 3 or any(not t > 0 for t in target_spacing):
        raise ConfigError(f"target spacing must be three positive values, got {target_spacing}")
    if volume.dims != mask.dims:
        raise ConfigError(f"mask dims {mask.dims} != volume dims {volume.dims}")

    out_dims = _output_dims(volume.dims, volume.spacing, target_spacing)
    if min(out_dims) < 1:
        raise DegenerateExtentError(f"resampling {volume.dims}@{volume.spacing} to {target_spacing} gives {out_dims}")

    axes = [
        _source_coords(m, s, t)
        for m, s, t in zip(out_dims, volume.spacing, target_spacing)
    ]

    if out_dims == volume.dims and tuple(target_spacing) == tuple(volume.spacing):
        return volume, mask

    grid = np.meshgrid(*axes, indexing="ij")
    voxels = ndimage.map_coordinates(volume.voxels, grid, order=1, mode="nearest")

    nearest = [
        np.clip(np.floor(a + 0.5).astype(np.int64), 0, n - 1)
        for a, n in zip(axes, mask.dims)
    ]
    flags = mask.flags[np.ix_(*nearest)]

    logger.debug("Resampled %s@%s -> %s@%s", volume.dims, volume.spacing, out_dims, target_spacing)
    spacing = tuple(float(t) for t in target_spacing)
    return Volume(voxels=voxels, spacing=spacing), RoiMask(flags=flags)


def bounding_box(mask: RoiMask, margin: int = 0) -> tuple[slice, slice, slice]:
    """Tight ROI box expanded by `margin` voxels and clamped to the grid."""
    if mask.voxel_count == 0:
        raise EmptyMaskError("ROI mask is empty")
    coords = np.nonzero(mask.flags)
    return tuple(
        slice(max(int(c.min()) - margin, 0), min(int(c.max()) + margin + 1, n))
        for c, n in zip(coords, mask.dims)
    )  # type: ignore[return-value]


def crop_to_roi(volume: Volume, mask: RoiMask, margin: int = 0) -> tuple[Volume, RoiMask]:
    """Crop volume and mask to the ROI bounding box plus margin."""
    if margin < 0:
        raise ConfigError(f"crop margin must be non-negative, got {margin}")
    box = bounding_box(mask, margin)
    cropped = Volume(voxels=volume.voxels[box], spacing=volume.spacing)
    return cropped, RoiMask(flags=mask.flags[box])


def discretize(volume: Volume, mask: RoiMask, bin_count: int) -> DiscretizedRoi:
    """Fixed-bin-count discretization over the ROI's [min, max].

    level = min(floor((v - min) / w) + 1, Ng) with w = (max - min) / Ng;
    a flat ROI maps to level 1 everywhere.
    """
    if bin_count < 2:
        raise ConfigError(f"bin count must be >= 2, got {bin_count}")
    if mask.voxel_count == 0:
        raise EmptyMaskError("cannot discretize an empty ROI")

    values = volume.voxels[mask.flags]
    vmin = float(values.min())
    vmax = float(values.max())

    grid = np.zeros(volume.dims, dtype=np.int64)
    if vmax == vmin:
        grid[mask.flags] = 1
        edges = tuple(vmin + float(k) for k in range(bin_count + 1))
        return DiscretizedRoi(grid=grid, n_levels=bin_count, bin_edges=edges)

    width = (vmax - vmin) / bin_count
    levels = np.floor((values - vmin) / width).astype(np.int64) + 1
    grid[mask.flags] = np.minimum(levels, bin_count)
    edges = tuple(float(e) for e in vmin + width * np.arange(bin_count + 1))
    return DiscretizedRoi(grid=grid, n_levels=bin_count, bin_edges=edges)
