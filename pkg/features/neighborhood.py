"""Voxel neighbourhood helpers shared by the texture families.

Grids are level grids from DiscretizedRoi: 1..Ng inside the ROI, 0 outside.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy import ndimage

# 13 unique 3D unit offsets; the first nonzero component is positive so d and -d
# are never both present
DIRECTIONS: tuple[tuple[int, int, int], ...] = tuple(
    d for d in itertools.product((-1, 0, 1), repeat=3)
    if any(d) and next(c for c in d if c != 0) > 0
)

# 26-neighbourhood kernel without the centre voxel
NEIGHBOUR_KERNEL = np.ones((3, 3, 3), dtype=np.int64)
NEIGHBOUR_KERNEL[1, 1, 1] = 0

# 26-connectivity for zone labelling
CONNECTIVITY_26 = np.ones((3, 3, 3), dtype=bool)


def _window(offset: int, n: int) -> tuple[slice, slice]:
    """Source and destination slices for a shift of `offset` along an axis of length n."""
    if offset >= 0:
        return slice(0, max(n - offset, 0)), slice(min(offset, n), n)
    return slice(min(-offset, n), n), slice(0, max(n + offset, 0))


def shift(arr: np.ndarray, offset: tuple[int, int, int], fill=0) -> np.ndarray:
    """out[x] = arr[x + offset], `fill` where x + offset leaves the grid."""
    out = np.full_like(arr, fill)
    src, dst = [], []
    for d, n in zip(offset, arr.shape):
        s, t = _window(d, n)
        src.append(s)
        dst.append(t)
    out[tuple(src)] = arr[tuple(dst)]
    return out


def pairs(grid: np.ndarray, offset: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Levels (a, b) of every voxel pair (x, x + offset) with both voxels in the ROI."""
    src, dst = [], []
    for d, n in zip(offset, grid.shape):
        s, t = _window(d, n)
        src.append(s)
        dst.append(t)
    a = grid[tuple(src)]
    b = grid[tuple(dst)]
    keep = (a > 0) & (b > 0)
    return a[keep], b[keep]


def neighbour_counts(indicator: np.ndarray) -> np.ndarray:
    """Number of 26-neighbours where `indicator` is set, for every voxel."""
    return ndimage.convolve(indicator.astype(np.int64), NEIGHBOUR_KERNEL, mode="constant", cval=0)


def neighbour_sums(grid: np.ndarray) -> np.ndarray:
    """Sum of 26-neighbour levels (0 outside the ROI), for every voxel."""
    return ndimage.convolve(grid.astype(np.int64), NEIGHBOUR_KERNEL, mode="constant", cval=0)
