"""Undecimated (stationary) 3D Haar filter bank.

Low-pass taps (1, 1)/√2 and high-pass taps (1, -1)/√2 are applied separably
along x, then y, then z: out[i] = (v[i] ± v[i + step]) / √2 with half-sample
symmetric extension past the last sample. Every sub-band keeps the input
dims, so the ROI mask applies unchanged.
"""

from __future__ import annotations

import itertools
import logging
import math

import numpy as np

from core.errors import ConfigError, DimsError
from core.state import Volume

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

# letters in (x, y, z) order; "L" = low-pass, "H" = high-pass
SUBBANDS: tuple[str, ...] = tuple("".join(s) for s in itertools.product("LH", repeat=3))


def _haar_axis(data: np.ndarray, axis: int, step: int, high: bool) -> np.ndarray:
    n = data.shape[axis]
    pad = [(0, 0)] * data.ndim
    pad[axis] = (0, step)
    extended = np.pad(data, pad, mode="symmetric")
    ahead = np.take(extended, np.arange(step, n + step), axis=axis)
    return (data - ahead) / SQRT2 if high else (data + ahead) / SQRT2


def _decompose(data: np.ndarray, step: int) -> dict[str, np.ndarray]:
    bands = {"": data}
    for axis in range(3):
        bands = {
            key + letter: _haar_axis(arr, axis, step, high=(letter == "H"))
            for key, arr in bands.items()
            for letter in "LH"
        }
    return bands


def wavelet_subbands(volume: Volume, level: int = 1) -> dict[str, Volume]:
    """The 8 sub-bands {LLL, ..., HHH} of the given decomposition level.

    Levels above 1 re-decompose the previous LLL band with taps dilated by
    2^(level-1) (à trous); only the final level's bands are returned.
    """
    if min(volume.dims) < 2:
        raise DimsError(f"wavelet transform needs every axis >= 2, got dims {volume.dims}")
    if level < 1:
        raise ConfigError(f"wavelet level must be >= 1, got {level}")

    data = volume.voxels
    for k in range(level):
        bands = _decompose(data, step=2**k)
        data = bands["LLL"]
    logger.debug("Wavelet level %d of %s", level, volume.dims)
    return {name: Volume(voxels=bands[name], spacing=volume.spacing) for name in SUBBANDS}
