"""First-order intensity statistics over the ROI."""

from __future__ import annotations

import numpy as np

from core.errors import EmptyMaskError
from core.state import FeatureVector, RoiMask, Volume
from imaging.preprocessing import discretize

FEATURE_NAMES = (
    "energy",
    "entropy",
    "interquartile_range",
    "kurtosis",
    "maximum",
    "mean",
    "mean_absolute_deviation",
    "median",
    "minimum",
    "p10",
    "p90",
    "range",
    "robust_mean_absolute_deviation",
    "root_mean_squared",
    "skewness",
    "total_energy",
    "uniformity",
    "variance",
)


def first_order(volume: Volume, mask: RoiMask, bin_count: int) -> FeatureVector:
    """18 intensity statistics; entropy and uniformity use `bin_count` bins.

    Skewness and kurtosis are 0 for a constant ROI. Kurtosis is non-excess,
    variance is the population variance.
    """
    if mask.voxel_count == 0:
        raise EmptyMaskError("first-order features need a non-empty ROI")
    x = volume.voxels[mask.flags]
    n = x.size

    p10, p25, median, p75, p90 = np.percentile(x, [10, 25, 50, 75, 90])
    mean = float(x.mean())
    centered = x - mean
    m2 = float(np.mean(centered**2))
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))

    robust = x[(x >= p10) & (x <= p90)]
    # two-valued ROIs can leave nothing inside [p10, p90]
    robust_mad = float(np.mean(np.abs(robust - robust.mean()))) if robust.size else 0.0
    energy = float(np.sum(x**2))

    levels = discretize(volume, mask, bin_count).levels
    p = np.bincount(levels, minlength=bin_count + 1)[1:] / n
    nz = p[p > 0]

    values = {
        "energy": energy,
        "total_energy": energy * volume.voxel_volume,
        "entropy": float(-np.sum(nz * np.log2(nz))),
        "minimum": float(x.min()),
        "p10": float(p10),
        "p90": float(p90),
        "maximum": float(x.max()),
        "mean": mean,
        "median": float(median),
        "interquartile_range": float(p75 - p25),
        "range": float(x.max() - x.min()),
        "mean_absolute_deviation": float(np.mean(np.abs(centered))),
        "robust_mean_absolute_deviation": robust_mad,
        "root_mean_squared": float(np.sqrt(energy / n)),
        "skewness": m3 / m2**1.5 if m2 > 0 else 0.0,
        "kurtosis": m4 / m2**2 if m2 > 0 else 0.0,
        "variance": m2,
        "uniformity": float(np.sum(p**2)),
    }
    return FeatureVector.from_mapping(values)
