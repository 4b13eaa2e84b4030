"""Seeded voxel phantoms for exercising the imaging path.

A phantom is smoothed Gaussian noise around a background level with an
ellipsoidal ROI. Positive phantoms get a lesion in the central half-size
sub-ellipsoid: an intensity offset plus texture with half the correlation
length of the background.
"""

from __future__ import annotations

import json
import logging
from datetime import date, timedelta
from pathlib import Path

import numpy as np
from scipy import ndimage

from core.rng import derive_key, stream
from core.state import PhantomBatchConfig, PhantomSpec, RoiMask, Volume
from imaging.io import save_mask, save_raw

logger = logging.getLogger(__name__)

PHANTOM_START_DATE = date(2016, 1, 1)


def ellipsoid(dims: tuple[int, int, int], center, semi_axes) -> np.ndarray:
    """Voxels whose index lies inside the ellipsoid."""
    x, y, z = np.ogrid[: dims[0], : dims[1], : dims[2]]
    (cx, cy, cz), (ax, ay, az) = center, semi_axes
    return ((x - cx) / ax) ** 2 + ((y - cy) / ay) ** 2 + ((z - cz) / az) ** 2 <= 1.0


def _texture(rng: np.random.Generator, dims, correlation_length: float, std: float) -> np.ndarray:
    """Gaussian-smoothed white noise rescaled to the requested std."""
    field = ndimage.gaussian_filter(rng.standard_normal(dims), sigma=correlation_length, mode="reflect")
    spread = field.std()
    if spread == 0 or std == 0:
        return np.zeros(dims)
    return field / spread * std


def make_phantom(spec: PhantomSpec) -> tuple[Volume, RoiMask, int]:
    rng = stream(spec.seed, "phantom")
    voxels = spec.background + _texture(rng, spec.dims, spec.correlation_length, spec.noise_std)
    roi = ellipsoid(spec.dims, spec.center, spec.semi_axes)

    lesion_texture = _texture(rng, spec.dims, spec.correlation_length / 2.0, spec.noise_std)
    if spec.label == 1:
        lesion = ellipsoid(spec.dims, spec.center, tuple(a / 2.0 for a in spec.semi_axes))
        voxels[lesion] += spec.lesion_offset + lesion_texture[lesion]

    return Volume(voxels=voxels, spacing=spec.spacing), RoiMask(flags=roi), spec.label


def phantom_labels(count: int, seed: int) -> np.ndarray:
    """Balanced labels in a seeded order."""
    labels = np.arange(count) % 2
    return stream(seed, "phantom-labels").permutation(labels)


def emit_phantoms(config: PhantomBatchConfig, seed: int, out_dir: str | Path) -> Path:
    """Write `config.count` phantoms as raw volumes plus a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    volume_dir = out_dir / "volumes"
    volume_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for index, label in enumerate(phantom_labels(config.count, seed).tolist()):
        patient = f"P{index:04d}"
        sequences = {}
        for seq in sorted(config.sequences):
            spec = config.template.model_copy(update={
                "label": label,
                "seed": derive_key(seed, "phantom", seq, index) & 0x7FFF_FFFF_FFFF_FFFF,
            })
            volume, mask, _ = make_phantom(spec)
            vol_path = save_raw(volume, volume_dir / f"{patient}_{seq}")
            mask_path = save_mask(mask, volume.spacing, volume_dir / f"{patient}_{seq}_mask")
            sequences[seq] = {
                "volume": vol_path.relative_to(out_dir).as_posix(),
                "mask": mask_path.relative_to(out_dir).as_posix(),
            }
        entries.append({
            "id": patient,
            "visit_time": (PHANTOM_START_DATE + timedelta(days=index)).isoformat(),
            "label": label,
            "sequences": sequences,
        })

    manifest = out_dir / "manifest.json"
    manifest.write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote %d phantoms: %s", config.count, manifest)
    return manifest
