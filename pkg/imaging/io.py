"""Volume readers and writers.

Supports NIfTI-1 single files (.nii / .nii.gz, int16/uint16/float32/float64)
and the raw format: `<name>.f32` little-endian float32 payload in x-fastest
order plus a `<name>.json` sidecar with dims and spacing.
"""

from __future__ import annotations

import gzip
import io
import json
import logging
from pathlib import Path

import nibabel as nib
import numpy as np

from core.errors import (
    ConfigError,
    DataIOError,
    PayloadSizeError,
    UnknownMagicError,
    UnsupportedDatatypeError,
    VolumeFormatError,
)
from core.state import RoiMask, SequenceImage, Study, Volume

logger = logging.getLogger(__name__)

NIFTI1_MAGIC = b"n+1\x00"
_MAGIC_OFFSET = 344
_HEADER_SIZE = 348
_GZIP_MAGIC = b"\x1f\x8b"

# NIfTI-1 datatype codes accepted by the reader
SUPPORTED_DATATYPES = {4: "int16", 512: "uint16", 16: "float32", 64: "float64"}

RAW_SUFFIX = ".f32"
SIDECAR_SUFFIX = ".json"


def _raw_paths(path: Path) -> tuple[Path, Path]:
    base = path.with_suffix("") if path.suffix in (RAW_SUFFIX, SIDECAR_SUFFIX) else path
    return base.with_suffix(RAW_SUFFIX), base.with_suffix(SIDECAR_SUFFIX)


def _is_raw(path: Path) -> bool:
    return path.suffix in (RAW_SUFFIX, SIDECAR_SUFFIX)


def load_volume(path: str | Path) -> Volume:
    """Load a volume from NIfTI-1 or raw+JSON.

    Raises UnknownMagicError, UnsupportedDatatypeError or PayloadSizeError for
    malformed files, DataIOError when the file is missing.
    """
    path = Path(path)
    if _is_raw(path):
        return _load_raw(path)
    if not path.exists():
        raise DataIOError(f"volume not found: {path}")
    return _load_nifti(path.read_bytes(), origin=str(path))


def _load_raw(path: Path) -> Volume:
    payload_path, sidecar_path = _raw_paths(path)
    if not payload_path.exists() or not sidecar_path.exists():
        raise DataIOError(f"raw volume needs both {payload_path.name} and {sidecar_path.name}")

    try:
        header = json.loads(sidecar_path.read_text(encoding="utf-8"))
        dims = tuple(int(n) for n in header["dims"])
        spacing = tuple(float(s) for s in header["spacing"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise VolumeFormatError(f"bad raw sidecar {sidecar_path}: {e}") from e
    if len(dims) != 3 or len(spacing) != 3 or min(dims) < 1:
        raise VolumeFormatError(f"raw sidecar {sidecar_path} needs 3 positive dims and 3 spacings")

    payload = payload_path.read_bytes()
    expected = dims[0] * dims[1] * dims[2] * 4
    if len(payload) != expected:
        raise PayloadSizeError(
            f"{payload_path}: dims {dims} need {expected} bytes, payload has {len(payload)}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(dims, order="F")
    return Volume(voxels=data.astype(np.float64), spacing=spacing)


def _load_nifti(raw: bytes, origin: str) -> Volume:
    if raw[:2] == _GZIP_MAGIC:
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise VolumeFormatError(f"{origin}: corrupt gzip stream: {e}") from e

    if len(raw) < _HEADER_SIZE or raw[_MAGIC_OFFSET:_MAGIC_OFFSET + 4] != NIFTI1_MAGIC:
        raise UnknownMagicError(f"{origin}: not a single-file NIfTI-1 volume")

    header = nib.Nifti1Header.from_fileobj(io.BytesIO(raw), check=False)
    datatype = int(header["datatype"])
    if datatype not in SUPPORTED_DATATYPES:
        raise UnsupportedDatatypeError(f"{origin}: datatype code {datatype} is not supported")

    dim = [int(d) for d in header["dim"]]
    ndim = dim[0]
    if ndim < 3 or any(d != 1 for d in dim[4:ndim + 1]):
        raise VolumeFormatError(f"{origin}: expected a 3D volume, header dim={dim}")
    dims = (dim[1], dim[2], dim[3])
    if min(dims) < 1:
        raise VolumeFormatError(f"{origin}: non-positive dims {dims}")

    dtype = header.get_data_dtype()
    offset = int(header["vox_offset"])
    expected = dims[0] * dims[1] * dims[2] * dtype.itemsize
    if len(raw) - offset != expected:
        raise PayloadSizeError(
            f"{origin}: dims {dims} need {expected} payload bytes, file has {len(raw) - offset}"
        )

    data = np.frombuffer(raw, dtype=dtype, count=dims[0] * dims[1] * dims[2], offset=offset)
    voxels = data.reshape(dims, order="F").astype(np.float64)

    slope, inter = header.get_slope_inter()
    if slope is not None:
        voxels = voxels * slope + (inter or 0.0)

    spacing = tuple(float(z) for z in header.get_zooms()[:3])
    logger.debug("Loaded NIfTI %s dims=%s spacing=%s", origin, dims, spacing)
    return Volume(voxels=voxels, spacing=spacing)


def save_raw(volume: Volume, path: str | Path) -> Path:
    """Write a volume as raw float32 payload + JSON sidecar. Returns the payload path."""
    payload_path, sidecar_path = _raw_paths(Path(path))
    payload_path.parent.mkdir(parents=True, exist_ok=True)
    payload_path.write_bytes(volume.voxels.astype("<f4").tobytes(order="F"))
    sidecar = {"dims": list(volume.dims), "spacing": list(volume.spacing)}
    sidecar_path.write_text(json.dumps(sidecar) + "\n", encoding="utf-8")
    return payload_path


def load_mask(path: str | Path) -> RoiMask:
    """Load a mask volume; any nonzero voxel is in the ROI."""
    return RoiMask(flags=load_volume(path).voxels != 0)


def save_mask(mask: RoiMask, spacing: tuple[float, float, float], path: str | Path) -> Path:
    return save_raw(Volume(voxels=mask.flags.astype(np.float64), spacing=spacing), path)


def load_manifest(path: str | Path) -> list[Study]:
    """Read a cohort manifest.

    The manifest is a JSON array of
    {id, visit_time, label, sequences: {name: {volume: path, mask: path}}};
    relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    if not path.exists():
        raise DataIOError(f"manifest not found: {path}")
    try:
        entries = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"manifest {path} is not valid JSON: {e}") from e
    if not isinstance(entries, list) or not entries:
        raise ConfigError(f"manifest {path} must be a non-empty JSON array")

    root = path.parent
    studies: list[Study] = []
    for entry in entries:
        try:
            sequences = {
                name: SequenceImage(
                    volume=load_volume(root / files["volume"]),
                    mask=load_mask(root / files["mask"]),
                )
                for name, files in sorted(entry["sequences"].items())
            }
            studies.append(Study(
                patient_id=str(entry["id"]),
                visit_time=str(entry["visit_time"]),
                label=int(entry["label"]),
                sequences=sequences,
            ))
        except (KeyError, TypeError) as e:
            raise ConfigError(f"manifest entry {entry!r:.80} is malformed: {e}") from e
        except ValueError as e:
            raise ConfigError(f"manifest entry {entry.get('id')!r} is invalid: {e}") from e

    logger.info("Loaded manifest with %d studies: %s", len(studies), path)
    return studies
