"""Feature catalog expansion and per-study extraction.

Feature names are `<sequence>__<filter>__<class>__<feature>`. Sequences are
taken in sorted order; within a sequence the shape block comes first, then
one block per filter image (original, then wavelet sub-bands LLL..HHH), each
holding the enabled classes in catalog order with features sorted by name.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
import pandas as pd

from core.errors import ConfigError, RadiomicsError
from core.state import (
    FEATURE_CLASSES,
    SHAPE_CLASS,
    DiscretizedRoi,
    FeatureCatalogConfig,
    FeatureVector,
    RoiMask,
    Study,
    Volume,
)
from core.table import make_feature_table
from features import first_order as first_order_mod
from features import gldm as gldm_mod
from features import glcm as glcm_mod
from features import glrlm as glrlm_mod
from features import glszm as glszm_mod
from features import ngtdm as ngtdm_mod
from features import shape as shape_mod
from features.wavelet import SUBBANDS, wavelet_subbands
from imaging.preprocessing import crop_to_roi, discretize, resample

logger = logging.getLogger(__name__)

CLASS_FEATURES: dict[str, tuple[str, ...]] = {
    SHAPE_CLASS: shape_mod.FEATURE_NAMES,
    "first_order": first_order_mod.FEATURE_NAMES,
    "glcm": glcm_mod.FEATURE_NAMES,
    "glrlm": glrlm_mod.FEATURE_NAMES,
    "glszm": glszm_mod.FEATURE_NAMES,
    "ngtdm": ngtdm_mod.FEATURE_NAMES,
    "gldm": gldm_mod.FEATURE_NAMES,
}

TEXTURE_CLASSES: dict[str, Callable[[DiscretizedRoi], FeatureVector]] = {
    "glcm": glcm_mod.glcm,
    "glrlm": glrlm_mod.glrlm,
    "glszm": glszm_mod.glszm,
    "ngtdm": ngtdm_mod.ngtdm,
    "gldm": gldm_mod.gldm,
}


def filter_names(config: FeatureCatalogConfig) -> list[str]:
    names: list[str] = []
    if "original" in config.filters:
        names.append("original")
    if "wavelet" in config.filters:
        names.extend(f"wavelet-{band}" for band in SUBBANDS)
    return names


def _enabled_classes(config: FeatureCatalogConfig) -> list[str]:
    return [c for c in FEATURE_CLASSES if c in config.classes]


def catalog_names(config: FeatureCatalogConfig, sequences: list[str]) -> list[str]:
    """Ordered feature names for the given sequences, without touching voxels."""
    names: list[str] = []
    for seq in sorted(sequences):
        if SHAPE_CLASS in config.classes:
            names.extend(f"{seq}__original__{SHAPE_CLASS}__{f}" for f in CLASS_FEATURES[SHAPE_CLASS])
        for filt in filter_names(config):
            for cls in _enabled_classes(config):
                names.extend(f"{seq}__{filt}__{cls}__{f}" for f in CLASS_FEATURES[cls])
    return names


def _filter_images(volume: Volume, config: FeatureCatalogConfig) -> list[tuple[str, Volume]]:
    images: list[tuple[str, Volume]] = []
    if "original" in config.filters:
        images.append(("original", volume))
    if "wavelet" in config.filters:
        bands = wavelet_subbands(volume, config.wavelet_level)
        images.extend((f"wavelet-{band}", bands[band]) for band in SUBBANDS)
    return images


def _image_features(image: Volume, mask: RoiMask, config: FeatureCatalogConfig) -> FeatureVector:
    blocks: list[FeatureVector] = []
    droi: DiscretizedRoi | None = None
    for cls in _enabled_classes(config):
        if cls == "first_order":
            block = first_order_mod.first_order(image, mask, config.bin_count)
        else:
            if droi is None:
                droi = discretize(image, mask, config.bin_count)
            block = TEXTURE_CLASSES[cls](droi)
        blocks.append(block.prefixed(cls))
    return FeatureVector.concat(blocks)


def extract_sequence(seq: str, volume: Volume, mask: RoiMask, config: FeatureCatalogConfig) -> FeatureVector:
    """All catalog features of one sequence, names prefixed with the sequence."""
    blocks: list[FeatureVector] = []
    filt = "original"
    try:
        if SHAPE_CLASS in config.classes:
            blocks.append(shape_mod.shape(mask, volume.spacing).prefixed(f"original__{SHAPE_CLASS}"))

        # resampling grid is anchored at the crop origin, not the volume origin
        volume, mask = crop_to_roi(volume, mask, config.crop_margin)
        if config.resample_spacing is not None:
            volume, mask = resample(volume, mask, config.resample_spacing)
            volume, mask = crop_to_roi(volume, mask, config.crop_margin)

        for filt, image in _filter_images(volume, config):
            blocks.append(_image_features(image, mask, config).prefixed(filt))
    except RadiomicsError as e:
        raise type(e)(f"[{seq}/{filt}] {e}") from e
    return FeatureVector.concat(blocks).prefixed(seq)


def extract_study(study: Study, config: FeatureCatalogConfig) -> FeatureVector:
    """Feature vector of one study in catalog order."""
    blocks = [
        extract_sequence(seq, study.sequences[seq].volume, study.sequences[seq].mask, config)
        for seq in sorted(study.sequences)
    ]
    vector = FeatureVector.concat(blocks)
    expected = catalog_names(config, list(study.sequences))
    if vector.names != expected:
        raise AssertionError(f"extracted names diverge from the catalog for study {study.patient_id}")
    logger.info("Extracted %d features for study %s", len(vector), study.patient_id)
    return vector


def _extract_logged(study: Study, config: FeatureCatalogConfig) -> FeatureVector:
    try:
        return extract_study(study, config)
    except RadiomicsError as e:
        logger.error("Study %s failed: %s", study.patient_id, e)
        raise


def extract_cohort(studies: list[Study], config: FeatureCatalogConfig, workers: int = 1) -> pd.DataFrame:
    """Feature table for a list of studies; rows follow the input order.

    Every study must carry the same sequence names.
    """
    if not studies:
        raise ConfigError("no studies to extract")
    sequence_sets = {tuple(sorted(s.sequences)) for s in studies}
    if len(sequence_sets) != 1:
        raise ConfigError(f"studies carry different sequence sets: {sorted(sequence_sets)}")

    names = catalog_names(config, list(studies[0].sequences))
    logger.info("Catalog has %d features for sequences %s", len(names), sorted(studies[0].sequences))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        vectors = list(pool.map(lambda s: _extract_logged(s, config), studies))

    features = np.array([v.values for v in vectors], dtype=np.float64).reshape(len(studies), len(names))
    return make_feature_table(
        ids=[s.patient_id for s in studies],
        visit_times=[s.visit_time for s in studies],
        labels=[s.label for s in studies],
        features=features,
        feature_names=names,
    )
