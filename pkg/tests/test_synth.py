"""Synthesis tests: voxel phantoms and feature-space cohorts."""

from __future__ import annotations

import numpy as np
import pytest
from pydantic import ValidationError

from core.errors import ConfigError
from core.state import PhantomBatchConfig, PhantomSpec
from evaluation.roc import auc
from evaluation.split import select_rows, split_by_time
from imaging.io import load_manifest
from synth.cohorts import feature_names, informative_direction, make_cohort, make_cohorts
from synth.phantom import emit_phantoms, make_phantom
from tests.conftest import cohort_spec

SMALL_PHANTOM = PhantomSpec(dims=(12, 12, 8), center=(5.5, 5.5, 3.5), semi_axes=(4.0, 4.0, 2.5))


# --- Phantoms ---

def test_phantom_is_deterministic():
    spec = SMALL_PHANTOM.model_copy(update={"seed": 42, "label": 1})
    a_volume, a_mask, _ = make_phantom(spec)
    b_volume, b_mask, label = make_phantom(spec)
    assert label == 1
    assert np.array_equal(a_volume.voxels, b_volume.voxels)
    assert np.array_equal(a_mask.flags, b_mask.flags)


def test_noiseless_negative_phantom_is_flat():
    volume, mask, _ = make_phantom(SMALL_PHANTOM.model_copy(update={"noise_std": 0.0}))
    roi = volume.voxels[mask.flags]
    assert roi.var() == 0.0
    assert roi[0] == SMALL_PHANTOM.background


def test_positive_phantom_carries_the_lesion():
    spec = SMALL_PHANTOM.model_copy(update={"noise_std": 0.0, "label": 1})
    volume, mask, _ = make_phantom(spec)
    roi = volume.voxels[mask.flags]
    assert roi.max() == SMALL_PHANTOM.background + SMALL_PHANTOM.lesion_offset
    assert roi.min() == SMALL_PHANTOM.background


def test_ellipsoid_must_fit_the_grid():
    with pytest.raises(ValidationError):
        PhantomSpec(dims=(10, 10, 10), center=(5.0, 5.0, 5.0), semi_axes=(6.0, 2.0, 2.0))


def test_emitted_phantoms_form_a_manifest(tmp_path):
    config = PhantomBatchConfig(count=4, sequences=["T2W", "ADC"], template=SMALL_PHANTOM)
    manifest = emit_phantoms(config, seed=3, out_dir=tmp_path)
    studies = load_manifest(manifest)

    assert [s.patient_id for s in studies] == ["P0000", "P0001", "P0002", "P0003"]
    assert sorted(s.label for s in studies) == [0, 0, 1, 1]
    assert all(sorted(s.sequences) == ["ADC", "T2W"] for s in studies)
    first = studies[0].sequences["T2W"]
    assert first.volume.dims == (12, 12, 8)
    assert first.mask.voxel_count > 0


def test_emitted_phantoms_are_seeded(tmp_path):
    config = PhantomBatchConfig(count=2, template=SMALL_PHANTOM)
    a = load_manifest(emit_phantoms(config, seed=5, out_dir=tmp_path / "a"))
    b = load_manifest(emit_phantoms(config, seed=5, out_dir=tmp_path / "b"))
    c = load_manifest(emit_phantoms(config, seed=6, out_dir=tmp_path / "c"))
    assert np.array_equal(a[1].sequences["T2W"].volume.voxels, b[1].sequences["T2W"].volume.voxels)
    assert not np.array_equal(a[1].sequences["T2W"].volume.voxels, c[1].sequences["T2W"].volume.voxels)


# --- Cohorts ---

def test_cohort_size_balance_and_columns():
    table = make_cohort(cohort_spec("mixed_a", 90, 5, 0.3, 2), seed=7)
    assert len(table) == 90
    assert int(table["label"].sum()) == 45
    assert list(table.columns[:3]) == ["id", "visit_time", "label"]
    assert list(table.columns[3:]) == feature_names(12)
    assert table["id"].iloc[0] == "mixed_a-0000"
    assert table["visit_time"].is_monotonic_increasing


def test_feature_names_are_zero_padded():
    assert feature_names(40)[:2] == ["f000", "f001"]
    assert feature_names(1500)[-1] == "f1499"


def test_cohorts_are_seeded(small_experiment):
    a = make_cohorts(small_experiment, seed=7)
    b = make_cohorts(small_experiment, seed=7)
    c = make_cohorts(small_experiment, seed=8)
    assert list(a) == ["hard", "mixed_a", "mixed_b"]
    assert all(a[name].equals(b[name]) for name in a)
    assert not a["hard"].equals(c["hard"])


def test_shift_must_be_orthogonal():
    spec = cohort_spec("bad", 40, 0, 0.3, 1)
    with pytest.raises(ConfigError):
        make_cohort(spec, seed=1)


def test_all_hard_cohort_needs_enough_patients():
    with pytest.raises(ConfigError):
        make_cohort(cohort_spec("tiny", 7, 2, 1.0, 1), seed=1)


def test_shift_leaves_the_informative_projection_unchanged():
    spec = cohort_spec("mixed_a", 60, 5, 0.3, 2)
    shifted = make_cohort(spec, seed=4)
    plain = make_cohort(spec.model_copy(update={"nuisance_shift": []}), seed=4)
    u = informative_direction(spec)
    names = feature_names(spec.p)
    assert np.array_equal(shifted[names].to_numpy() @ u, plain[names].to_numpy() @ u)


def test_shift_is_class_associated_among_easy_patients_only():
    names = feature_names(12)
    shift_dir = np.zeros(12)
    shift_dir[5:7] = 1.0

    easy = make_cohort(cohort_spec("easy", 400, 5, 0.0, 1), seed=9)
    hard = make_cohort(cohort_spec("hard", 400, 5, 1.0, 1), seed=9)
    assert auc(easy[names].to_numpy() @ shift_dir, easy["label"]) > 0.9
    assert 0.35 < auc(hard[names].to_numpy() @ shift_dir, hard["label"]) < 0.65


def test_hard_patients_have_a_smaller_margin():
    names = feature_names(12)
    easy = make_cohort(cohort_spec("easy", 400, 5, 0.0, 1), seed=9)
    hard = make_cohort(cohort_spec("hard", 400, 5, 1.0, 1), seed=9)
    u = informative_direction(cohort_spec("easy", 400, 5, 0.0, 1))
    assert auc(hard[names].to_numpy() @ u, hard["label"]) < auc(easy[names].to_numpy() @ u, easy["label"])


def _oracle_auc(spec, seed: int, validation_only: bool = False) -> float:
    table = make_cohort(spec, seed)
    if validation_only:
        table = select_rows(table, split_by_time(table, 0.7).val_ids)
    return auc(table[feature_names(spec.p)].to_numpy() @ informative_direction(spec), table["label"])


def test_larger_margin_separates_better():
    means = []
    for delta in (0.5, 1.0, 2.0):
        spec = cohort_spec("mixed_a", 200, 5, 0.3, 2).model_copy(update={"delta": delta})
        means.append(np.mean([_oracle_auc(spec, seed) for seed in range(10)]))
    assert means[0] < means[1] < means[2]


def test_zero_margin_is_uninformative():
    spec = cohort_spec("mixed_a", 400, 5, 0.3, 2).model_copy(update={"delta": 0.0})
    mean_auc = np.mean([_oracle_auc(spec, seed, validation_only=True) for seed in range(10)])
    assert abs(mean_auc - 0.5) < 0.06


def test_large_lesion_offset_separates_phantoms_by_roi_mean():
    means, labels = [], []
    for k in range(100):
        spec = SMALL_PHANTOM.model_copy(update={"seed": k, "label": k % 2, "lesion_offset": 200.0})
        volume, mask, label = make_phantom(spec)
        means.append(volume.voxels[mask.flags].mean())
        labels.append(label)
    assert auc(np.array(means), np.array(labels)) >= 0.99
