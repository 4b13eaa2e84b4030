"""Acceptance-scale checks over many seeded instances.

The heavier ones are marked `slow` and deselected by default; run them with
`pytest -m slow`.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from scipy.stats import norm

from config.settings import DEFAULT_EXPERIMENT_PATH
from core.runner import ExperimentRunner
from core.state import FeatureCatalogConfig, PhantomBatchConfig, PhantomSpec, PipelineConfig, RoiMask, Volume
from core.table import make_feature_table
from evaluation.delong import delong_paired
from evaluation.roc import auc, roc_points, trapezoid_area
from evaluation.split import select_rows, split_by_time
from evaluation.transfer import transfer_matrix
from features.extractor import extract_sequence
from features.gldm import gldm
from features.glcm import glcm
from features.glrlm import glrlm
from features.glszm import glszm
from features.ngtdm import ngtdm
from imaging.preprocessing import discretize
from selection.biomarker import build_biomarker, score
from selection.lasso import KKT_TOL, kkt_violation, lambda_grid, lasso_path
from synth.cohorts import make_cohorts
from tests.conftest import make_table

TEXTURE = (glcm, glrlm, glszm, ngtdm, gldm)


def stratified_bootstrap_p(scores_a, scores_b, labels, replicates: int, seed: int) -> float:
    """Two-sided p of AUC(a) - AUC(b) from a class-stratified bootstrap standard error."""
    labels = np.asarray(labels)

    def psi(scores):
        pos = scores[labels == 1][:, None]
        neg = scores[labels == 0][None, :]
        return (pos > neg) + 0.5 * (pos == neg)

    psi_a, psi_b = psi(np.asarray(scores_a)), psi(np.asarray(scores_b))
    m, n = psi_a.shape
    rng = np.random.default_rng(seed)
    pos_counts = rng.multinomial(m, np.full(m, 1.0 / m), size=replicates)
    neg_counts = rng.multinomial(n, np.full(n, 1.0 / n), size=replicates)

    diff = np.einsum("bi,ij,bj->b", pos_counts, psi_a - psi_b, neg_counts) / (m * n)
    observed = psi_a.mean() - psi_b.mean()
    return float(2.0 * norm.sf(abs(observed) / diff.std(ddof=1)))


def _paired_predictors(seed: int, n: int = 200):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    latent = labels * 0.8 + rng.normal(size=n)
    a = latent + 0.6 * rng.normal(size=n)
    b = 0.7 * latent + rng.uniform(0.3, 1.2) * rng.normal(size=n)
    return a, b, labels


# --- Fast property suites ---

def test_trapezoid_area_equals_mann_whitney():
    rng = np.random.default_rng(101)
    for _ in range(1000):
        n = int(rng.integers(2, 201))
        labels = rng.integers(0, 2, size=n)
        labels[:2] = [0, 1]
        scores = rng.integers(0, int(rng.integers(2, 30)), size=n).astype(float)
        fpr, tpr = roc_points(scores, labels)
        assert trapezoid_area(fpr, tpr) == pytest.approx(auc(scores, labels), abs=1e-12)


def test_negated_scores_flip_auc():
    rng = np.random.default_rng(102)
    for _ in range(100):
        n = int(rng.integers(4, 120))
        labels = rng.integers(0, 2, size=n)
        labels[:2] = [0, 1]
        scores = rng.normal(size=n).round(1)
        assert auc(-scores, labels) == pytest.approx(1.0 - auc(scores, labels), abs=1e-12)


def test_split_contract_on_random_cohorts():
    rng = np.random.default_rng(103)
    for trial in range(100):
        n = int(rng.integers(20, 300))
        days = rng.integers(0, 60, size=n)
        times = (pd.Timestamp("2019-01-01") + pd.to_timedelta(days, unit="D")).strftime("%Y-%m-%d").tolist()
        ids = [f"t{trial}-{k:03d}" for k in rng.permutation(n)]
        table = make_feature_table(ids, times, rng.integers(0, 2, size=n).tolist(), np.zeros((n, 1)), ["f0"])

        split = split_by_time(table, 0.7)
        assert len(split.train_ids) == int(np.floor(0.7 * n + 0.5))
        assert not set(split.train_ids) & set(split.val_ids)
        assert sorted(split.train_ids + split.val_ids) == sorted(ids)

        key = dict(zip(ids, zip(times, ids)))
        assert max(key[i] for i in split.train_ids) < min(key[i] for i in split.val_ids)


def test_binned_features_ignore_affine_intensity_changes():
    rng = np.random.default_rng(104)
    for _ in range(100):
        dims = tuple(int(d) for d in rng.integers(3, 7, size=3))
        voxels = rng.normal(50.0, 10.0, size=dims)
        flags = rng.random(dims) < 0.7
        flags[0, 0, 0] = flags[1, 0, 0] = True
        mask = RoiMask(flags=flags)
        scale, offset = float(rng.uniform(0.5, 3.0)), float(rng.uniform(-50, 50))

        base = discretize(Volume(voxels=voxels, spacing=(1.0, 1.0, 1.0)), mask, 8)
        moved = discretize(Volume(voxels=scale * voxels + offset, spacing=(1.0, 1.0, 1.0)), mask, 8)
        assert np.array_equal(base.grid, moved.grid)
        for family in TEXTURE:
            assert family(base).values == family(moved).values


# --- Slow acceptance experiments ---

@pytest.mark.slow
def test_delong_agrees_with_bootstrap():
    for seed in range(20):
        a, b, labels = _paired_predictors(seed)
        delong_p = delong_paired(a, b, labels).p
        boot_p = stratified_bootstrap_p(a, b, labels, replicates=10_000, seed=1000 + seed)
        assert abs(delong_p - boot_p) <= 0.02, seed


@pytest.mark.slow
def test_kkt_certificate_on_wide_problems():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(200, 500))
        y = (X[:, :5].sum(axis=1) + rng.normal(size=200) > 0).astype(float)
        X = (X - X.mean(axis=0)) / X.std(axis=0)
        grid = lambda_grid(X, y, count=100, ratio=1e-2)
        for lam, (b0, beta) in zip(grid, lasso_path(X, y, grid)):
            assert kkt_violation(X, y, b0, beta, lam) <= KKT_TOL, (seed, lam)


@pytest.mark.slow
def test_translation_invariance_trials():
    """Random boxes at random anisotropic spacing, default 1 mm resampling."""
    rng = np.random.default_rng(105)
    config = FeatureCatalogConfig(filters=["original"])
    for _ in range(100):
        dims = tuple(int(d) for d in rng.integers(6, 10, size=3))
        spacing = tuple(float(s) for s in rng.uniform(0.8, 2.0, size=3))
        voxels = rng.normal(100.0, 15.0, size=dims)
        lo = [int(rng.integers(1, d - 4)) for d in dims]
        hi = [int(rng.integers(l + 3, d)) for l, d in zip(lo, dims)]
        flags = np.zeros(dims, dtype=bool)
        flags[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = True

        offset = [int(o) for o in rng.integers(0, 4, size=3)]
        big_dims = tuple(d + 4 for d in dims)
        big_voxels = np.zeros(big_dims)
        big_flags = np.zeros(big_dims, dtype=bool)
        window = tuple(slice(o, o + d) for o, d in zip(offset, dims))
        big_voxels[window] = voxels
        big_flags[window] = flags

        base = extract_sequence("T2W", Volume(voxels=voxels, spacing=spacing), RoiMask(flags=flags), config)
        moved = extract_sequence("T2W", Volume(voxels=big_voxels, spacing=spacing), RoiMask(flags=big_flags), config)
        assert moved.values == pytest.approx(base.values, rel=1e-9, abs=1e-9)


@pytest.mark.slow
def test_scores_ignore_raw_feature_rescaling(fast_selection):
    rng = np.random.default_rng(106)
    for trial in range(100):
        y = np.arange(60) % 2
        X = rng.normal(size=(60, 5))
        X[:, 0] += 1.5 * (2 * y - 1)
        scale = rng.uniform(0.1, 10.0, size=5)
        shift = rng.uniform(-100, 100, size=5)

        table = make_table(X, y)
        rescaled = make_table(X * scale + shift, y)
        a, _ = build_biomarker(table, fast_selection, seed=trial, cohort_id="raw")
        b, _ = build_biomarker(rescaled, fast_selection, seed=trial, cohort_id="raw")
        assert score(b, rescaled) == pytest.approx(score(a, table), abs=1e-6)


@pytest.mark.slow
def test_hard_sample_biomarker_transfers_best():
    config = PipelineConfig.model_validate(json.loads(Path(DEFAULT_EXPERIMENT_PATH).read_text()))
    wins = 0
    for seed in range(10):
        cohorts = make_cohorts(config.simulation, seed)
        models, validation = {}, {}
        for name, table in cohorts.items():
            split = split_by_time(table, config.evaluation.split_ratio)
            models[name], _ = build_biomarker(select_rows(table, split.train_ids), config.selection, seed, name)
            validation[name] = select_rows(table, split.val_ids)
        matrix = transfer_matrix(models, validation, alpha=config.evaluation.alpha)

        off = {name: matrix.mean_off_diagonal(i) for i, name in enumerate(matrix.row_names)}
        if all(off["hard"] >= off[name] + 0.02 for name in off if name != "hard"):
            wins += 1
    assert wins >= 8


@pytest.mark.slow
def test_full_pipeline_is_byte_identical(tmp_path, pipeline_config):
    config = pipeline_config.model_copy(update={
        "phantoms": PhantomBatchConfig(
            count=4, template=PhantomSpec(dims=(12, 12, 8), center=(5.5, 5.5, 3.5), semi_axes=(4.0, 4.0, 2.5)),
        ),
    })
    ExperimentRunner().run(config, out_dir=tmp_path / "a")
    ExperimentRunner().run(config.model_copy(update={"workers": 3}), out_dir=tmp_path / "b")

    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert Path("phantoms/features.csv") in files
    for rel in files:
        if rel.name == "effective_config.json":
            continue
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel
