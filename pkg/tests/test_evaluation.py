"""Evaluation tests: AUC and ROC, paired DeLong, time split and the transfer matrix."""

from __future__ import annotations

import numpy as np
import pytest

from core.errors import (
    CohortTooSmallError,
    ConfigError,
    DegenerateComparisonError,
    FeatureMismatchError,
    SingleClassError,
)
from core.state import BiomarkerModel, Provenance, SelectionConfig, Standardizer
from core.table import make_feature_table
from evaluation.delong import compare_or_degenerate, delong_paired
from evaluation.roc import auc, roc_analysis, roc_points, structural_components, trapezoid_area
from evaluation.split import select_rows, split_by_time
from evaluation.transfer import refit_biomarker, refit_transfer_matrix, roc_table, transfer_matrix
from tests.conftest import make_table


def _table_with_times(times, labels, ids=None):
    ids = ids or [f"p{i:02d}" for i in range(len(times))]
    return make_feature_table(ids, times, labels, np.zeros((len(ids), 1)), ["f0"])


def _model(name: str, weights: dict[str, float], lam: float = 0.01) -> BiomarkerModel:
    names = sorted(weights)
    return BiomarkerModel(
        feature_names=names,
        coefficients=[weights[n] for n in names],
        intercept=0.0,
        lambda_=lam,
        standardizer=Standardizer(feature_names=names, means=[0.0] * len(names), stds=[1.0] * len(names)),
        provenance=Provenance(
            cohort_id=name, config_hash="0" * 64, seed=0, fold_seed=0,
            n_train=10, n_features_in=len(names), empty_selection=False,
        ),
    )


def _cohort(rng, n=200, shift=2.0, prefix="p"):
    y = np.arange(n) % 2
    X = rng.normal(size=(n, 2))
    X[:, 0] += shift * (2 * y - 1)
    return make_table(X, y, prefix=prefix)


def _quadratic_components(pos, neg):
    def psi(a, b):
        return 1.0 if a > b else 0.5 if a == b else 0.0
    v10 = np.array([np.mean([psi(p, q) for q in neg]) for p in pos])
    v01 = np.array([np.mean([psi(p, q) for p in pos]) for q in neg])
    return v10, v01


# --- AUC / ROC ---

def test_auc_example():
    assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75


def test_auc_extremes():
    assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0
    assert auc([0.3] * 6, [0, 1, 0, 1, 0, 1]) == 0.5


def test_auc_of_negated_scores(rng):
    scores = rng.integers(0, 5, size=40).astype(float)
    labels = np.arange(40) % 2
    assert auc(-scores, labels) == pytest.approx(1.0 - auc(scores, labels))


def test_roc_trapezoid_equals_auc_with_ties(rng):
    scores = rng.integers(0, 6, size=50).astype(float)
    labels = (rng.random(50) < 0.4).astype(int)
    labels[:2] = [0, 1]
    fpr, tpr = roc_points(scores, labels)
    assert (fpr[0], tpr[0]) == (0.0, 0.0)
    assert (fpr[-1], tpr[-1]) == (1.0, 1.0)
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)
    assert trapezoid_area(fpr, tpr) == pytest.approx(auc(scores, labels), abs=1e-12)


def test_auc_single_class():
    with pytest.raises(SingleClassError):
        auc([0.1, 0.2], [1, 1])


def test_structural_components_match_quadratic_oracle(rng):
    pos = rng.integers(0, 8, size=13).astype(float)
    neg = rng.integers(0, 8, size=17).astype(float)
    v10, v01 = structural_components(pos, neg)
    ref10, ref01 = _quadratic_components(pos, neg)
    assert v10 == pytest.approx(ref10, abs=1e-12)
    assert v01 == pytest.approx(ref01, abs=1e-12)
    analysis = roc_analysis(np.r_[pos, neg], np.r_[np.ones(13), np.zeros(17)])
    assert analysis.auc == pytest.approx(v10.mean())
    assert analysis.auc == pytest.approx(v01.mean())


# --- DeLong ---

def test_delong_matches_quadratic_variance(rng):
    labels = np.r_[np.ones(15), np.zeros(20)].astype(int)
    a = rng.normal(size=35) + labels
    b = rng.normal(size=35) + 0.3 * labels
    result = delong_paired(a, b, labels)

    pa, na = _quadratic_components(a[labels == 1], a[labels == 0])
    pb, nb = _quadratic_components(b[labels == 1], b[labels == 0])
    variance = np.var(pa - pb, ddof=1) / 15 + np.var(na - nb, ddof=1) / 20
    assert result.variance == pytest.approx(variance, rel=1e-12)
    assert result.difference == pytest.approx(pa.mean() - pb.mean(), abs=1e-12)
    assert result.z == pytest.approx(result.difference / np.sqrt(variance))


def test_delong_is_antisymmetric(rng):
    labels = np.arange(40) % 2
    a = rng.normal(size=40) + labels
    b = rng.normal(size=40)
    ab = delong_paired(a, b, labels)
    ba = delong_paired(b, a, labels)
    assert ab.difference == -ba.difference
    assert ab.z == pytest.approx(-ba.z)
    assert ab.p == pytest.approx(ba.p)
    assert ab.variance == pytest.approx(ba.variance)


def test_delong_rank_identical_scores_are_degenerate(rng):
    labels = np.arange(30) % 2
    a = rng.normal(size=30) + labels
    with pytest.raises(DegenerateComparisonError):
        delong_paired(a, a + 100.0, labels)

    result = compare_or_degenerate(a, a + 100.0, labels)
    assert result.degenerate
    assert (result.z, result.p, result.difference) == (0.0, 1.0, 0.0)


def test_delong_needs_two_per_class():
    with pytest.raises(DegenerateComparisonError):
        delong_paired([0.1, 0.9, 0.5], [0.2, 0.8, 0.4], [0, 1, 0])


# --- Split ---

def test_split_ten_patients():
    table = make_table(np.zeros((10, 1)), np.arange(10) % 2)
    split = split_by_time(table, 0.7)
    assert split.train_ids == [f"p{i:03d}" for i in range(7)]
    assert split.val_ids == [f"p{i:03d}" for i in range(7, 10)]


def test_split_large_cohort_sizes():
    table = make_table(np.zeros((574, 1)), np.arange(574) % 2)
    split = split_by_time(table, 0.7)
    assert (len(split.train_ids), len(split.val_ids)) == (402, 172)


def test_split_rounds_halves_up():
    table = make_table(np.zeros((7, 1)), np.arange(7) % 2)
    assert len(split_by_time(table, 0.5).train_ids) == 4


def test_split_ties_broken_by_id():
    table = _table_with_times(
        ["2021-01-02", "2021-01-01", "2021-01-01", "2021-01-03", "2021-01-01"],
        [0, 1, 0, 1, 1],
        ids=["e", "c", "a", "b", "d"],
    )
    split = split_by_time(table, 0.6)
    assert split.ordered_ids == ["a", "c", "d", "e", "b"]
    assert split.train_ids == ["a", "c", "d"]


def test_split_ignores_row_order(rng):
    table = make_table(rng.normal(size=(30, 2)), np.arange(30) % 2)
    shuffled = table.sample(frac=1.0, random_state=9)
    assert split_by_time(table) == split_by_time(shuffled)


def test_split_errors():
    with pytest.raises(ConfigError):
        split_by_time(make_table(np.zeros((10, 1)), np.arange(10) % 2), 1.0)
    with pytest.raises(CohortTooSmallError):
        split_by_time(make_table(np.zeros((3, 1)), [0, 1, 0]))
    with pytest.raises(SingleClassError):
        split_by_time(make_table(np.zeros((10, 1)), [1] * 7 + [0] * 3))
    with pytest.raises(ConfigError):
        split_by_time(_table_with_times(["2021-01-01"] * 4, [0, 1, 0, 1], ids=["a", "a", "b", "c"]))


def test_select_rows_follows_id_order(rng):
    table = make_table(rng.normal(size=(5, 1)), [0, 1, 0, 1, 0])
    picked = select_rows(table, ["p003", "p000"])
    assert picked["id"].tolist() == ["p003", "p000"]
    assert picked["f0"].tolist() == [table["f0"][3], table["f0"][0]]


# --- Transfer ---

def test_transfer_matrix_shape_and_significance(rng):
    informative = _model("a", {"f0": 1.0})
    noise = _model("b", {"f1": 1.0})
    cohorts = {"a": _cohort(rng, prefix="a"), "b": _cohort(rng, prefix="b")}
    matrix = transfer_matrix({"a": informative, "b": noise}, cohorts, alpha=0.05)

    assert matrix.row_names == ["a", "b"]
    assert matrix.column_names == ["a", "b"]
    assert all(a > 0.85 for a in matrix.aucs[0])
    assert len(matrix.comparisons) == 2
    assert all(c.significant and c.result.difference > 0 for c in matrix.comparisons)
    assert matrix.mean_off_diagonal(0) == matrix.aucs[0][1]


def test_identical_biomarkers_give_degenerate_comparisons(rng):
    model = _model("a", {"f0": 1.0})
    twin = _model("b", {"f0": 2.5})
    matrix = transfer_matrix({"a": model, "b": twin}, {"c": _cohort(rng)})
    [comparison] = matrix.comparisons
    assert comparison.result.degenerate
    assert not comparison.significant
    assert matrix.aucs[0] == matrix.aucs[1]


def test_transfer_missing_feature(rng):
    model = _model("a", {"f7": 1.0})
    with pytest.raises(FeatureMismatchError, match="biomarker a on cohort c"):
        transfer_matrix({"a": model}, {"c": _cohort(rng)})


def test_mean_off_diagonal_without_own_column(rng):
    matrix = transfer_matrix({"a": _model("a", {"f0": 1.0})}, {"x": _cohort(rng), "y": _cohort(rng)})
    assert matrix.mean_off_diagonal(0) == pytest.approx(np.mean(matrix.aucs[0]))


def test_refit_keeps_feature_set_and_lambda(rng):
    model = _model("a", {"f0": 0.4, "f1": 0.1}, lam=0.02)
    refit = refit_biomarker(model, _cohort(rng, prefix="t"), SelectionConfig(), cohort_id="a@t")
    assert set(refit.feature_names) <= {"f0", "f1"}
    assert "f0" in refit.feature_names
    assert refit.lambda_ == 0.02
    assert refit.provenance.cohort_id == "a@t"


def test_refit_transfer_matrix(rng):
    models = {"a": _model("a", {"f0": 1.0}), "b": _model("b", {"f1": 1.0})}
    cohorts = {"a": _cohort(rng, prefix="a"), "b": _cohort(rng, prefix="b")}
    matrix = refit_transfer_matrix(models, _cohort(rng, prefix="t"), "t", cohorts, SelectionConfig())
    assert matrix.trained_on == "t"
    assert matrix.row_names == ["a", "b"]
    assert all(a > 0.85 for a in matrix.aucs[0])


def test_roc_table_long_format(rng):
    frame = roc_table({"a": _model("a", {"f0": 1.0})}, {"x": _cohort(rng, n=20)})
    assert list(frame.columns) == ["model", "cohort", "fpr", "tpr"]
    assert frame["fpr"].iloc[0] == 0.0 and frame["tpr"].iloc[-1] == 1.0
