"""Cross-cohort transfer matrix of biomarker AUCs with paired DeLong tests.

Rows are biomarkers (named by their source cohort), columns are validation
cohorts. Within a column every biomarker is scored on the same patients, so
the pairwise comparisons are paired.
"""

from __future__ import annotations

import itertools
import logging

import numpy as np
import pandas as pd

from core.errors import FeatureMismatchError
from core.state import BiomarkerModel, PairwiseComparison, Provenance, SelectionConfig, TransferMatrix
from core.table import labels_of, require_columns, sort_by_id
from evaluation.delong import compare_or_degenerate
from evaluation.roc import auc, roc_points
from selection.biomarker import assemble_model, config_hash, fit_at_lambda, score
from selection.lasso import null_model
from selection.standardizer import fit_standardizer, transform

logger = logging.getLogger(__name__)


def _validate_inputs(models: dict[str, BiomarkerModel], cohorts: dict[str, pd.DataFrame]) -> None:
    for name, model in models.items():
        for cohort, table in cohorts.items():
            try:
                require_columns(table, model.feature_names)
            except FeatureMismatchError as e:
                raise FeatureMismatchError(f"biomarker {name} on cohort {cohort}: {e}") from e


def transfer_matrix(
    models: dict[str, BiomarkerModel],
    cohorts: dict[str, pd.DataFrame],
    alpha: float = 0.05,
    trained_on: str | None = None,
) -> TransferMatrix:
    """AUC of every biomarker on every validation table, plus per-column pairwise DeLong tests."""
    _validate_inputs(models, cohorts)
    rows = list(models)
    cols = list(cohorts)

    aucs = [[0.0] * len(cols) for _ in rows]
    comparisons: list[PairwiseComparison] = []
    for j, col in enumerate(cols):
        table = cohorts[col]
        labels = labels_of(table)
        scores = {name: score(models[name], table) for name in rows}
        for i, name in enumerate(rows):
            aucs[i][j] = auc(scores[name], labels)
            logger.info("AUC %s -> %s = %.4f", name, col, aucs[i][j])
        for a, b in itertools.combinations(rows, 2):
            result = compare_or_degenerate(scores[a], scores[b], labels)
            comparisons.append(PairwiseComparison(
                column=col, model_a=a, model_b=b, result=result,
                significant=(not result.degenerate) and result.p < alpha,
            ))

    return TransferMatrix(
        row_names=rows, column_names=cols, aucs=aucs,
        comparisons=comparisons, alpha=alpha, trained_on=trained_on,
    )


def refit_biomarker(
    model: BiomarkerModel,
    train_table: pd.DataFrame,
    config: SelectionConfig,
    cohort_id: str,
) -> BiomarkerModel:
    """Refit a biomarker's feature set on another training table at the biomarker's own λ.

    Only the biomarker's selected features enter the fit; the standardizer is
    fitted on the new table.
    """
    table = sort_by_id(train_table)
    y = labels_of(table).astype(np.float64)
    names = list(model.feature_names)
    require_columns(table, names)

    standardizer = fit_standardizer(table, names)
    provenance = Provenance(
        cohort_id=cohort_id,
        config_hash=config_hash(config),
        seed=model.provenance.seed,
        fold_seed=model.provenance.fold_seed,
        n_train=len(table),
        n_features_in=len(names),
        empty_selection=False,
    )
    if not standardizer.feature_names:
        intercept, beta = null_model(y, 0)
        return assemble_model(standardizer, intercept, beta, model.lambda_, provenance)

    X = transform(standardizer, table)
    intercept, beta = fit_at_lambda(X, y, model.lambda_, None, config)
    return assemble_model(standardizer, intercept, beta, model.lambda_, provenance)


def refit_transfer_matrix(
    models: dict[str, BiomarkerModel],
    train_table: pd.DataFrame,
    train_name: str,
    cohorts: dict[str, pd.DataFrame],
    config: SelectionConfig,
    alpha: float = 0.05,
) -> TransferMatrix:
    """Transfer matrix of the biomarker feature sets, all refitted on one training table."""
    refitted = {
        name: refit_biomarker(model, train_table, config, cohort_id=f"{name}@{train_name}")
        for name, model in models.items()
    }
    return transfer_matrix(refitted, cohorts, alpha=alpha, trained_on=train_name)


def roc_table(models: dict[str, BiomarkerModel], cohorts: dict[str, pd.DataFrame]) -> pd.DataFrame:
    """Long-format ROC points (model, cohort, fpr, tpr) for external plotting."""
    frames = []
    for col, table in cohorts.items():
        labels = labels_of(table)
        for name, model in models.items():
            fpr, tpr = roc_points(score(model, table), labels)
            frames.append(pd.DataFrame({"model": name, "cohort": col, "fpr": fpr, "tpr": tpr}))
    return pd.concat(frames, ignore_index=True)
