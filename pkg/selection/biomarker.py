"""Biomarker construction, scoring and persistence.

A biomarker is the sparse L1 logistic model fitted on one cohort's training
table; its signature is the model's predicted probability.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import expit

from core.errors import DataIOError, SingleClassError
from core.rng import seed_from_ids
from core.state import BiomarkerModel, CvCurve, Provenance, SelectionConfig, SelectionRule, Standardizer
from core.table import feature_columns, labels_of, require_columns, sort_by_id
from selection.cv import cv_select
from selection.lasso import lambda_grid, lambda_max, lasso_path, logistic_loss, null_model
from selection.standardizer import fit_standardizer, transform

logger = logging.getLogger(__name__)

MIN_PER_CLASS = 2


def config_hash(config: SelectionConfig) -> str:
    return hashlib.sha256(config.model_dump_json().encode("utf-8")).hexdigest()


def _require_classes(y: np.ndarray) -> None:
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if min(n_pos, n_neg) < MIN_PER_CLASS:
        raise SingleClassError(f"need >= {MIN_PER_CLASS} patients per class, got {n_neg} negative / {n_pos} positive")


def fit_at_lambda(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    grid: np.ndarray | None,
    config: SelectionConfig,
) -> tuple[float, np.ndarray]:
    """Final fit at `lam`, warm-started along the grid points above it."""
    lambdas = [float(g) for g in (grid if grid is not None else []) if g > lam] + [lam]
    return lasso_path(X, y, np.asarray(lambdas), tol=config.tol, max_iter=config.max_iter)[-1]


def assemble_model(
    standardizer: Standardizer,
    intercept: float,
    beta: np.ndarray,
    lam: float,
    provenance: Provenance,
) -> BiomarkerModel:
    """Keep the nonzero coefficients, in standardizer column order."""
    selected = np.flatnonzero(beta != 0)
    return BiomarkerModel(
        feature_names=[standardizer.feature_names[k] for k in selected],
        coefficients=[float(beta[k]) for k in selected],
        intercept=float(intercept),
        lambda_=float(lam),
        standardizer=standardizer,
        provenance=provenance.model_copy(update={"empty_selection": selected.size == 0}),
    )


def null_curve(X: np.ndarray, y: np.ndarray, rule: SelectionRule) -> CvCurve:
    """One-point curve at λ = 0 for a table with no usable signal."""
    intercept, beta = null_model(y, X.shape[1])
    loss = logistic_loss(X, y, intercept, beta)
    return CvCurve(
        lambdas=[0.0], mean_loss=[loss], se_loss=[0.0], rule=rule,
        lambda_min=0.0, lambda_1se=0.0, chosen_lambda=0.0,
    )


def build_biomarker(
    table: pd.DataFrame,
    config: SelectionConfig,
    seed: int,
    cohort_id: str,
    workers: int = 1,
) -> tuple[BiomarkerModel, CvCurve]:
    """Standardize, cross-validate λ, refit on the full table, keep nonzero features.

    Rows are put in id order first, and fold assignment is seeded from the
    sorted ids, so the model does not depend on input row order. A table
    whose features are all constant, or uncorrelated with the labels, yields
    the intercept-only model with `empty_selection` set.
    """
    table = sort_by_id(table)
    y = labels_of(table).astype(np.float64)
    _require_classes(y)
    ids = table["id"].tolist()
    names = feature_columns(table)

    standardizer = fit_standardizer(table, names)
    X = transform(standardizer, table)
    fold_seed = seed_from_ids(seed, ids)
    provenance = Provenance(
        cohort_id=cohort_id,
        config_hash=config_hash(config),
        seed=seed,
        fold_seed=fold_seed,
        n_train=len(table),
        n_features_in=len(names),
        empty_selection=False,
    )

    if lambda_max(X, y) == 0:
        logger.warning(
            "[%s] no usable feature (%d of %d constant); keeping the intercept-only model",
            cohort_id, len(standardizer.dropped), len(names),
        )
        intercept, beta = null_model(y, X.shape[1])
        return assemble_model(standardizer, intercept, beta, 0.0, provenance), null_curve(X, y, config.rule)

    grid = lambda_grid(X, y, config.grid_size, config.grid_ratio)
    curve = cv_select(
        X, y, config.folds, grid, config.rule, fold_seed,
        tol=config.tol, max_iter=config.max_iter, workers=workers,
    )

    lam = max(curve.chosen_lambda, config.lambda_floor)
    intercept, beta = fit_at_lambda(X, y, lam, grid, config)

    model = assemble_model(standardizer, intercept, beta, lam, provenance)
    logger.info(
        "[%s] biomarker: %d of %d features selected at λ=%.4g",
        cohort_id, len(model.feature_names), len(names), lam,
    )
    return model, curve


def linear_predictor(model: BiomarkerModel, table: pd.DataFrame) -> np.ndarray:
    require_columns(table, model.feature_names)
    if not model.feature_names:
        return np.full(len(table), model.intercept)
    x = transform(model.standardizer, table, model.feature_names)
    return model.intercept + x @ np.asarray(model.coefficients, dtype=np.float64)


def score(model: BiomarkerModel, table: pd.DataFrame) -> np.ndarray:
    """Per-patient signature sigmoid(β0 + x̃ᵀβ) with the model's training statistics."""
    return expit(linear_predictor(model, table))


def save_model(model: BiomarkerModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(by_alias=True, indent=2) + "\n", encoding="utf-8")
    logger.info("Saved model: %s", path)
    return path


def load_model(path: str | Path) -> BiomarkerModel:
    path = Path(path)
    if not path.exists():
        raise DataIOError(f"model not found: {path}")
    return BiomarkerModel.model_validate_json(path.read_text(encoding="utf-8"))
