"""Stratified k-fold selection of the L1 penalty."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from core.errors import FoldStratificationError
from core.rng import stream
from core.state import CvCurve, SelectionRule
from selection.lasso import lasso_path, logistic_loss

logger = logging.getLogger(__name__)


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Fold index per row: each class is shuffled with the seed and dealt round-robin."""
    rng = stream(seed, "cv-folds")
    assignment = np.empty(len(y), dtype=np.int64)
    start = 0
    for cls in (0, 1):
        members = rng.permutation(np.flatnonzero(y == cls))
        assignment[members] = (start + np.arange(len(members))) % folds
        start = (start + len(members)) % folds

    for k in range(folds):
        held = y[assignment == k]
        kept = y[assignment != k]
        if len(np.unique(held)) < 2 or len(np.unique(kept)) < 2:
            raise FoldStratificationError(
                f"fold {k} of {folds} lacks a class (n0={int((y == 0).sum())}, n1={int((y == 1).sum())})"
            )
    return assignment


def _fold_losses(
    X: np.ndarray, y: np.ndarray, assignment: np.ndarray, k: int, grid: np.ndarray, tol: float, max_iter: int,
) -> np.ndarray:
    train = assignment != k
    held = ~train
    fits = lasso_path(X[train], y[train], grid, tol=tol, max_iter=max_iter)
    return np.array([logistic_loss(X[held], y[held], b0, beta) for b0, beta in fits])


def choose_lambda(grid: np.ndarray, mean_loss: np.ndarray, se_loss: np.ndarray, rule: SelectionRule) -> tuple[float, float, float]:
    """(λ_min, λ_1se, chosen) for a descending grid."""
    best = int(np.argmin(mean_loss))
    threshold = mean_loss[best] + se_loss[best]
    one_se = int(np.flatnonzero(mean_loss <= threshold)[0])
    lam_min = float(grid[best])
    lam_1se = float(grid[one_se])
    return lam_min, lam_1se, lam_1se if rule == SelectionRule.ONE_SE else lam_min


def cv_select(
    X: np.ndarray,
    y: np.ndarray,
    folds: int,
    grid: np.ndarray,
    rule: SelectionRule,
    seed: int,
    *,
    tol: float = 1e-7,
    max_iter: int = 200,
    workers: int = 1,
) -> CvCurve:
    """Cross-validated mean log-loss along `grid`; folds are reduced in index order."""
    y = np.asarray(y, dtype=np.float64)
    assignment = stratified_folds(y, folds, seed)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        losses = np.array(list(pool.map(
            lambda k: _fold_losses(X, y, assignment, k, grid, tol, max_iter), range(folds),
        )))

    mean_loss = losses.mean(axis=0)
    se_loss = losses.std(axis=0, ddof=1) / np.sqrt(folds)
    lam_min, lam_1se, chosen = choose_lambda(grid, mean_loss, se_loss, rule)
    logger.info("CV (%d folds, %s): λ_min=%.4g λ_1se=%.4g chosen=%.4g", folds, rule.value, lam_min, lam_1se, chosen)

    return CvCurve(
        lambdas=[float(g) for g in grid],
        mean_loss=mean_loss.tolist(),
        se_loss=se_loss.tolist(),
        rule=rule,
        lambda_min=lam_min,
        lambda_1se=lam_1se,
        chosen_lambda=chosen,
    )
