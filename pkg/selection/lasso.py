"""L1-penalized logistic regression.

Minimizes (1/n) Σ log(1 + exp(-ỹᵢ(β0 + xᵢᵀβ))) + λ‖β‖₁ with an unpenalized
intercept. The solver is a proximal Newton method: each outer step builds
the quadratic (IRLS) model of the loss, solves the weighted lasso
subproblem by coordinate descent over an active set, and backtracks on the
true objective.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.special import expit

from core.errors import NumericDegeneracyError, SingleClassError

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-5
KKT_TOL = 1e-6
# outer stop also requires the certificate well inside KKT_TOL
KKT_STOP = 1e-8
INNER_TOL = 1e-10
MAX_INNER_SWEEPS = 10_000
ARMIJO = 1e-4


def _check_inputs(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X {X.shape} and y {y.shape} are not aligned")
    if not np.isfinite(X).all():
        raise NumericDegeneracyError("feature matrix contains non-finite values")
    classes = np.unique(y)
    if len(classes) != 2 or not np.array_equal(classes, [0, 1]):
        raise SingleClassError(f"labels must contain both classes 0 and 1, got {classes.tolist()}")


def logistic_loss(X: np.ndarray, y: np.ndarray, intercept: float, beta: np.ndarray) -> float:
    eta = intercept + X @ beta
    return float(np.mean(np.logaddexp(0.0, eta) - y * eta))


def objective(X: np.ndarray, y: np.ndarray, intercept: float, beta: np.ndarray, lam: float) -> float:
    return logistic_loss(X, y, intercept, beta) + lam * float(np.abs(beta).sum())


def smooth_gradient(X: np.ndarray, y: np.ndarray, intercept: float, beta: np.ndarray) -> tuple[float, np.ndarray]:
    """Gradient of the unpenalized loss with respect to (β0, β)."""
    resid = expit(intercept + X @ beta) - y
    n = len(y)
    return float(resid.sum() / n), X.T @ resid / n


def kkt_violation(X: np.ndarray, y: np.ndarray, intercept: float, beta: np.ndarray, lam: float) -> float:
    """Largest breach of the optimality conditions.

    |g0| = 0; |gⱼ| ≤ λ where βⱼ = 0; gⱼ = -λ·sign(βⱼ) where βⱼ ≠ 0.
    """
    g0, g = smooth_gradient(X, y, intercept, beta)
    zero = beta == 0
    breach_zero = np.maximum(np.abs(g[zero]) - lam, 0.0)
    breach_active = np.abs(g[~zero] + lam * np.sign(beta[~zero]))
    parts = [abs(g0)]
    if breach_zero.size:
        parts.append(float(breach_zero.max()))
    if breach_active.size:
        parts.append(float(breach_active.max()))
    return max(parts)


def lambda_max(X: np.ndarray, y: np.ndarray) -> float:
    """Smallest λ whose solution is the null model; 0 when X has no columns."""
    if X.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(X.T @ (y - y.mean()))) / len(y))


def lambda_grid(X: np.ndarray, y: np.ndarray, count: int = 100, ratio: float = 1e-3) -> np.ndarray:
    """Log-spaced descending grid from λ_max to ratio·λ_max."""
    if count < 2 or not 0 < ratio < 1:
        raise ValueError(f"need count >= 2 and 0 < ratio < 1, got {count}, {ratio}")
    top = lambda_max(X, y)
    if top == 0:
        raise NumericDegeneracyError("λ_max is 0: no feature correlates with the labels")
    grid = np.geomspace(top, top * ratio, count)
    grid[0] = top
    return grid


def null_model(y: np.ndarray, p: int) -> tuple[float, np.ndarray]:
    ybar = float(y.mean())
    return float(np.log(ybar / (1.0 - ybar))), np.zeros(p)


def _soft_threshold(u: float, t: float) -> float:
    if u > t:
        return u - t
    if u < -t:
        return u + t
    return 0.0


def _weighted_lasso(
    X: np.ndarray,
    z: np.ndarray,
    w: np.ndarray,
    lam: float,
    intercept: float,
    beta: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Coordinate descent on (1/2n) Σ wᵢ(zᵢ - β0 - xᵢᵀβ)² + λ‖β‖₁."""
    n = len(z)
    beta = beta.copy()
    resid = z - intercept - X @ beta
    w_sum = w.sum()
    curvature = (w[:, None] * X * X).sum(axis=0) / n
    active = np.flatnonzero(beta != 0).tolist()

    while True:
        for _ in range(MAX_INNER_SWEEPS):
            shift = float(w @ resid / w_sum)
            intercept += shift
            resid -= shift
            max_change = abs(shift)
            for j in active:
                if curvature[j] == 0:
                    continue
                old = beta[j]
                u = float(X[:, j] @ (w * resid)) / n + curvature[j] * old
                new = _soft_threshold(u, lam) / curvature[j]
                if new != old:
                    resid -= X[:, j] * (new - old)
                    beta[j] = new
                    max_change = max(max_change, abs(new - old))
            if max_change < INNER_TOL:
                break

        score = np.abs(X.T @ (w * resid)) / n
        score[active] = 0.0
        joining = np.flatnonzero(score > lam)
        if joining.size == 0:
            return intercept, beta
        active = sorted(set(active) | set(joining.tolist()))


def lasso_logistic_fit(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    *,
    tol: float = 1e-7,
    max_iter: int = 200,
    warm_start: tuple[float, np.ndarray] | None = None,
) -> tuple[float, np.ndarray]:
    """Fit (β0, β) at penalty `lam`.

    λ ≥ λ_max returns the exact null model β = 0, β0 = log(ȳ / (1 - ȳ)).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_inputs(X, y)
    if lam < 0:
        raise ValueError(f"λ must be non-negative, got {lam}")

    n, p = X.shape
    if lam >= lambda_max(X, y):
        return null_model(y, p)

    intercept, beta = warm_start if warm_start is not None else null_model(y, p)
    beta = np.array(beta, dtype=np.float64)
    current = objective(X, y, intercept, beta, lam)

    for iteration in range(1, max_iter + 1):
        eta = intercept + X @ beta
        prob = expit(eta)
        w = np.maximum(prob * (1.0 - prob), WEIGHT_FLOOR)
        z = eta + (y - prob) / w

        cand_b0, cand_beta = _weighted_lasso(X, z, w, lam, intercept, beta)
        d_b0 = cand_b0 - intercept
        d_beta = cand_beta - beta

        g0, g = smooth_gradient(X, y, intercept, beta)
        decrease = g0 * d_b0 + float(g @ d_beta) + lam * (np.abs(cand_beta).sum() - np.abs(beta).sum())

        step = 1.0
        while True:
            trial_b0 = intercept + step * d_b0
            trial_beta = beta + step * d_beta
            trial = objective(X, y, trial_b0, trial_beta, lam)
            if trial <= current + ARMIJO * step * min(decrease, 0.0) or step < 1e-10:
                break
            step *= 0.5

        change = max(abs(trial_b0 - intercept), float(np.max(np.abs(trial_beta - beta), initial=0.0)))
        if trial <= current:
            intercept, beta, current = trial_b0, trial_beta, trial

        if change < tol and kkt_violation(X, y, intercept, beta, lam) <= KKT_STOP:
            logger.debug("λ=%.4g converged in %d iterations, %d nonzero", lam, iteration, np.count_nonzero(beta))
            return intercept, beta

    logger.warning(
        "λ=%.4g reached max_iter=%d (KKT violation %.2e)",
        lam, max_iter, kkt_violation(X, y, intercept, beta, lam),
    )
    return intercept, beta


def lasso_path(
    X: np.ndarray,
    y: np.ndarray,
    lambdas: np.ndarray,
    *,
    tol: float = 1e-7,
    max_iter: int = 200,
) -> list[tuple[float, np.ndarray]]:
    """Fits along a descending grid, each warm-started from the previous one."""
    fits: list[tuple[float, np.ndarray]] = []
    warm: tuple[float, np.ndarray] | None = None
    for lam in lambdas:
        warm = lasso_logistic_fit(X, y, float(lam), tol=tol, max_iter=max_iter, warm_start=warm)
        fits.append(warm)
    return fits
