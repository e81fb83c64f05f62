"""
Node-wise Lasso on the np correlated row samples.

For target column j the covariates are scaled by D_j^{-1/2}, the scaled
problem is solved by cyclic coordinate descent on its Gram matrix, and the
result is mapped back: beta_j = D_j^{-1/2} alpha_j.

Objective divisor is np while psi_hat uses (n-1)p; both are kept as stated
by the method.
"""
from typing import Optional

import numpy as np
from loguru import logger

from kronfdr.config import settings
from kronfdr.errors import ConvergenceError, DegenerateDataError
from kronfdr.models.matrices import CoefficientSet, Dataset, LassoFit, RowCovariance, RowView
from kronfdr.models.schemas import LassoConfig


def extract_row_samples(d: Dataset) -> RowView:
    """Z = [(X^(1))' - Xbar', ..., (X^(n))' - Xbar'], shape q x (n*p)."""
    z = d.centered().reshape(d.n * d.p, d.q).T
    return RowView(z=np.ascontiguousarray(z), n=d.n, p=d.p, q=d.q)


def row_covariance(v: RowView) -> RowCovariance:
    psi_hat = (v.z @ v.z.T) / ((v.n - 1) * v.p)
    psi_hat = (psi_hat + psi_hat.T) / 2.0
    diag = np.diag(psi_hat)
    bad = np.flatnonzero(diag <= settings.R_DIAG_FLOOR)
    if bad.size:
        raise DegenerateDataError(f"Column {int(bad[0])} has zero sample variance", index=int(bad[0]))
    return RowCovariance(psi_hat=psi_hat, n=v.n, p=v.p)


def penalty(cov: RowCovariance, j: int, delta: float, q: int) -> float:
    """theta_nj(delta) = delta * sqrt(psi_jj * log max(q, np) / np)."""
    np_ = cov.n * cov.p
    return float(delta * np.sqrt(cov.psi_hat[j, j] * np.log(max(q, np_)) / np_))


def kkt_residual(alpha: np.ndarray, grad: np.ndarray, theta: float) -> float:
    """Largest violation of the Lasso subgradient conditions."""
    if alpha.size == 0:
        return 0.0
    active = alpha != 0
    viol = np.where(
        active,
        np.abs(grad + theta * np.sign(alpha)),
        np.maximum(np.abs(grad) - theta, 0.0),
    )
    return float(viol.max())


def _objective(alpha: np.ndarray, gram: np.ndarray, corr: np.ndarray, y_sq: float, theta: float) -> float:
    return float(0.5 * y_sq - corr @ alpha + 0.5 * alpha @ gram @ alpha + theta * np.abs(alpha).sum())


def _coordinate_descent(gram: np.ndarray, corr: np.ndarray, y_sq: float, theta: float, cfg: LassoConfig):
    """
    Minimise 0.5*y_sq - corr'a + 0.5 a'Gram a + theta |a|_1, warm start at 0.

    Converged when the largest coordinate move is below coord_tol and the KKT
    residual is below kkt_tol.
    """
    m = corr.shape[0]
    alpha = np.zeros(m)
    grad = -corr.copy()          # gradient of the smooth part: Gram a - corr
    diag = np.diag(gram)
    path = [_objective(alpha, gram, corr, y_sq, theta)]
    residual = kkt_residual(alpha, grad, theta)

    for sweep in range(1, cfg.max_sweeps + 1):
        max_move = 0.0
        for k in range(m):
            if diag[k] <= 0:
                continue
            old = alpha[k]
            z = diag[k] * old - grad[k]
            if z > theta:
                new = (z - theta) / diag[k]
            elif z < -theta:
                new = (z + theta) / diag[k]
            else:
                new = 0.0
            move = new - old
            if move != 0.0:
                alpha[k] = new
                grad += gram[:, k] * move
                max_move = max(max_move, abs(move))
        path.append(_objective(alpha, gram, corr, y_sq, theta))
        residual = kkt_residual(alpha, grad, theta)
        if max_move < cfg.coord_tol and residual < cfg.kkt_tol:
            return alpha, residual, sweep, path

    raise ConvergenceError("Lasso coordinate descent did not converge", kkt_residual=residual, sweeps=cfg.max_sweeps)


def lasso_fit(v: RowView, j: int, cfg: LassoConfig, cov: Optional[RowCovariance] = None, gram: Optional[np.ndarray] = None) -> LassoFit:
    """
    Fit beta_j(delta) for target column j.

    ``gram`` may be passed as Z Z' / (n p) to share it across targets.
    """
    if not 0 <= j < v.q:
        raise IndexError(f"Target column {j} out of range [0, {v.q})")
    if cov is None:
        cov = row_covariance(v)
    np_ = v.n * v.p
    if gram is None:
        gram = (v.z @ v.z.T) / np_

    others = np.delete(np.arange(v.q), j)
    scale = np.sqrt(np.diag(cov.psi_hat)[others])          # D_j^{1/2}
    g = gram[np.ix_(others, others)] / np.outer(scale, scale)
    c = gram[others, j] / scale
    theta = penalty(cov, j, cfg.delta, v.q)

    alpha, residual, sweeps, path = _coordinate_descent(g, c, float(gram[j, j]), theta, cfg)

    beta = np.zeros(v.q)
    beta[others] = alpha / scale
    return LassoFit(
        target=j, beta=beta, alpha=alpha, penalty=theta,
        kkt_residual=residual, sweeps=sweeps, objective_path=path,
    )


def fit_all(v: RowView, cov: RowCovariance, cfg: LassoConfig) -> CoefficientSet:
    """Fit the q node-wise Lassos; fits are independent, order does not matter."""
    gram = (v.z @ v.z.T) / (v.n * v.p)
    betas = np.zeros((v.q, v.q))
    penalties = np.zeros(v.q)
    residuals = np.zeros(v.q)
    total_sweeps = 0
    for j in range(v.q):
        fit = lasso_fit(v, j, cfg, cov=cov, gram=gram)
        betas[j] = fit.beta
        penalties[j] = fit.penalty
        residuals[j] = fit.kkt_residual
        total_sweeps += fit.sweeps
    logger.debug(
        f"Fitted {v.q} Lassos (delta={cfg.delta}): sweeps={total_sweeps}, "
        f"max KKT residual={residuals.max():.2e}, nnz={int(np.count_nonzero(betas))}"
    )
    return CoefficientSet(betas=betas, penalties=penalties, kkt_residuals=residuals, delta=cfg.delta)


def zero_component(beta: np.ndarray, j: int, i: int) -> np.ndarray:
    """
    beta_{j,\\i}: copy of beta_j (target j) with the coefficient of column i set to 0.

    For i == j the vector is returned unchanged (its j-th slot is already 0).
    """
    q = beta.shape[0]
    if not (0 <= i < q and 0 <= j < q):
        raise IndexError(f"Column index out of range: i={i}, j={j}, q={q}")
    out = beta.copy()
    if i != j:
        out[i] = 0.0
    return out
