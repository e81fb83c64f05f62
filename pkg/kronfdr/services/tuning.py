"""
Data-driven choice of (lambda, delta).

The pair is chosen so that the tail counts of the off-diagonal statistics
match those of a standard normal at the 15%..45% two-sided levels. Lasso
fits depend only on delta and A_hat only on lambda, so each is computed
once per grid value and only the cheap rescaling runs per cell.
"""
import numpy as np
from loguru import logger
from scipy.stats import norm

from kronfdr.models.matrices import Axis, Dataset, TestMatrix, TuningResult
from kronfdr.models.schemas import MIN_TUNING_DIM, LassoConfig, TuningGrid
from kronfdr.services.regression import fit_all
from kronfdr.services.teststat import (
    prepare_axis,
    residual_cov,
    test_statistics,
    threshold_covariance,
    variance_correction,
)

TAIL_LEVELS = range(3, 10)
MIN_DIM = MIN_TUNING_DIM


def ats_objective(t: TestMatrix) -> float:
    """sum_{k=3..9} (#{i != j : |T_ij| >= Phi^-1(1 - k/20)} / (k (q^2 - q) / 10) - 1)^2."""
    q = t.dim
    if q < MIN_DIM:
        raise ValueError(f"Tuning objective needs dim >= {MIN_DIM}, got {q}")
    off = ~np.eye(q, dtype=bool)
    abs_t = np.abs(t.t[off])
    total = 0.0
    for k in TAIL_LEVELS:
        count = np.count_nonzero(abs_t >= norm.ppf(1.0 - k / 20.0))
        expected = k * (q * q - q) / 10.0
        total += (count / expected - 1.0) ** 2
    return float(total)


def tune(d: Dataset, grid: TuningGrid, cfg_template: LassoConfig, axis: Axis = Axis.GAMMA) -> TuningResult:
    """Grid scan of the tail-count objective; ties go to the smallest lambda, then the smallest delta."""
    lambdas, deltas = list(grid.lambdas), list(grid.deltas)
    if not lambdas or not deltas:
        raise ValueError("Tuning grid must not be empty")

    ad = prepare_axis(d, axis)
    n, p, q = ad.dataset.n, ad.dataset.p, ad.dataset.q

    a_hats = [variance_correction(threshold_covariance(ad.sigma_hat, lam, n, q)) for lam in lambdas]
    residuals = []
    for delta in deltas:
        coeffs = fit_all(ad.view, ad.row_cov, cfg_template.model_copy(update={"delta": delta}))
        residuals.append(residual_cov(ad.dataset, coeffs))

    table = np.empty((len(lambdas), len(deltas)))
    for i, a_hat in enumerate(a_hats):
        for j, rc in enumerate(residuals):
            table[i, j] = ats_objective(test_statistics(rc, a_hat, n, p, axis=axis))
            logger.debug(f"{axis.value} lambda={lambdas[i]} delta={deltas[j]}: objective={table[i, j]:.4f}")

    # row-major argmin: smallest lambda first, then smallest delta
    i, j = np.unravel_index(int(np.argmin(table)), table.shape)
    best = test_statistics(residuals[j], a_hats[i], n, p, axis=axis)
    best = TestMatrix(t=best.t, a_hat=best.a_hat, axis=axis, lam=lambdas[i], delta=deltas[j])

    logger.info(
        f"Tuned {axis.value}: lambda={lambdas[i]}, delta={deltas[j]}, "
        f"objective={table[i, j]:.4f}, A_hat={a_hats[i]:.4f}"
    )
    return TuningResult(
        lambda_hat=lambdas[i],
        delta_hat=deltas[j],
        objective=float(table[i, j]),
        objective_table=table,
        lambdas=lambdas,
        deltas=deltas,
        statistics=best,
    )
