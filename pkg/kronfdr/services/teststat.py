"""
Residual-correlation test statistics with the variance correction A_p.

The residual for pair (i, j) differs from column i's full-fit residual by a
single rank-one term (the zeroed coefficient on column j times that column):

    eps_ij = e_i + beta_i[j] * c_j

so all q^2 covariances follow from E'E, E'C and C'C without materialising
q^2 residual vectors.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger

from kronfdr.config import settings
from kronfdr.errors import DegenerateDataError
from kronfdr.models.matrices import (
    Axis,
    CoefficientSet,
    Dataset,
    ResidualCov,
    RowCovariance,
    RowView,
    TestMatrix,
    VarianceCorrection,
)
from kronfdr.models.schemas import LassoConfig
from kronfdr.services.regression import extract_row_samples, fit_all, row_covariance


def residual_cov(d: Dataset, coeffs: CoefficientSet) -> ResidualCov:
    """r_ij = 1/((n-1)p) * sum_k sum_l eps^(k)_{lij} eps^(k)_{lji}."""
    if coeffs.q != d.q:
        raise ValueError(f"Coefficient set is for q={coeffs.q}, dataset has q={d.q}")
    c = d.centered().reshape(d.n * d.p, d.q)            # N x q, column j = centered column j
    b = coeffs.betas
    e = c - c @ b.T                                     # full-fit residuals, column i = e_i
    ee = e.T @ e
    ec_diag = np.einsum("ni,ni->i", e, c)               # e_i' c_i
    cc = c.T @ c
    r = ee + b.T * ec_diag[:, None] + b * ec_diag[None, :] + b * b.T * cc
    r = r / ((d.n - 1) * d.p)
    r = np.triu(r) + np.triu(r, 1).T
    return ResidualCov(r=r, n=d.n, p=d.p)


def column_covariance(d: Dataset) -> np.ndarray:
    """Sigma_hat = Y Y' / ((n-1) q) over the nq centered column samples."""
    y = d.centered().transpose(1, 0, 2).reshape(d.p, d.n * d.q)
    s = (y @ y.T) / ((d.n - 1) * d.q)
    return (s + s.T) / 2.0


def threshold_covariance(sigma_hat: np.ndarray, lam: float, n: int, q: int) -> np.ndarray:
    """Keep off-diagonals with |s_ij| >= lam * sqrt(log max(p, nq) / (nq)); diagonal untouched."""
    if lam < 0:
        raise ValueError(f"Threshold multiplier must be >= 0, got {lam}")
    p = sigma_hat.shape[0]
    nq = n * q
    cutoff = lam * np.sqrt(np.log(max(p, nq)) / nq)
    out = np.where(np.abs(sigma_hat) >= cutoff, sigma_hat, 0.0)
    np.fill_diagonal(out, np.diag(sigma_hat))
    return out


def variance_correction(sigma_lambda: np.ndarray) -> float:
    """A_hat = p ||S||_F^2 / tr(S)^2."""
    tr = float(np.trace(sigma_lambda))
    if tr <= 0:
        raise DegenerateDataError(f"Covariance trace must be positive, got {tr}")
    p = sigma_lambda.shape[0]
    return float(p * np.sum(sigma_lambda ** 2) / tr ** 2)


def estimate_variance_correction(d: Dataset, lam: float, sigma_hat: Optional[np.ndarray] = None) -> VarianceCorrection:
    if sigma_hat is None:
        sigma_hat = column_covariance(d)
    s_lam = threshold_covariance(sigma_hat, lam, d.n, d.q)
    return VarianceCorrection(sigma_hat=sigma_hat, lam=lam, sigma_thresholded=s_lam, a_hat=variance_correction(s_lam))


def test_statistics(rc: ResidualCov, a_hat: float, n: int, p: int, axis: Axis = Axis.GAMMA) -> TestMatrix:
    """T_ij = sqrt((n-1)p / A_hat) * r_ij / sqrt(r_ii r_jj), symmetric, zero diagonal."""
    if a_hat <= 0:
        raise ValueError(f"Variance correction must be positive, got {a_hat}")
    diag = np.diag(rc.r)
    bad = np.flatnonzero(diag < settings.R_DIAG_FLOOR)
    if bad.size:
        raise DegenerateDataError(f"Residual variance of column {int(bad[0])} is numerically zero", index=int(bad[0]))
    sd = np.sqrt(diag)
    t = np.sqrt((n - 1) * p / a_hat) * rc.r / np.outer(sd, sd)
    t = np.triu(t, 1)
    t = t + t.T
    return TestMatrix(t=t, a_hat=float(a_hat), axis=axis)


test_statistics.__test__ = False  # not a pytest test


@dataclass(frozen=True)
class AxisData:
    """Everything about one orientation of the data that does not depend on (lambda, delta)."""
    axis: Axis
    dataset: Dataset
    view: RowView
    row_cov: RowCovariance
    sigma_hat: np.ndarray


def orient(d: Dataset, axis: Axis) -> Dataset:
    """The omega axis is the same procedure on transposed observations."""
    return d.transpose() if axis == Axis.OMEGA else d


def prepare_axis(d: Dataset, axis: Axis) -> AxisData:
    od = orient(d, axis)
    view = extract_row_samples(od)
    return AxisData(
        axis=axis,
        dataset=od,
        view=view,
        row_cov=row_covariance(view),
        sigma_hat=column_covariance(od),
    )


def statistics_for(ad: AxisData, coeffs: CoefficientSet, a_hat: float, lam: Optional[float] = None) -> TestMatrix:
    rc = residual_cov(ad.dataset, coeffs)
    tm = test_statistics(rc, a_hat, ad.dataset.n, ad.dataset.p, axis=ad.axis)
    return TestMatrix(t=tm.t, a_hat=tm.a_hat, axis=ad.axis, lam=lam, delta=coeffs.delta)


def run_axis(d: Dataset, axis: Axis, cfg: LassoConfig, lam: float, a_hat: Optional[float] = None) -> TestMatrix:
    """
    Test matrix for one axis: q x q for the gamma axis, p x p for the omega axis.

    ``a_hat`` overrides the thresholded estimate (e.g. with the oracle A_p).
    """
    ad = prepare_axis(d, axis)
    coeffs = fit_all(ad.view, ad.row_cov, cfg)
    if a_hat is None:
        a_hat = variance_correction(threshold_covariance(ad.sigma_hat, lam, ad.dataset.n, ad.dataset.q))
    tm = statistics_for(ad, coeffs, a_hat, lam=lam)
    logger.debug(f"{axis.value}: dim={tm.dim}, A_hat={a_hat:.4f}, max|T|={np.abs(tm.t).max():.3f}")
    return tm
