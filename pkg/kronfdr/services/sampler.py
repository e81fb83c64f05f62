"""
Matrix-normal model assembly and sampling.

X = mu + L_Sigma G L_Psi' realises Cov(vec(X')) = Sigma (x) Psi without ever
forming the pq x pq covariance.
"""
from typing import Optional

import numpy as np
from loguru import logger
from scipy import linalg

from kronfdr.errors import DegenerateDataError
from kronfdr.models.matrices import Dataset, ModelSpec, PrecisionMatrix
from kronfdr.services.graphs import invert_spd


def build_model(omega: PrecisionMatrix, gamma: PrecisionMatrix, mu: Optional[np.ndarray] = None, nu: float = 0.0) -> ModelSpec:
    if nu < 0:
        raise ValueError(f"Perturbation level must be >= 0, got {nu}")
    sigma = invert_spd(omega)
    psi = invert_spd(gamma)
    if mu is None:
        mu = np.zeros((omega.dim, gamma.dim))
    if mu.shape != (omega.dim, gamma.dim):
        raise ValueError(f"Mean shape {mu.shape} does not match ({omega.dim}, {gamma.dim})")
    return ModelSpec(omega=omega, gamma=gamma, sigma=sigma, psi=psi, mu=mu, nu=float(nu))


def sample_dataset(spec: ModelSpec, n: int, seed: int) -> Dataset:
    """Draw n i.i.d. observations; deterministic given seed."""
    if n < 2:
        raise ValueError(f"Need n >= 2 observations, got {n}")
    try:
        l_sigma = linalg.cholesky(spec.sigma, lower=True)
        l_psi = linalg.cholesky(spec.psi, lower=True)
    except linalg.LinAlgError as e:
        raise DegenerateDataError(f"Model covariance is not positive definite: {e}")

    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, spec.p, spec.q))
    samples = spec.mu + l_sigma @ g @ l_psi.T
    if spec.nu > 0:
        # Sigma (x) Psi + nu I: the isotropic part is independent per entry
        samples = samples + np.sqrt(spec.nu) * rng.standard_normal((n, spec.p, spec.q))
    logger.debug(f"Sampled dataset n={n}, p={spec.p}, q={spec.q}, nu={spec.nu}, seed={seed}")
    return Dataset(samples=samples)
