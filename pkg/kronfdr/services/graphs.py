"""
Precision-matrix generators and ground-truth quantities.

Three graph families (hub, band, random) with an optional signal-strength
divisor f applied to every off-diagonal magnitude.
"""
import numpy as np
from loguru import logger
from scipy import linalg

from kronfdr.errors import DegenerateDataError
from kronfdr.models.matrices import PrecisionMatrix
from kronfdr.models.schemas import GraphKind

PD_MARGIN = 0.05


def _pd_shift(omega1: np.ndarray) -> np.ndarray:
    """Add (max(0, -lambda_min) + 0.05) * I so the matrix is positive definite."""
    lam_min = float(linalg.eigvalsh(omega1)[0])
    shift = max(0.0, -lam_min) + PD_MARGIN
    logger.debug(f"PD shift: lambda_min={lam_min:.4f}, shift={shift:.4f}")
    return omega1 + shift * np.eye(omega1.shape[0])


def _hub(dim: int, f: float) -> np.ndarray:
    omega1 = np.eye(dim)
    # floor(dim/10) hubs; trailing rows keep only their diagonal
    for k in range(dim // 10):
        head = 10 * k
        omega1[head, head + 1:head + 10] = 0.5 / f
        omega1[head + 1:head + 10, head] = 0.5 / f
    return _pd_shift(omega1)


def _band(dim: int, f: float) -> np.ndarray:
    omega = np.eye(dim)
    idx = np.arange(dim)
    omega[idx[:-1], idx[:-1] + 1] = 0.6 / f
    omega[idx[:-2], idx[:-2] + 2] = 0.3 / f
    return np.triu(omega) + np.triu(omega, 1).T


def _random(dim: int, f: float, cap: float, rng: np.random.Generator) -> np.ndarray:
    prob = min(cap, 5.0 / dim)
    rows, cols = np.triu_indices(dim, 1)
    # one (bernoulli, uniform) draw per unordered pair
    edges = rng.random(rows.size) < prob
    weights = rng.uniform(0.4 / f, 0.8 / f, rows.size)
    omega1 = np.eye(dim)
    omega1[rows, cols] = weights * edges
    omega1[cols, rows] = omega1[rows, cols]
    return _pd_shift(omega1)


def gen_precision(kind: GraphKind, dim: int, seed: int = 0) -> PrecisionMatrix:
    """Generate a precision matrix from one of the three graph families."""
    if dim < 3:
        raise ValueError(f"Precision matrix dimension must be >= 3, got {dim}")
    if kind.factor <= 0:
        raise ValueError(f"Signal-strength factor must be positive, got {kind.factor}")

    if kind.kind == "hub":
        entries = _hub(dim, kind.factor)
    elif kind.kind == "band":
        entries = _band(dim, kind.factor)
    elif kind.kind == "random":
        entries = _random(dim, kind.factor, kind.edge_prob_cap, np.random.default_rng(seed))
    else:
        raise ValueError(f"Unknown graph kind: '{kind.kind}'")

    try:
        linalg.cholesky(entries, lower=True)
    except linalg.LinAlgError as e:
        raise DegenerateDataError(f"Generated {kind.kind} precision matrix is not positive definite: {e}")

    pm = PrecisionMatrix.from_entries(entries)
    logger.debug(f"Generated {kind.kind} precision (dim={dim}, f={kind.factor}, edges={pm.off_diagonal_support().sum() // 2})")
    return pm


def invert_spd(m) -> np.ndarray:
    """Inverse of a symmetric positive-definite matrix via Cholesky solves."""
    entries = m.entries if isinstance(m, PrecisionMatrix) else np.asarray(m, dtype=float)
    try:
        factor = linalg.cho_factor(entries, lower=True)
    except linalg.LinAlgError as e:
        raise DegenerateDataError(f"Matrix is not positive definite: {e}")
    inv = linalg.cho_solve(factor, np.eye(entries.shape[0]))
    return (inv + inv.T) / 2.0


def true_partial_corr(g: PrecisionMatrix) -> np.ndarray:
    """rho_ij = -g_ij / sqrt(g_ii g_jj), unit diagonal."""
    d = np.sqrt(np.diag(g.entries))
    rho = -g.entries / np.outer(d, d)
    np.fill_diagonal(rho, 1.0)
    return rho


def joint_partial_corr(omega: PrecisionMatrix, gamma: PrecisionMatrix, i: int, k: int, j: int, l: int) -> float:
    """
    Partial correlation between X_ij and X_kl under Omega (x) Gamma.

    Uses the gamma diagonal in the second factor's denominator, which is what
    the partial-correlation identity of a Kronecker precision requires.
    """
    p, q = omega.dim, gamma.dim
    for name, idx, bound in (("i", i, p), ("k", k, p), ("j", j, q), ("l", l, q)):
        if not 0 <= idx < bound:
            raise IndexError(f"Index {name}={idx} out of range [0, {bound})")
    if (i, j) == (k, l):
        raise ValueError("Partial correlation needs two distinct entries")
    w, g = omega.entries, gamma.entries
    return float(-(w[i, k] / np.sqrt(w[i, i] * w[k, k])) * (g[j, l] / np.sqrt(g[j, j] * g[l, l])))
