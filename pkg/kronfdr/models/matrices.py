"""
matrices.py - numerical containers passed between the services.

Pure data holders. Algorithms live in kronfdr.services.*; these classes only
check their own shape/symmetry invariants on construction.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from kronfdr.errors import DataError


class Axis(str, Enum):
    GAMMA = "gamma_axis"
    OMEGA = "omega_axis"


@dataclass(frozen=True)
class PrecisionMatrix:
    """
    Symmetric positive-definite precision matrix with its true support.

    Generators place exact zeros, so ``true_support`` is simply the nonzero
    pattern of ``entries`` (diagonal included).
    """
    entries: np.ndarray
    true_support: np.ndarray

    def __post_init__(self):
        m = self.entries
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"Precision matrix must be square, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            raise ValueError("Precision matrix is not symmetric")
        if self.true_support.shape != m.shape:
            raise ValueError("Support mask shape does not match entries")

    @classmethod
    def from_entries(cls, entries: np.ndarray) -> "PrecisionMatrix":
        entries = np.asarray(entries, dtype=float)
        return cls(entries=entries, true_support=entries != 0)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def off_diagonal_support(self) -> np.ndarray:
        mask = self.true_support.copy()
        np.fill_diagonal(mask, False)
        return mask


@dataclass(frozen=True)
class ModelSpec:
    """Matrix-normal model X ~ N(mu, Sigma (x) Psi), optionally perturbed by nu * I."""
    omega: PrecisionMatrix
    gamma: PrecisionMatrix
    sigma: np.ndarray
    psi: np.ndarray
    mu: np.ndarray
    nu: float = 0.0

    @property
    def p(self) -> int:
        return self.omega.dim

    @property
    def q(self) -> int:
        return self.gamma.dim


@dataclass(frozen=True)
class Dataset:
    """
    n observations of a p x q matrix, stored as an (n, p, q) array.

    ``mean_hat`` is the entrywise sample mean; the pipeline always centers by it.
    Optional labels name the rows/columns for real data.
    """
    samples: np.ndarray
    mean_hat: np.ndarray = None
    row_labels: Optional[List[str]] = None
    col_labels: Optional[List[str]] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 3:
            raise DataError(f"Dataset samples must be an (n, p, q) array, got shape {samples.shape}")
        if samples.shape[0] < 2:
            raise DataError(f"Dataset needs at least 2 observations, got {samples.shape[0]}")
        object.__setattr__(self, "samples", samples)
        if self.mean_hat is None:
            object.__setattr__(self, "mean_hat", samples.mean(axis=0))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def p(self) -> int:
        return self.samples.shape[1]

    @property
    def q(self) -> int:
        return self.samples.shape[2]

    def centered(self) -> np.ndarray:
        return self.samples - self.mean_hat

    def transpose(self) -> "Dataset":
        """Swap the roles of rows and columns in every observation."""
        return Dataset(
            samples=self.samples.transpose(0, 2, 1),
            mean_hat=self.mean_hat.T,
            row_labels=self.col_labels,
            col_labels=self.row_labels,
        )


@dataclass(frozen=True)
class RowView:
    """
    Z: q x (n*p) matrix of centered row samples.

    Column k*p + l (0-based) holds (X^(k)_{l,.} - Xbar_{l,.})'.
    """
    z: np.ndarray
    n: int
    p: int
    q: int


@dataclass(frozen=True)
class RowCovariance:
    psi_hat: np.ndarray
    n: int
    p: int

    @property
    def scale(self) -> np.ndarray:
        """Diagonal of psi_hat; D_j is this vector with entry j removed."""
        return np.diag(self.psi_hat).copy()

    def d(self, j: int) -> np.ndarray:
        return np.delete(self.scale, j)


@dataclass(frozen=True)
class LassoFit:
    """Solution of one node-wise Lasso with its optimality certificate."""
    target: int
    beta: np.ndarray            # length q, addressed by original column id, beta[target] == 0
    alpha: np.ndarray           # scaled coefficients over the q-1 covariates
    penalty: float
    kkt_residual: float
    sweeps: int
    objective_path: List[float] = field(default_factory=list)


@dataclass(frozen=True)
class CoefficientSet:
    """
    Row j of ``betas`` is beta_j addressed by original column id, so
    betas[j, j] == 0 and betas[j, i] is the coefficient of covariate i.
    """
    betas: np.ndarray
    penalties: np.ndarray
    kkt_residuals: np.ndarray
    delta: float

    @property
    def q(self) -> int:
        return self.betas.shape[0]


@dataclass(frozen=True)
class ResidualCov:
    r: np.ndarray
    n: int
    p: int


@dataclass(frozen=True)
class VarianceCorrection:
    sigma_hat: np.ndarray
    lam: float
    sigma_thresholded: np.ndarray
    a_hat: float


@dataclass(frozen=True)
class TestMatrix:
    """Symmetric matrix of residual-correlation statistics; the diagonal is 0 and never tested."""
    t: np.ndarray
    a_hat: float
    axis: Axis = Axis.GAMMA
    lam: Optional[float] = None
    delta: Optional[float] = None

    __test__ = False  # not a pytest class

    @property
    def dim(self) -> int:
        return self.t.shape[0]


@dataclass(frozen=True)
class PValueSet:
    """One p-value per unordered pair (rows[k], cols[k]) with rows[k] < cols[k]."""
    dim: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    @property
    def m(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class BhSelection:
    alpha: float
    k_hat: int
    cutoff: float
    rejected: np.ndarray        # boolean mask aligned with PValueSet.values
    pvalues: PValueSet

    def rejected_pairs(self) -> List[tuple]:
        idx = np.flatnonzero(self.rejected)
        return [(int(self.pvalues.rows[k]), int(self.pvalues.cols[k])) for k in idx]


@dataclass(frozen=True)
class SupportEstimate:
    dim: int
    mask: np.ndarray

    @property
    def discoveries(self) -> int:
        """Ordered count of off-diagonal true entries (each unordered pair counts twice)."""
        return int(np.count_nonzero(self.mask)) - int(np.count_nonzero(np.diag(self.mask)))

    def off_diagonal(self) -> np.ndarray:
        mask = self.mask.copy()
        np.fill_diagonal(mask, False)
        return mask


@dataclass(frozen=True)
class JointMetrics:
    a: int
    b: int
    alpha_prime: float
    a0: Optional[int] = None
    b0: Optional[int] = None
    fdp_omega: Optional[float] = None
    fdp_gamma: Optional[float] = None
    fdp_joint: Optional[float] = None
    power_joint: Optional[float] = None


@dataclass(frozen=True)
class KronSupport:
    """Off-diagonal edges of supp(Omega_hat) (x) supp(Gamma_hat).

    ``edges`` rows are (i, j, k, l): entry (i, j) of X is linked to entry (k, l).
    Ordered pairs, self-pairs excluded. ``edges`` is None in counts-only mode.
    """
    p: int
    q: int
    count: int
    edges: Optional[np.ndarray] = None


@dataclass(frozen=True)
class TuningResult:
    lambda_hat: float
    delta_hat: float
    objective: float
    objective_table: np.ndarray     # shape (len(lambdas), len(deltas))
    lambdas: List[float]
    deltas: List[float]
    statistics: Optional[TestMatrix] = None


@dataclass(frozen=True)
class AlphaChoice:
    """Outcome of scanning per-axis alpha to hit a joint FDP target."""
    alpha: float
    alpha_prime: float
    a: int
    b: int
    zero_discovery: bool
    monotone: bool
    table: List[tuple]              # (alpha, a, b, alpha_prime) per candidate
