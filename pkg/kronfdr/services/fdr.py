"""
Multiple testing on the residual-correlation statistics.

Per axis: two-sided normal p-values, Benjamini-Hochberg step-up, and a
support mask. Across axes: the Kronecker support and its FDP / power /
alpha' bookkeeping. Counts a and b are ordered off-diagonal discoveries,
so every unordered rejected pair contributes 2.
"""
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.stats import norm

from kronfdr.config import settings
from kronfdr.errors import ConfigError
from kronfdr.models.matrices import (
    AlphaChoice,
    BhSelection,
    JointMetrics,
    KronSupport,
    PrecisionMatrix,
    PValueSet,
    SupportEstimate,
    TestMatrix,
)

DEFAULT_ALPHA_GRID: List[float] = [round(0.01 * k, 2) for k in range(1, 51)]


def p_values(t: TestMatrix) -> PValueSet:
    """p_ij = 2 (1 - Phi(|T_ij|)) for i < j, computed with the survival function."""
    rows, cols = np.triu_indices(t.dim, 1)
    stats = np.abs(t.t[rows, cols])
    values = np.clip(2.0 * norm.sf(stats), 0.0, 1.0)
    return PValueSet(dim=t.dim, rows=rows, cols=cols, values=values)


def bh_select(pv: PValueSet, alpha: float) -> BhSelection:
    """
    Benjamini-Hochberg step-up.

    k_hat = max{k : p_(k) <= alpha k / m}; every p-value at or below p_(k_hat)
    is rejected, so ties at the cutoff can push |rejected| above k_hat.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    m = pv.m
    if m == 0:
        return BhSelection(alpha=alpha, k_hat=0, cutoff=0.0, rejected=np.zeros(0, dtype=bool), pvalues=pv)

    ordered = np.sort(pv.values)
    passed = np.flatnonzero(ordered <= alpha * np.arange(1, m + 1) / m)
    if passed.size == 0:
        return BhSelection(alpha=alpha, k_hat=0, cutoff=0.0, rejected=np.zeros(m, dtype=bool), pvalues=pv)

    k_hat = int(passed[-1]) + 1
    cutoff = float(ordered[k_hat - 1])
    return BhSelection(alpha=alpha, k_hat=k_hat, cutoff=cutoff, rejected=pv.values <= cutoff, pvalues=pv)


def support_estimate(sel: BhSelection, dim: int) -> SupportEstimate:
    if sel.pvalues.dim != dim:
        raise ValueError(f"Selection is for dim={sel.pvalues.dim}, requested dim={dim}")
    mask = np.eye(dim, dtype=bool)
    rows = sel.pvalues.rows[sel.rejected]
    cols = sel.pvalues.cols[sel.rejected]
    mask[rows, cols] = True
    mask[cols, rows] = True
    return SupportEstimate(dim=dim, mask=mask)


def true_support(g: PrecisionMatrix) -> SupportEstimate:
    """The generator's support viewed as an estimate, for scoring and tests."""
    mask = g.true_support | np.eye(g.dim, dtype=bool)
    return SupportEstimate(dim=g.dim, mask=mask)


def alpha_prime(alpha: float, a: int, b: int, p: int, q: int) -> float:
    """alpha' = alpha ((2 - alpha) ab + aq + bp) / max(ab + aq + pb, 1)."""
    if a < 0 or b < 0:
        raise ValueError(f"Discovery counts must be >= 0, got a={a}, b={b}")
    num = alpha * ((2.0 - alpha) * a * b + a * q + b * p)
    return float(num / max(a * b + a * q + p * b, 1))


def joint_fdp(a: int, b: int, a0: int, b0: int, p: int, q: int) -> float:
    """False over total off-diagonal discoveries of supp(Omega_hat) (x) supp(Gamma_hat)."""
    num = a0 * (q + b) + (a - a0) * b0 + p * b0
    return float(num / max(p * b + a * (q + b), 1))


def joint_power(a: int, b: int, a0: int, b0: int, big_a: int, big_b: int, p: int, q: int) -> float:
    """True joint discoveries over true joint edges; 0 when the truth has no off-diagonal edges."""
    den = p * big_b + big_a * (q + big_b)
    if den == 0:
        return 0.0
    return float((p * (b - b0) + (a - a0) * (q + b - b0)) / den)


def _false_discoveries(est: SupportEstimate, truth: PrecisionMatrix) -> int:
    if est.dim != truth.dim:
        raise ValueError(f"Estimate dim {est.dim} does not match truth dim {truth.dim}")
    return int(np.count_nonzero(est.off_diagonal() & ~truth.off_diagonal_support()))


def joint_metrics(
    omega_est: SupportEstimate,
    gamma_est: SupportEstimate,
    alpha: float,
    truth: Optional[Tuple[PrecisionMatrix, PrecisionMatrix]] = None,
) -> JointMetrics:
    p, q = omega_est.dim, gamma_est.dim
    a, b = omega_est.discoveries, gamma_est.discoveries
    ap = alpha_prime(alpha, a, b, p, q)
    if truth is None:
        return JointMetrics(a=a, b=b, alpha_prime=ap)

    omega, gamma = truth
    a0 = _false_discoveries(omega_est, omega)
    b0 = _false_discoveries(gamma_est, gamma)
    big_a = int(np.count_nonzero(omega.off_diagonal_support()))
    big_b = int(np.count_nonzero(gamma.off_diagonal_support()))
    return JointMetrics(
        a=a, b=b, alpha_prime=ap, a0=a0, b0=b0,
        fdp_omega=a0 / max(a, 1),
        fdp_gamma=b0 / max(b, 1),
        fdp_joint=joint_fdp(a, b, a0, b0, p, q),
        power_joint=joint_power(a, b, a0, b0, big_a, big_b, p, q),
    )


def kron_support(
    omega_est: SupportEstimate,
    gamma_est: SupportEstimate,
    cap: Optional[int] = None,
    materialize: bool = True,
) -> KronSupport:
    """
    Off-diagonal edges of supp(Omega_hat) (x) supp(Gamma_hat).

    Entry (i, j) links to (k, l) iff omega_mask[i, k] and gamma_mask[j, l].
    The count pb + a(q + b) is always returned; the edge list only when
    materialize is set, and then p*q must not exceed ``cap``.
    """
    cap = settings.KRON_CAP if cap is None else cap
    p, q = omega_est.dim, gamma_est.dim
    a, b = omega_est.discoveries, gamma_est.discoveries
    count = p * b + a * (q + b)
    if not materialize:
        return KronSupport(p=p, q=q, count=count)
    if p * q > cap:
        raise ConfigError(f"Kronecker support of {p}x{q} entries exceeds cap {cap}; use counts-only mode")

    om = np.argwhere(omega_est.mask)
    gm = np.argwhere(gamma_est.mask)
    i = np.repeat(om[:, 0], len(gm))
    k = np.repeat(om[:, 1], len(gm))
    j = np.tile(gm[:, 0], len(om))
    l = np.tile(gm[:, 1], len(om))
    keep = ~((i == k) & (j == l))
    edges = np.column_stack([i, j, k, l])[keep]
    return KronSupport(p=p, q=q, count=count, edges=edges)


SelectFn = Callable[[float], Tuple[SupportEstimate, SupportEstimate]]


def choose_alpha_for_target(
    target: float,
    p: int,
    q: int,
    select_fn: SelectFn,
    grid: Optional[Sequence[float]] = None,
) -> AlphaChoice:
    """
    Scan per-axis alpha upwards and return the one whose alpha' is closest to target.

    ``select_fn(alpha)`` returns the (omega, gamma) support estimates at that
    level. Ties go to the smaller alpha.
    """
    if not 0 < target < 1:
        raise ValueError(f"Target alpha' must be in (0, 1), got {target}")
    grid = sorted(DEFAULT_ALPHA_GRID if grid is None else grid)
    if not grid:
        raise ValueError("Alpha grid must not be empty")

    table = []
    for alpha in grid:
        omega_est, gamma_est = select_fn(alpha)
        a, b = omega_est.discoveries, gamma_est.discoveries
        table.append((float(alpha), a, b, alpha_prime(alpha, a, b, p, q)))

    primes = np.array([row[3] for row in table])
    monotone = bool(np.all(np.diff(primes) >= -1e-12))
    if not monotone:
        logger.warning(f"alpha' is not monotone across the alpha grid: {primes.round(4).tolist()}")

    zero_discovery = all(row[1] == 0 and row[2] == 0 for row in table)
    if zero_discovery:
        logger.warning(f"No discoveries anywhere on the alpha grid; falling back to alpha={table[0][0]}")
        best = table[0]
    else:
        # first minimum wins, which is the smallest alpha among ties
        best = table[int(np.argmin(np.abs(primes - target)))]

    alpha, a, b, ap = best
    logger.info(f"Chose alpha={alpha} for target alpha'={target}: alpha'={ap:.4f}, a={a}, b={b}")
    return AlphaChoice(
        alpha=alpha, alpha_prime=ap, a=a, b=b,
        zero_discovery=zero_discovery, monotone=monotone, table=table,
    )
