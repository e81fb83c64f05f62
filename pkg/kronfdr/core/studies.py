"""
Method-validation studies that sit beside the FDR simulation.

null_normality_study: with Gamma = I every off-diagonal statistic is a null,
    so the pooled T values should look standard normal.
ratio_study: how close A_hat gets to the true A_p as p = q grows.
"""
from typing import Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from kronfdr.core.simulation import replication_seeds, run_pool
from kronfdr.models.matrices import Axis, PrecisionMatrix
from kronfdr.models.schemas import GraphKind, LassoConfig, TuningGrid
from kronfdr.services.graphs import gen_precision
from kronfdr.services.reporting import pooled_summary
from kronfdr.services.sampler import build_model, sample_dataset
from kronfdr.services.teststat import estimate_variance_correction, run_axis, variance_correction
from kronfdr.services.tuning import tune


def oracle_a(sigma: np.ndarray) -> float:
    """A_p evaluated at the true row covariance."""
    return variance_correction(np.asarray(sigma, dtype=float))


def null_normality_study(
    n: int,
    p: int,
    q: int,
    omega_kind: GraphKind,
    replications: int,
    seed: int = 0,
    use_oracle_a: bool = True,
    lam: float = 2.0,
    delta: float = 2.0,
    max_workers: int = 1,
) -> dict:
    gamma = PrecisionMatrix.from_entries(np.eye(q))
    cfg = LassoConfig(delta=delta)

    def one(r: int):
        _, seeds = replication_seeds(seed, r)
        omega = gen_precision(omega_kind, p, seed=seeds["omega"])
        model = build_model(omega, gamma)
        d = sample_dataset(model, n, seed=seeds["sample"])
        a_hat = oracle_a(model.sigma) if use_oracle_a else None
        tm = run_axis(d, Axis.GAMMA, cfg, lam, a_hat=a_hat)
        rows, cols = np.triu_indices(q, 1)
        return tm.t[rows, cols], tm.a_hat

    results, errors = run_pool(one, range(replications), max_workers)
    for r, e in sorted(errors.items()):
        logger.error(f"Null study replication {r} (seed={seed ^ r}) failed: {e}")
    pooled = np.concatenate([results[r][0] for r in sorted(results)]) if results else np.empty(0)

    summary = pooled_summary(pooled)
    summary.update({
        "n": n, "p": p, "q": q,
        "omega_kind": omega_kind.model_dump(),
        "use_oracle_a": use_oracle_a,
        "replications": len(results),
        "failed": len(errors),
        "a_hat": [results[r][1] for r in sorted(results)],
    })
    logger.success(
        f"Null study: {summary['count']} statistics, mean={summary['mean']}, "
        f"variance={summary['variance']}, tail={summary['tail_frequency']}"
    )
    return summary


def ratio_study(
    n: int,
    sizes: Sequence[int],
    kind: GraphKind,
    lam: Optional[float],
    replications: int,
    seed: int = 0,
    grid: Optional[TuningGrid] = None,
    max_workers: int = 1,
) -> List[Dict]:
    """
    A_hat / A_p per replication for each p = q in ``sizes``.

    With ``lam`` None the threshold is tuned per replication on the gamma axis.
    """
    grid = grid or TuningGrid()
    out = []
    for size in sizes:
        def one(r: int, size=size):
            _, seeds = replication_seeds(seed, r)
            model = build_model(gen_precision(kind, size, seed=seeds["omega"]), gen_precision(kind, size, seed=seeds["gamma"]))
            d = sample_dataset(model, n, seed=seeds["sample"])
            if lam is None:
                a_hat = tune(d, grid, LassoConfig(), axis=Axis.GAMMA).statistics.a_hat
            else:
                a_hat = estimate_variance_correction(d, lam).a_hat
            return a_hat / oracle_a(model.sigma)

        results, errors = run_pool(one, range(replications), max_workers)
        for r, e in sorted(errors.items()):
            logger.error(f"Ratio study p=q={size} replication {r} (seed={seed ^ r}) failed: {e}")
        ratios = np.array([results[r] for r in sorted(results)])
        row = {
            "size": int(size),
            "replications": int(ratios.size),
            "failed": len(errors),
            "mean": float(ratios.mean()) if ratios.size else None,
            "sd": float(ratios.std(ddof=1)) if ratios.size > 1 else None,
            "ratios": ratios.tolist(),
        }
        logger.info(f"Ratio study p=q={size}: mean={row['mean']}, sd={row['sd']}")
        out.append(row)
    return out
