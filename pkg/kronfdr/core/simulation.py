"""
Seeded replication engine for simulation reports and ROC sweeps.

Replication r runs with seed_r = seed XOR r; the Omega, Gamma and sample
streams are spawned from SeedSequence(seed_r), so a replication's outcome
depends only on (config, seed, r) and never on scheduling.
"""
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from kronfdr.core.context import ReplicationContext
from kronfdr.core.pipeline import SIMULATION_STEPS, PipelineRunner
from kronfdr.models.matrices import Axis
from kronfdr.models.schemas import FailedReplication, ReplicationRecord, RunReport, SimConfig
from kronfdr.services.reporting import ReportWriter, emit_report, roc_frames

SEED_STREAMS = ("omega", "gamma", "sample")


def replication_seeds(seed: int, r: int) -> Tuple[int, Dict[str, int]]:
    seed_r = seed ^ r
    children = np.random.SeedSequence(seed_r).spawn(len(SEED_STREAMS))
    return seed_r, {name: int(child.generate_state(1)[0]) for name, child in zip(SEED_STREAMS, children)}


def run_pool(fn: Callable[[int], object], indices: Iterable[int], max_workers: int) -> Tuple[Dict[int, object], Dict[int, Exception]]:
    """Run fn over indices in a thread pool; results and errors keyed by index."""
    results: Dict[int, object] = {}
    errors: Dict[int, Exception] = {}
    indices = list(indices)
    with ThreadPoolExecutor(max_workers=max(1, min(max_workers, len(indices) or 1))) as executor:
        futures = {executor.submit(fn, r): r for r in indices}
        for future in as_completed(futures):
            r = futures[future]
            try:
                results[r] = future.result()
            except Exception as e:
                errors[r] = e
    return results, errors


def run_replication(cfg: SimConfig, r: int, steps: Sequence[str] = SIMULATION_STEPS, params: Optional[dict] = None) -> ReplicationContext:
    seed_r, seeds = replication_seeds(cfg.seed, r)
    ctx = ReplicationContext(config=cfg, replication=r, seed=seed_r, seeds=seeds)
    return PipelineRunner().run(list(steps), ctx, params)


def record_from(ctx: ReplicationContext) -> ReplicationRecord:
    m = ctx.require("metrics")
    tuning = ctx.require("tuning")
    return ReplicationRecord(
        replication=ctx.replication,
        seed=ctx.seed,
        a=m.a, b=m.b, a0=m.a0, b0=m.b0,
        fdp_omega=m.fdp_omega,
        fdp_gamma=m.fdp_gamma,
        fdp_joint=m.fdp_joint,
        alpha_prime=m.alpha_prime,
        power=m.power_joint,
        alpha=ctx.require("alpha"),
        lambda_omega=tuning[Axis.OMEGA].lambda_hat,
        delta_omega=tuning[Axis.OMEGA].delta_hat,
        lambda_gamma=tuning[Axis.GAMMA].lambda_hat,
        delta_gamma=tuning[Axis.GAMMA].delta_hat,
        wall_time=ctx.wall_time,
    )


def _failures(cfg: SimConfig, errors: Dict[int, Exception]) -> List[FailedReplication]:
    failures = []
    for r in sorted(errors):
        seed_r, _ = replication_seeds(cfg.seed, r)
        e = errors[r]
        logger.error(f"Replication {r} (seed={seed_r}) failed: {type(e).__name__}: {e}")
        failures.append(FailedReplication(replication=r, seed=seed_r, error=f"{type(e).__name__}: {e}"))
    return failures


def run_simulation(cfg: SimConfig, write: bool = True) -> RunReport:
    logger.info(
        f"Simulation: n={cfg.n}, p={cfg.p}, q={cfg.q}, {cfg.omega_kind.kind}/{cfg.gamma_kind.kind}, "
        f"alpha={cfg.alpha}, replications={cfg.replications}, seed={cfg.seed}"
    )

    def one(r: int):
        ctx = run_replication(cfg, r)
        edges = None
        if cfg.write_edges and r == 0:
            stats, sels = ctx.require("statistics"), ctx.require("selections")
            edges = {
                "gamma": (stats[Axis.GAMMA], sels[Axis.GAMMA]),
                "omega": (stats[Axis.OMEGA], sels[Axis.OMEGA]),
            }
        logger.debug(f"Replication {r} done in {ctx.wall_time:.2f}s")
        return record_from(ctx), edges

    results, errors = run_pool(one, range(cfg.replications), cfg.max_workers)
    records = [results[r][0] for r in sorted(results)]
    report = RunReport(config=cfg, records=records, failures=_failures(cfg, errors))

    if write:
        edges = results[0][1] if 0 in results else None
        emit_report(report, cfg.output_dir, edges=edges, extra={"steps": SIMULATION_STEPS})
    if report.complete:
        logger.success(f"Simulation finished: {len(records)} replications")
    else:
        logger.warning(f"Simulation incomplete: {len(report.failures)} of {cfg.replications} replications failed")
    return report


def run_roc(
    cfg: SimConfig, alphas: Sequence[float], write: bool = True
) -> Tuple[pd.DataFrame, pd.DataFrame, List[FailedReplication]]:
    """
    FDP and power per alpha per replication, plus the failed replications.

    Statistics are built once per replication; only the selection and the
    scoring are repeated for each alpha.
    """
    alphas = sorted(set(float(a) for a in alphas))
    if not alphas:
        raise ValueError("ROC alpha grid must not be empty")
    if any(not 0 < a < 1 for a in alphas):
        raise ValueError(f"ROC alphas must lie in (0, 1), got {alphas}")
    logger.info(f"ROC sweep over {len(alphas)} alphas, {cfg.replications} replications, nu={cfg.nu}")

    runner = PipelineRunner()

    def one(r: int):
        ctx = run_replication(cfg, r, steps=["generate", "sample", "estimate"])
        rows = []
        for alpha in alphas:
            runner.run(["select", "evaluate"], ctx, {"select": {"alpha": alpha}})
            m = ctx.require("metrics")
            rows.append({
                "replication": r, "seed": ctx.seed, "alpha": alpha,
                "a": m.a, "b": m.b, "alpha_prime": m.alpha_prime,
                "fdp": m.fdp_joint, "power": m.power_joint,
            })
        return rows

    results, errors = run_pool(one, range(cfg.replications), cfg.max_workers)
    rows = [row for r in sorted(results) for row in results[r]]
    failures = _failures(cfg, errors)
    curve, per_rep = roc_frames(rows)

    if write:
        out = Path(cfg.output_dir)
        ReportWriter.write_table(curve, out / "roc.csv")
        ReportWriter.write_table(per_rep, out / "roc_replications.csv")
        report = RunReport(config=cfg, records=[], failures=failures)
        summary = ReportWriter.summary_payload(report, {
            "alphas": alphas,
            "replication_seeds": [replication_seeds(cfg.seed, r)[0] for r in sorted(results)],
            "replications": len(results),
            "complete": not failures,
        })
        summary.pop("aggregates")
        summary.pop("wall_time")
        ReportWriter.write_json(summary, out / "roc_summary.json")
    logger.success(f"ROC sweep finished: {len(results)} replications, {len(failures)} failed")
    return curve, per_rep, failures
