"""
Command-line entry point.

    kronfdr simulate --config cfg.json
    kronfdr roc      --config cfg.json --alphas 0.01,0.05,0.1 [--nus 0,0.5,2]
    kronfdr estimate --data DIR --layout layout.json --alpha 0.1 [--target-alpha-prime 0.1] [--alphas 0.1,0.2,0.3]
    kronfdr tune     --data DIR --layout layout.json
    kronfdr study null|ratio ...

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical degeneracy,
1 anything else.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd
from loguru import logger
from pydantic import ValidationError

from kronfdr.config import settings
from kronfdr.core.context import ReplicationContext
from kronfdr.core.pipeline import DATA_STEPS, PipelineRunner
from kronfdr.core.simulation import run_roc, run_simulation
from kronfdr.core.studies import null_normality_study, ratio_study
from kronfdr.errors import ConfigError, KronFdrError
from kronfdr.models.matrices import Axis
from kronfdr.models.schemas import GraphKind, LassoConfig, LayoutDescriptor, SimConfig, TuningGrid
from kronfdr.services.ingest import ingest_real
from kronfdr.services.reporting import ReportWriter
from kronfdr.services.tuning import tune


def setup_logging(level: str = None, log_file: bool = True):
    """stderr at the requested level plus a rotating debug log under LOG_DIR."""
    logger.remove()
    logger.add(sys.stderr, level=(level or settings.LOG_LEVEL).upper())
    if log_file:
        settings.init_dirs()
        logger.add(
            settings.LOG_DIR / "kronfdr.log",
            rotation="10 MB",
            retention="7 days",
            level="DEBUG",
            encoding="utf-8",
            enqueue=True,
            backtrace=True,
            diagnose=False,
        )


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"{what} file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{what} file {path} is not valid JSON: {e}")
    if not isinstance(doc, dict):
        raise ConfigError(f"{what} file {path} must hold a JSON object")
    return doc


def load_config(path: str, **overrides) -> SimConfig:
    doc = _load_json(path, "Config")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SimConfig.model_validate(doc)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {path}: {e}")


def load_layout(path: str) -> LayoutDescriptor:
    try:
        return LayoutDescriptor.model_validate(_load_json(path, "Layout"))
    except ValidationError as e:
        raise ConfigError(f"Invalid layout {path}: {e}")


def parse_floats(text: str, name: str) -> List[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--{name} must be a comma-separated list of numbers, got '{text}'")
    if not values:
        raise ConfigError(f"--{name} must not be empty")
    return values


def _grid(args) -> TuningGrid:
    try:
        return TuningGrid(
            lambdas=parse_floats(args.lambdas, "lambdas") if args.lambdas else list(settings.DEFAULT_LAMBDAS),
            deltas=parse_floats(args.deltas, "deltas") if args.deltas else list(settings.DEFAULT_DELTAS),
        )
    except ValidationError as e:
        raise ConfigError(f"Invalid tuning grid: {e}")


def _output_dir(args) -> Path:
    out = Path(args.output_dir) if args.output_dir else settings.OUTPUT_DIR
    out.mkdir(parents=True, exist_ok=True)
    return out


def _alpha_sweep(ctx: ReplicationContext, alphas: List[float], labels: dict, out: Path) -> List[dict]:
    """
    Re-select at each alpha from one fit. The select step reuses the cached
    p-values, so only the step-up and the counts are recomputed.
    """
    runner = PipelineRunner()
    rows = []
    for alpha in alphas:
        runner.run(["select", "evaluate"], ctx, {"select": {"alpha": alpha}})
        stats, sels, metrics = ctx.require("statistics"), ctx.require("selections"), ctx.require("metrics")
        for axis, name in ((Axis.GAMMA, "gamma"), (Axis.OMEGA, "omega")):
            df = ReportWriter.edges_frame(stats[axis], sels[axis], labels[axis])
            ReportWriter.write_table(df, out / f"edges_{name}_alpha_{alpha:g}.csv")
        rows.append({
            "alpha": alpha,
            "a": metrics.a,
            "b": metrics.b,
            "alpha_prime": metrics.alpha_prime,
            "kron_discoveries": ctx.require("kron_support").count,
        })
        logger.info(f"alpha={alpha:g}: a={metrics.a}, b={metrics.b}, alpha'={metrics.alpha_prime:.4f}")
    ReportWriter.write_table(pd.DataFrame(rows), out / "alpha_sweep.csv")
    return rows


# ─── Commands ────────────────────────────────────────────────────────

def cmd_simulate(args) -> int:
    cfg = load_config(args.config, output_dir=args.output_dir, replications=args.replications, seed=args.seed)
    report = run_simulation(cfg)
    return 0 if report.complete else 1


def cmd_roc(args) -> int:
    cfg = load_config(args.config, output_dir=args.output_dir, replications=args.replications, seed=args.seed)
    alphas = parse_floats(args.alphas, "alphas")
    nus = parse_floats(args.nus, "nus") if args.nus else [cfg.nu]
    complete = True
    for nu in nus:
        run_cfg = cfg.model_copy(update={"nu": nu})
        if len(nus) > 1:
            run_cfg = run_cfg.model_copy(update={"output_dir": Path(cfg.output_dir) / f"nu_{nu:g}"})
        _, _, failures = run_roc(run_cfg, alphas)
        complete = complete and not failures
    return 0 if complete else 1


def cmd_estimate(args) -> int:
    layout = load_layout(args.layout)
    sweep = sorted(set(parse_floats(args.alphas, "alphas"))) if args.alphas else []
    if any(not 0 < a < 1 for a in sweep):
        raise ConfigError(f"--alphas must lie in (0, 1), got {sweep}")
    dataset = ingest_real(args.data, layout)
    out = _output_dir(args)

    select_params = {"target_alpha_prime": args.target_alpha_prime} if args.target_alpha_prime else {"alpha": args.alpha}
    ctx = ReplicationContext()
    ctx.set("dataset", dataset)
    PipelineRunner().run(DATA_STEPS, ctx, {
        "estimate": {"tuning_grid": _grid(args), "lasso": LassoConfig()},
        "select": select_params,
        "evaluate": {"materialize": args.kron_edges},
    })

    stats, sels, sups = ctx.require("statistics"), ctx.require("selections"), ctx.require("supports")
    tuning, metrics = ctx.require("tuning"), ctx.require("metrics")
    labels = {Axis.GAMMA: dataset.col_labels, Axis.OMEGA: dataset.row_labels}

    result = {
        "version": settings.APP_VERSION,
        "data": str(args.data),
        "n": dataset.n, "p": dataset.p, "q": dataset.q,
        "alpha": ctx.require("alpha"),
        "a": metrics.a, "b": metrics.b,
        "alpha_prime": metrics.alpha_prime,
        "kron_discoveries": ctx.require("kron_support").count,
        "axes": {},
    }
    choice = ctx.get("alpha_choice")
    if choice is not None:
        result["target_alpha_prime"] = args.target_alpha_prime
        result["alpha_scan"] = {
            "zero_discovery": choice.zero_discovery,
            "monotone": choice.monotone,
            "table": [{"alpha": a, "a": ca, "b": cb, "alpha_prime": ap} for a, ca, cb, ap in choice.table],
        }
    for axis, name in ((Axis.GAMMA, "gamma"), (Axis.OMEGA, "omega")):
        names = labels[axis]
        pairs = sels[axis].rejected_pairs()
        result["axes"][name] = {
            "dim": stats[axis].dim,
            "lambda": tuning[axis].lambda_hat,
            "delta": tuning[axis].delta_hat,
            "objective": tuning[axis].objective,
            "a_hat": stats[axis].a_hat,
            "k_hat": sels[axis].k_hat,
            "discoveries": sups[axis].discoveries,
            "edges": [[names[i], names[j]] if names else [i, j] for i, j in pairs],
        }
        ReportWriter.write_table(ReportWriter.edges_frame(stats[axis], sels[axis], names), out / f"edges_{name}.csv")

    kron = ctx.require("kron_support")
    if kron.edges is not None:
        ReportWriter.write_table(pd.DataFrame(kron.edges, columns=["i", "j", "k", "l"]), out / "kron_edges.csv")
    if sweep:
        result["alpha_sweep"] = _alpha_sweep(ctx, sweep, labels, out)
    ReportWriter.write_json(result, out / "estimate.json")
    logger.success(f"Estimate written to {out}: a={metrics.a}, b={metrics.b}, alpha'={metrics.alpha_prime:.4f}")
    return 0


def cmd_tune(args) -> int:
    layout = load_layout(args.layout)
    dataset = ingest_real(args.data, layout)
    out = _output_dir(args)
    grid = _grid(args)

    result = {"version": settings.APP_VERSION, "lambdas": grid.lambdas, "deltas": grid.deltas, "axes": {}}
    for axis, name in ((Axis.GAMMA, "gamma"), (Axis.OMEGA, "omega")):
        tr = tune(dataset, grid, LassoConfig(), axis=axis)
        result["axes"][name] = {
            "lambda": tr.lambda_hat,
            "delta": tr.delta_hat,
            "objective": tr.objective,
            "objective_table": tr.objective_table.tolist(),
        }
        rows = [
            {"lambda": lam, "delta": delta, "objective": float(tr.objective_table[i, j])}
            for i, lam in enumerate(tr.lambdas) for j, delta in enumerate(tr.deltas)
        ]
        ReportWriter.write_table(pd.DataFrame(rows, columns=["lambda", "delta", "objective"]), out / f"tuning_{name}.csv")
    ReportWriter.write_json(result, out / "tuning.json")
    return 0


def cmd_study(args) -> int:
    out = _output_dir(args)
    if args.study == "null":
        summary = null_normality_study(
            n=args.n, p=args.p, q=args.q,
            omega_kind=GraphKind(kind=args.kind),
            replications=args.replications, seed=args.seed,
            use_oracle_a=not args.estimated_a,
            lam=args.lam if args.lam is not None else 2.0,
            delta=args.delta, max_workers=args.workers,
        )
        ReportWriter.write_json(summary, out / "null_study.json")
    else:
        sizes = [int(s) for s in parse_floats(args.sizes, "sizes")]
        rows = ratio_study(
            n=args.n, sizes=sizes, kind=GraphKind(kind=args.kind),
            lam=args.lam, replications=args.replications, seed=args.seed,
            max_workers=args.workers,
        )
        ReportWriter.write_json({"n": args.n, "kind": args.kind, "lam": args.lam, "sizes": rows}, out / "ratio_study.json")
    return 0


# ─── Parser ──────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kronfdr", description="FDR-controlled support recovery for matrix-variate Gaussian graphs")
    parser.add_argument("--log-level", default=None, help="stderr log level (default: settings.LOG_LEVEL)")
    parser.add_argument("--no-log-file", action="store_true", help="do not write the rotating log file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_run(p):
        p.add_argument("--config", required=True, help="experiment JSON document")
        p.add_argument("--output-dir", default=None)
        p.add_argument("--replications", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)

    p_sim = sub.add_parser("simulate", help="replicated simulation with FDP/power report")
    common_run(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_roc = sub.add_parser("roc", help="FDP vs power over an alpha grid")
    common_run(p_roc)
    p_roc.add_argument("--alphas", required=True, help="comma-separated alpha grid")
    p_roc.add_argument("--nus", default=None, help="comma-separated perturbation levels, one ROC run each")
    p_roc.set_defaults(func=cmd_roc)

    def common_data(p):
        p.add_argument("--data", required=True, help="data directory or long-format file")
        p.add_argument("--layout", required=True, help="layout descriptor JSON")
        p.add_argument("--output-dir", default=None)
        p.add_argument("--lambdas", default=None)
        p.add_argument("--deltas", default=None)

    p_est = sub.add_parser("estimate", help="estimate both supports on real data")
    common_data(p_est)
    p_est.add_argument("--alpha", type=float, default=0.1)
    p_est.add_argument("--target-alpha-prime", type=float, default=None)
    p_est.add_argument("--alphas", default=None, help="comma-separated alphas re-selected from the same fit")
    p_est.add_argument("--kron-edges", action="store_true", help="also list the joint Kronecker edges")
    p_est.set_defaults(func=cmd_estimate)

    p_tune = sub.add_parser("tune", help="objective tables of the (lambda, delta) scan")
    common_data(p_tune)
    p_tune.set_defaults(func=cmd_tune)

    p_study = sub.add_parser("study", help="null-normality and A_p ratio studies")
    p_study.add_argument("study", choices=["null", "ratio"])
    p_study.add_argument("--n", type=int, default=20)
    p_study.add_argument("--p", type=int, default=500)
    p_study.add_argument("--q", type=int, default=50)
    p_study.add_argument("--kind", choices=["hub", "band", "random"], default="band")
    p_study.add_argument("--sizes", default="50,100,200")
    p_study.add_argument("--lam", type=float, default=None)
    p_study.add_argument("--delta", type=float, default=2.0)
    p_study.add_argument("--estimated-a", action="store_true", help="null study: use A_hat instead of the oracle")
    p_study.add_argument("--replications", type=int, default=20)
    p_study.add_argument("--seed", type=int, default=0)
    p_study.add_argument("--workers", type=int, default=settings.MAX_WORKERS)
    p_study.add_argument("--output-dir", default=None)
    p_study.set_defaults(func=cmd_study)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, log_file=not args.no_log_file)
    logger.info(f"{settings.APP_NAME} v{settings.APP_VERSION}: {args.command}")
    try:
        return args.func(args)
    except KronFdrError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except ValueError as e:
        logger.warning(f"Invalid input: {e}")
        return ConfigError.exit_code
    except Exception as e:
        logger.exception(f"Unhandled error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
