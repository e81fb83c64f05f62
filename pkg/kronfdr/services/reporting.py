"""
Report writer: CSV/JSON result files for simulations, ROC sweeps and real-data runs.

CSV files are written by pandas (header always present, '.' decimals, floats
at full round-trip precision). Everything except the timestamp and timings
in summary.json is a deterministic function of the config.
"""
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from kronfdr.config import settings
from kronfdr.errors import KronFdrError
from kronfdr.models.matrices import BhSelection, TestMatrix
from kronfdr.models.schemas import AGGREGATE_COLUMNS, RECORD_COLUMNS, ReplicationRecord, RunReport

EDGE_COLUMNS = ["i", "j", "t", "p", "rejected"]


class ReportWriter:
    @staticmethod
    def write_table(df: pd.DataFrame, path: Path) -> Path:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            df.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
        except OSError as e:
            logger.error(f"Failed to write {path}: {e}")
            raise
        return path

    @staticmethod
    def write_json(payload: dict, path: Path) -> Path:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2, ensure_ascii=False)
        except OSError as e:
            logger.error(f"Failed to write {path}: {e}")
            raise
        return path

    @staticmethod
    def records_frame(records: Sequence[ReplicationRecord]) -> pd.DataFrame:
        rows = [r.model_dump(include=set(RECORD_COLUMNS)) for r in sorted(records, key=lambda r: r.replication)]
        return pd.DataFrame(rows, columns=RECORD_COLUMNS)

    @staticmethod
    def edges_frame(tm: TestMatrix, sel: BhSelection, labels: Optional[List[str]] = None) -> pd.DataFrame:
        """One row per unordered pair i < j, in the p-value set's order."""
        pv = sel.pvalues
        if pv.dim != tm.dim:
            raise ValueError(f"Selection dim {pv.dim} does not match statistics dim {tm.dim}")
        df = pd.DataFrame({
            "i": pv.rows,
            "j": pv.cols,
            "t": tm.t[pv.rows, pv.cols],
            "p": pv.values,
            "rejected": sel.rejected,
        }, columns=EDGE_COLUMNS)
        if labels is not None:
            df["label_i"] = [labels[k] for k in pv.rows]
            df["label_j"] = [labels[k] for k in pv.cols]
        return df

    @staticmethod
    def check_aggregates(csv_path: Path, aggregates: Dict[str, Dict[str, Optional[float]]]) -> None:
        """Recompute mean/sd from the CSV just written and compare with the summary."""
        df = pd.read_csv(csv_path)
        for col in AGGREGATE_COLUMNS:
            values = df[col].to_numpy(dtype=float)
            expected = aggregates[col]
            if values.size == 0:
                if expected["mean"] is not None:
                    raise KronFdrError(f"Aggregate for '{col}' present but {csv_path} has no rows")
                continue
            sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
            if abs(float(values.mean()) - expected["mean"]) > 1e-12 or abs(sd - expected["sd"]) > 1e-12:
                raise KronFdrError(f"Aggregate for '{col}' does not match {csv_path}")

    @staticmethod
    def summary_payload(report: RunReport, extra: Optional[dict] = None) -> dict:
        records = sorted(report.records, key=lambda r: r.replication)
        cfg = report.config
        payload = {
            "app": settings.APP_NAME,
            "version": settings.APP_VERSION,
            "rng_algorithm": settings.RNG_ALGORITHM,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "config": cfg.model_dump(mode="json"),
            "grids": {"lambdas": list(cfg.tuning_grid.lambdas), "deltas": list(cfg.tuning_grid.deltas)},
            "base_seed": cfg.seed,
            "replication_seeds": [r.seed for r in records],
            "replications": len(records),
            "failed": len(report.failures),
            "failures": [f.model_dump() for f in sorted(report.failures, key=lambda f: f.replication)],
            "complete": report.complete,
            "aggregates": report.aggregates(),
            "wall_time": {
                "total": float(sum(r.wall_time for r in records)),
                "per_replication": [r.wall_time for r in records],
            },
        }
        if extra:
            payload.update(extra)
        return payload


def emit_report(
    report: RunReport,
    out_dir,
    edges: Optional[Dict[str, tuple]] = None,
    extra: Optional[dict] = None,
) -> List[Path]:
    """
    Write replications.csv and summary.json, plus edges_<axis>.csv for each
    entry of ``edges`` (axis name -> (TestMatrix, BhSelection[, labels])).
    """
    out = Path(out_dir)
    written = []

    csv_path = ReportWriter.write_table(ReportWriter.records_frame(report.records), out / "replications.csv")
    written.append(csv_path)

    payload = ReportWriter.summary_payload(report, extra)
    ReportWriter.check_aggregates(csv_path, payload["aggregates"])
    written.append(ReportWriter.write_json(payload, out / "summary.json"))

    for axis, item in (edges or {}).items():
        tm, sel, *rest = item
        labels = rest[0] if rest else None
        df = ReportWriter.edges_frame(tm, sel, labels)
        written.append(ReportWriter.write_table(df, out / f"edges_{axis}.csv"))

    status = "complete" if report.complete else f"incomplete ({len(report.failures)} failed)"
    logger.success(f"Report written to {out}: {len(report.records)} replications, {status}")
    return written


def roc_frames(rows: List[dict]) -> tuple:
    """Per-replication ROC rows -> (mean curve, per-replication table), both sorted."""
    per_rep = pd.DataFrame(rows, columns=["replication", "seed", "alpha", "a", "b", "alpha_prime", "fdp", "power"])
    per_rep = per_rep.sort_values(["replication", "alpha"], kind="mergesort").reset_index(drop=True)
    curve = (
        per_rep.groupby("alpha", sort=True)[["fdp", "power", "alpha_prime"]]
        .mean()
        .reset_index()
    )
    if per_rep.empty:
        curve = pd.DataFrame(columns=["alpha", "fdp", "power", "alpha_prime"])
    return curve, per_rep


def pooled_summary(values: np.ndarray, z: float = 1.959963984540054) -> dict:
    """Mean, variance and two-sided tail frequency of pooled statistics."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return {"count": 0, "mean": None, "variance": None, "tail_frequency": None}
    return {
        "count": int(values.size),
        "mean": float(values.mean()),
        "variance": float(values.var(ddof=1)) if values.size > 1 else 0.0,
        "tail_frequency": float(np.mean(np.abs(values) >= z)),
    }
