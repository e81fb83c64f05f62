from pathlib import Path
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kronfdr.config import settings

# smallest p or q the tail-count tuning objective accepts
MIN_TUNING_DIM = 5


class GraphKind(BaseModel):
    """Graph family for a generated precision matrix."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["hub", "band", "random"] = "hub"
    factor: float = Field(default=1.0, gt=0, description="Signal-strength divisor f")
    edge_prob_cap: float = Field(default=0.05, gt=0, le=1, description="Random graph: edge prob = min(cap, 5/dim)")


class LassoConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    delta: float = Field(default=2.0, ge=0)
    max_sweeps: int = Field(default_factory=lambda: settings.LASSO_MAX_SWEEPS, ge=1)
    kkt_tol: float = Field(default_factory=lambda: settings.LASSO_KKT_TOL, gt=0)
    coord_tol: float = Field(default_factory=lambda: settings.LASSO_COORD_TOL, gt=0)


class TuningGrid(BaseModel):
    """(lambda, delta) candidates. Stored ascending and de-duplicated."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    lambdas: List[float] = Field(default_factory=lambda: list(settings.DEFAULT_LAMBDAS))
    deltas: List[float] = Field(default_factory=lambda: list(settings.DEFAULT_DELTAS))

    @field_validator("lambdas", "deltas")
    @classmethod
    def normalize(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("tuning grid must not be empty")
        if any(x < 0 for x in v):
            raise ValueError("tuning grid values must be >= 0")
        return sorted(set(float(x) for x in v))


class SimConfig(BaseModel):
    """One simulation experiment. Unknown keys are rejected to catch typos."""
    model_config = ConfigDict(extra="forbid")

    n: int = Field(default=100, ge=2)
    p: int = Field(default=100, ge=MIN_TUNING_DIM, description="Tuning needs at least 5 rows")
    q: int = Field(default=100, ge=MIN_TUNING_DIM, description="Tuning needs at least 5 columns")
    omega_kind: GraphKind = Field(default_factory=GraphKind)
    gamma_kind: GraphKind = Field(default_factory=GraphKind)
    alpha: float = Field(default=0.1, gt=0, lt=1)
    target_alpha_prime: Optional[float] = Field(default=None, gt=0, lt=1)
    replications: int = Field(default_factory=lambda: settings.DEFAULT_REPLICATIONS, ge=1)
    seed: int = Field(default=0, ge=0)
    nu: float = Field(default=0.0, ge=0)
    tuning_grid: TuningGrid = Field(default_factory=TuningGrid)
    lasso: LassoConfig = Field(default_factory=LassoConfig)
    output_dir: Path = Field(default_factory=lambda: settings.OUTPUT_DIR)
    write_edges: bool = False
    max_workers: int = Field(default_factory=lambda: settings.MAX_WORKERS, ge=1)


class LayoutDescriptor(BaseModel):
    """
    How a directory of real data maps onto (time, row, column).

    kind="matrix_files": one CSV per time point, each a p x q grid; files are
        ordered by name after matching ``pattern``.
    kind="long": a single CSV (``file``) with one value per (time, row, column).
    """
    model_config = ConfigDict(extra="forbid")

    kind: Literal["matrix_files", "long"] = "matrix_files"
    pattern: str = "*.csv"
    header: bool = False
    index_column: bool = False
    file: Optional[str] = None
    time_column: str = "time"
    row_column: str = "row"
    column_column: str = "column"
    value_column: str = "value"
    log_transform: bool = True
    difference: bool = True

    @model_validator(mode="after")
    def check_long_file(self):
        if self.kind == "long" and not self.file:
            raise ValueError("layout kind 'long' requires 'file'")
        return self


class ReplicationRecord(BaseModel):
    replication: int
    seed: int
    a: int
    b: int
    a0: int
    b0: int
    fdp_omega: float
    fdp_gamma: float
    fdp_joint: float
    alpha_prime: float
    power: float
    alpha: float
    lambda_omega: float
    delta_omega: float
    lambda_gamma: float
    delta_gamma: float
    wall_time: float = 0.0


# Column order of replications.csv. wall_time is kept out so the file is
# reproducible byte for byte; timings go to summary.json.
RECORD_COLUMNS: List[str] = [
    name for name in ReplicationRecord.model_fields if name != "wall_time"
]
AGGREGATE_COLUMNS: List[str] = [
    "a", "b", "a0", "b0", "fdp_omega", "fdp_gamma", "fdp_joint", "alpha_prime", "power",
]


class FailedReplication(BaseModel):
    replication: int
    seed: int
    error: str


class RunReport(BaseModel):
    config: SimConfig
    records: List[ReplicationRecord] = []
    failures: List[FailedReplication] = []

    @property
    def complete(self) -> bool:
        return not self.failures and len(self.records) == self.config.replications

    def aggregates(self) -> Dict[str, Dict[str, Optional[float]]]:
        """Mean and sample standard deviation of every metric column."""
        records = sorted(self.records, key=lambda r: r.replication)
        out: Dict[str, Dict[str, Optional[float]]] = {}
        for col in AGGREGATE_COLUMNS:
            values = np.array([getattr(r, col) for r in records], dtype=float)
            if values.size == 0:
                out[col] = {"mean": None, "sd": None}
                continue
            sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
            out[col] = {"mean": float(values.mean()), "sd": sd}
        return out
