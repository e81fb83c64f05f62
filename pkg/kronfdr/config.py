from pathlib import Path
from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # App Info
    APP_NAME: str = "KronFDR"
    APP_VERSION: str = "0.1.0"

    # Paths
    BASE_DIR: Path = Path(__file__).resolve().parent.parent
    OUTPUT_DIR: Path = BASE_DIR / "output"
    LOG_DIR: Path = BASE_DIR / "logs"
    LOG_LEVEL: str = "INFO"

    # Replication pool
    MAX_WORKERS: int = 4
    DEFAULT_REPLICATIONS: int = 30
    RNG_ALGORITHM: str = "PCG64"

    # Lasso solver (KKT residual is the convergence contract)
    LASSO_MAX_SWEEPS: int = 10000
    LASSO_COORD_TOL: float = 1e-7
    LASSO_KKT_TOL: float = 1e-6

    # Numerical guards
    R_DIAG_FLOOR: float = 1e-12
    KRON_CAP: int = 4_000_000

    # (lambda, delta) scan used when an experiment does not name its own grid
    DEFAULT_LAMBDAS: List[float] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    DEFAULT_DELTAS: List[float] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]

    model_config = SettingsConfigDict(
        env_prefix="KRONFDR_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    def init_dirs(self):
        """Ensure output and log directories exist."""
        for path in [self.OUTPUT_DIR, self.LOG_DIR]:
            path.mkdir(parents=True, exist_ok=True)


settings = Settings()
