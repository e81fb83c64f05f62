"""
Error hierarchy shared by the library and the CLI.

Every error is a ValueError so callers that only care about "bad input"
can keep catching ValueError. The CLI maps each class to an exit code.
"""
from typing import Optional, Union


class KronFdrError(ValueError):
    exit_code: int = 1


class ConfigError(KronFdrError):
    """Invalid experiment configuration or CLI arguments."""
    exit_code = 2


class DataError(KronFdrError):
    """Malformed input data; carries the location of the offending cell when known."""
    exit_code = 3

    def __init__(self, message: str, file: Optional[str] = None, row: Optional[int] = None, column: Optional[Union[int, str]] = None):
        self.file = file
        self.row = row
        self.column = column
        where = []
        if file is not None:
            where.append(f"file={file}")
        if row is not None:
            where.append(f"row={row}")
        if column is not None:
            where.append(f"column={column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class DegenerateDataError(KronFdrError):
    """Numerically degenerate input: zero variance, non-PD matrix, zero trace."""
    exit_code = 4

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message)


class ConvergenceError(KronFdrError):
    """The Lasso solver ran out of sweeps before meeting its KKT certificate."""
    exit_code = 4

    def __init__(self, message: str, kkt_residual: float, sweeps: int):
        self.kkt_residual = kkt_residual
        self.sweeps = sweeps
        super().__init__(f"{message} (kkt_residual={kkt_residual:.3e}, sweeps={sweeps})")
