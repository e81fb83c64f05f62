"""
Real-data ingestion: CSV matrices indexed by time -> Dataset.

Preprocessing is y = log(x + 1) entrywise followed by a lag-one difference
along time, so T time points give n = T - 1 observations. Both steps can be
switched off in the layout descriptor for data that is already stationary.
"""
import re
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from kronfdr.errors import DataError
from kronfdr.models.matrices import Dataset
from kronfdr.models.schemas import LayoutDescriptor

_TOKENIZER_ERROR = re.compile(r"Expected (\d+) fields in line (\d+), saw \d+")


def _first_bad_cell(numeric: pd.DataFrame) -> Optional[Tuple[int, int]]:
    bad = np.argwhere(numeric.isna().to_numpy())
    if bad.size == 0:
        return None
    return int(bad[0][0]), int(bad[0][1])


def _overlong_row(message: str, layout: LayoutDescriptor) -> Tuple[Optional[int], Optional[int]]:
    """
    (row, column) of the first surplus field from the C tokenizer's
    "Expected N fields in line L, saw M" message, in data-frame coordinates.
    """
    m = _TOKENIZER_ERROR.search(message)
    if m is None:
        return None, None
    expected, line = int(m.group(1)), int(m.group(2))
    row = line - 1 - (1 if layout.header else 0)
    col = expected - (1 if layout.index_column else 0)
    return row, col


def _read_matrix(path: Path, layout: LayoutDescriptor) -> Tuple[np.ndarray, List[str], List[str]]:
    try:
        raw = pd.read_csv(
            path,
            header=0 if layout.header else None,
            index_col=0 if layout.index_column else None,
            dtype=str,
            skip_blank_lines=True,
        )
    except pd.errors.ParserError as e:
        row, col = _overlong_row(str(e), layout)
        raise DataError(f"Cannot parse matrix file: {str(e).strip()}", file=str(path), row=row, column=col)
    except (pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"Cannot parse matrix file: {e}", file=str(path))

    numeric = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    cell = _first_bad_cell(numeric)
    if cell is not None:
        row, col = cell
        value = raw.iat[row, col]
        what = "Missing cell (ragged row?)" if pd.isna(value) else f"Non-numeric cell '{value}'"
        raise DataError(what, file=str(path), row=row, column=col)

    rows = [str(x) for x in raw.index]
    cols = [str(x) for x in raw.columns]
    return numeric.to_numpy(dtype=float), rows, cols


def _load_matrix_files(root: Path, layout: LayoutDescriptor) -> Tuple[np.ndarray, List[str], List[str], List[str]]:
    files = sorted(p for p in root.glob(layout.pattern) if p.is_file())
    if not files:
        raise DataError(f"No files matching '{layout.pattern}'", file=str(root))

    mats, sources = [], []
    row_labels = col_labels = None
    for path in files:
        m, rows, cols = _read_matrix(path, layout)
        if mats and m.shape != mats[0].shape:
            raise DataError(
                f"Matrix shape {m.shape} differs from {mats[0].shape} in {files[0].name}", file=str(path)
            )
        if row_labels is None:
            row_labels, col_labels = rows, cols
        mats.append(m)
        sources.append(str(path))
    logger.info(f"Read {len(files)} matrix files of shape {mats[0].shape} from {root}")
    return np.stack(mats), row_labels, col_labels, sources


def _load_long(root: Path, layout: LayoutDescriptor) -> Tuple[np.ndarray, List[str], List[str], List[str]]:
    path = root if root.is_file() else root / layout.file
    try:
        df = pd.read_csv(path, dtype=str)
    except FileNotFoundError:
        raise DataError("Long-format data file not found", file=str(path))
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"Cannot parse long-format file: {e}", file=str(path))

    needed = [layout.time_column, layout.row_column, layout.column_column, layout.value_column]
    missing = [c for c in needed if c not in df.columns]
    if missing:
        raise DataError(f"Missing columns {missing}", file=str(path))

    values = pd.to_numeric(df[layout.value_column].str.strip(), errors="coerce")
    bad = np.flatnonzero(values.isna().to_numpy())
    if bad.size:
        raise DataError(
            f"Non-numeric value '{df[layout.value_column].iat[bad[0]]}'",
            file=str(path), row=int(bad[0]), column=layout.value_column,
        )

    keys = df[[layout.time_column, layout.row_column, layout.column_column]]
    dup = np.flatnonzero(keys.duplicated().to_numpy())
    if dup.size:
        raise DataError("Duplicate (time, row, column) entry", file=str(path), row=int(dup[0]))

    times = sorted(pd.unique(df[layout.time_column]), key=_sort_key)
    rows = list(pd.unique(df[layout.row_column]))
    cols = list(pd.unique(df[layout.column_column]))
    expected = len(times) * len(rows) * len(cols)
    if len(df) != expected:
        raise DataError(
            f"Incomplete grid: {len(df)} entries for {len(times)} times x {len(rows)} rows x {len(cols)} columns",
            file=str(path),
        )

    t_idx = pd.Index(times).get_indexer(df[layout.time_column])
    r_idx = pd.Index(rows).get_indexer(df[layout.row_column])
    c_idx = pd.Index(cols).get_indexer(df[layout.column_column])
    out = np.empty((len(times), len(rows), len(cols)))
    out[t_idx, r_idx, c_idx] = values.to_numpy(dtype=float)
    logger.info(f"Read long-format data: {len(times)} times, {len(rows)} rows, {len(cols)} columns from {path}")
    return out, [str(r) for r in rows], [str(c) for c in cols], [str(path)] * len(times)


def _sort_key(value: str):
    """Numeric time stamps sort numerically, anything else lexically."""
    try:
        return 0, float(value), ""
    except ValueError:
        return 1, 0.0, value


def preprocess(x: np.ndarray, log_transform: bool = True, difference: bool = True, sources: Optional[List[str]] = None) -> np.ndarray:
    """log(x + 1) then first differences along axis 0."""
    if log_transform:
        bad = np.argwhere(x <= -1)
        if bad.size:
            t, row, col = (int(v) for v in bad[0])
            raise DataError(
                f"Value {x[t, row, col]} <= -1, log(x + 1) is undefined",
                file=sources[t] if sources else None, row=row, column=col,
            )
        x = np.log1p(x)
    if difference:
        x = np.diff(x, axis=0)
    return x


def ingest_real(path, layout: LayoutDescriptor) -> Dataset:
    root = Path(path)
    if not root.exists():
        raise DataError("Data path does not exist", file=str(root))

    if layout.kind == "matrix_files":
        raw, row_labels, col_labels, sources = _load_matrix_files(root, layout)
    else:
        raw, row_labels, col_labels, sources = _load_long(root, layout)

    samples = preprocess(raw, layout.log_transform, layout.difference, sources)
    if samples.shape[0] < 2:
        raise DataError(f"Need at least 2 observations after preprocessing, got {samples.shape[0]}", file=str(root))
    logger.success(f"Ingested dataset n={samples.shape[0]}, p={samples.shape[1]}, q={samples.shape[2]}")
    return Dataset(samples=samples, row_labels=row_labels, col_labels=col_labels)
