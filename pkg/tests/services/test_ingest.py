import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from kronfdr.errors import DataError
from kronfdr.models.schemas import LayoutDescriptor
from kronfdr.services.ingest import ingest_real, preprocess


def _write_matrices(root, arrays, header=False):
    root.mkdir(parents=True, exist_ok=True)
    for t, arr in enumerate(arrays):
        df = pd.DataFrame(arr, columns=[f"c{j}" for j in range(arr.shape[1])])
        df.to_csv(root / f"t{t:03d}.csv", index=False, header=header)
    return root


def test_forty_years_become_thirty_nine_observations(tmp_path):
    rng = np.random.default_rng(0)
    arrays = [rng.uniform(0, 100, (3, 4)) for _ in range(40)]
    d = ingest_real(_write_matrices(tmp_path / "data", arrays), LayoutDescriptor())
    assert (d.n, d.p, d.q) == (39, 3, 4)
    expected = np.diff(np.log1p(np.stack(arrays)), axis=0)
    assert np.allclose(d.samples, expected)


def test_constant_series_differences_to_zero(tmp_path):
    arrays = [np.full((2, 3), 7.0) for _ in range(5)]
    d = ingest_real(_write_matrices(tmp_path / "data", arrays), LayoutDescriptor())
    assert np.all(d.samples == 0.0)


def test_zero_entries_are_valid(tmp_path):
    arrays = [np.zeros((2, 2)), np.ones((2, 2)), np.zeros((2, 2))]
    d = ingest_real(_write_matrices(tmp_path / "data", arrays), LayoutDescriptor())
    assert d.samples[0, 0, 0] == pytest.approx(np.log(2.0))


def test_header_gives_column_labels(tmp_path):
    arrays = [np.full((2, 3), float(t)) for t in range(4)]
    d = ingest_real(_write_matrices(tmp_path / "data", arrays, header=True), LayoutDescriptor(header=True))
    assert d.col_labels == ["c0", "c1", "c2"]


def test_log_undefined_reports_location(tmp_path):
    arrays = [np.ones((2, 2)) for _ in range(3)]
    arrays[1][0, 1] = -1.0
    root = _write_matrices(tmp_path / "data", arrays)
    with pytest.raises(DataError) as exc:
        ingest_real(root, LayoutDescriptor())
    assert exc.value.file.endswith("t001.csv")
    assert (exc.value.row, exc.value.column) == (0, 1)


def test_ragged_file_is_rejected(tmp_path):
    root = _write_matrices(tmp_path / "data", [np.ones((2, 3)), np.ones((2, 3))])
    (root / "t002.csv").write_text("1,2,3\n4,5\n", encoding="utf-8")
    with pytest.raises(DataError) as exc:
        ingest_real(root, LayoutDescriptor())
    assert exc.value.file.endswith("t002.csv")
    assert (exc.value.row, exc.value.column) == (1, 2)


def test_overlong_row_reports_location(tmp_path):
    root = _write_matrices(tmp_path / "data", [np.ones((2, 3)), np.ones((2, 3))])
    (root / "t002.csv").write_text("1,2,3\n4,5,6,7\n", encoding="utf-8")
    with pytest.raises(DataError) as exc:
        ingest_real(root, LayoutDescriptor())
    assert exc.value.file.endswith("t002.csv")
    assert (exc.value.row, exc.value.column) == (1, 3)


def test_overlong_row_location_skips_header(tmp_path):
    root = _write_matrices(tmp_path / "data", [np.ones((3, 3)), np.ones((3, 3))], header=True)
    (root / "t002.csv").write_text("c0,c1,c2\n1,2,3\n4,5,6\n7,8,9,10\n", encoding="utf-8")
    with pytest.raises(DataError) as exc:
        ingest_real(root, LayoutDescriptor(header=True))
    assert (exc.value.row, exc.value.column) == (2, 3)


def test_shape_mismatch_is_rejected(tmp_path):
    root = _write_matrices(tmp_path / "data", [np.ones((2, 3)), np.ones((3, 3))])
    with pytest.raises(DataError):
        ingest_real(root, LayoutDescriptor())


def test_non_numeric_cell(tmp_path):
    root = _write_matrices(tmp_path / "data", [np.ones((2, 2)), np.ones((2, 2))])
    (root / "t002.csv").write_text("1,2\n3,abc\n", encoding="utf-8")
    with pytest.raises(DataError) as exc:
        ingest_real(root, LayoutDescriptor())
    assert "abc" in str(exc.value)
    assert (exc.value.row, exc.value.column) == (1, 1)


def test_no_matching_files(tmp_path):
    (tmp_path / "empty").mkdir()
    with pytest.raises(DataError):
        ingest_real(tmp_path / "empty", LayoutDescriptor())


def test_long_layout(tmp_path):
    rows = []
    for t in range(4):
        for r in ("east", "west"):
            for c in ("corn", "soy", "wheat"):
                rows.append({"year": 2000 + t, "region": r, "product": c, "value": t * 10 + (r == "west") + 0.5})
    path = tmp_path / "long.csv"
    pd.DataFrame(rows).sample(frac=1.0, random_state=1).to_csv(path, index=False)
    layout = LayoutDescriptor(
        kind="long", file="long.csv",
        time_column="year", row_column="region", column_column="product", value_column="value",
        log_transform=False,
    )
    d = ingest_real(tmp_path, layout)
    assert (d.n, d.p, d.q) == (3, 2, 3)
    assert np.allclose(d.samples, 10.0)
    assert sorted(d.row_labels) == ["east", "west"]


def test_long_layout_incomplete_grid(tmp_path):
    path = tmp_path / "long.csv"
    pd.DataFrame({"time": [1, 1, 2], "row": ["a", "a", "a"], "column": ["x", "y", "x"], "value": [1, 2, 3]}).to_csv(path, index=False)
    with pytest.raises(DataError):
        ingest_real(path, LayoutDescriptor(kind="long", file="long.csv"))


def test_long_layout_needs_file():
    with pytest.raises(ValidationError):
        LayoutDescriptor(kind="long")


def test_preprocess_switches():
    x = np.arange(12, dtype=float).reshape(3, 2, 2)
    assert np.array_equal(preprocess(x, log_transform=False, difference=False), x)
    assert np.allclose(preprocess(x, log_transform=False), 4.0)
