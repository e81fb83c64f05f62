import json
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

from kronfdr.core import simulation
from kronfdr.main import main, parse_floats
from kronfdr.errors import ConfigError


def _write_config(tmp_path, **fields):
    doc = {
        "n": 20, "p": 8, "q": 8,
        "omega_kind": {"kind": "band"}, "gamma_kind": {"kind": "band"},
        "replications": 1, "seed": 3,
        "tuning_grid": {"lambdas": [2.0], "deltas": [2.0]},
        "output_dir": str(tmp_path / "out"),
    }
    doc.update(fields)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def _write_data(tmp_path, times=25, p=6, q=7, constant_column=None):
    rng = np.random.default_rng(0)
    root = tmp_path / "data"
    root.mkdir()
    for t in range(times):
        m = np.exp(rng.standard_normal((p, q)))
        if constant_column is not None:
            m[:, constant_column] = 3.0
        pd.DataFrame(m).to_csv(root / f"{t:02d}.csv", index=False, header=False)
    layout = tmp_path / "layout.json"
    layout.write_text(json.dumps({"kind": "matrix_files"}), encoding="utf-8")
    return root, layout


def _run(*argv):
    return main(["--no-log-file", "--log-level", "WARNING", *argv])


@pytest.mark.integration
def test_simulate_writes_report(tmp_path):
    cfg = _write_config(tmp_path)
    assert _run("simulate", "--config", str(cfg)) == 0
    assert (tmp_path / "out" / "replications.csv").exists()
    summary = json.loads((tmp_path / "out" / "summary.json").read_text(encoding="utf-8"))
    assert summary["complete"] is True
    assert summary["config"]["seed"] == 3


def test_unknown_config_key_is_a_config_error(tmp_path):
    cfg = _write_config(tmp_path, replicatoins=3)
    assert _run("simulate", "--config", str(cfg)) == 2


def test_config_below_tuning_dimension(tmp_path):
    cfg = _write_config(tmp_path, p=4)
    assert _run("simulate", "--config", str(cfg)) == 2
    assert not (tmp_path / "out" / "replications.csv").exists()


def test_missing_config_file(tmp_path):
    assert _run("simulate", "--config", str(tmp_path / "nope.json")) == 2


def test_invalid_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{not json", encoding="utf-8")
    assert _run("simulate", "--config", str(path)) == 2


@pytest.mark.integration
def test_roc_command(tmp_path):
    cfg = _write_config(tmp_path)
    assert _run("roc", "--config", str(cfg), "--alphas", "0.05,0.1,0.2") == 0
    curve = pd.read_csv(tmp_path / "out" / "roc.csv")
    assert curve["alpha"].tolist() == [0.05, 0.1, 0.2]


@pytest.mark.integration
def test_roc_perturbation_levels(tmp_path):
    cfg = _write_config(tmp_path)
    assert _run("roc", "--config", str(cfg), "--alphas", "0.1", "--nus", "0,0.5") == 0
    assert (tmp_path / "out" / "nu_0" / "roc.csv").exists()
    assert (tmp_path / "out" / "nu_0.5" / "roc.csv").exists()


def test_roc_with_failed_replication_exits_one(tmp_path):
    cfg = _write_config(tmp_path, replications=2)
    real = simulation.run_replication

    def flaky(run_cfg, r, *args, **kwargs):
        if r == 1:
            raise ValueError("degenerate draw")
        return real(run_cfg, r, *args, **kwargs)

    with patch.object(simulation, "run_replication", side_effect=flaky):
        assert _run("roc", "--config", str(cfg), "--alphas", "0.1") == 1
    summary = json.loads((tmp_path / "out" / "roc_summary.json").read_text(encoding="utf-8"))
    assert summary["failed"] == 1
    assert summary["complete"] is False


@pytest.mark.integration
def test_estimate_on_matrix_files(tmp_path):
    root, layout = _write_data(tmp_path)
    out = tmp_path / "est"
    code = _run("estimate", "--data", str(root), "--layout", str(layout), "--alpha", "0.1",
                "--lambdas", "2", "--deltas", "2", "--output-dir", str(out), "--kron-edges")
    assert code == 0
    result = json.loads((out / "estimate.json").read_text(encoding="utf-8"))
    assert (result["n"], result["p"], result["q"]) == (24, 6, 7)
    assert result["axes"]["gamma"]["dim"] == 7
    assert len(pd.read_csv(out / "edges_omega.csv")) == 15
    assert (out / "kron_edges.csv").exists()


@pytest.mark.integration
def test_estimate_with_target_alpha_prime(tmp_path):
    root, layout = _write_data(tmp_path)
    out = tmp_path / "est"
    code = _run("estimate", "--data", str(root), "--layout", str(layout), "--target-alpha-prime", "0.1",
                "--lambdas", "2", "--deltas", "2", "--output-dir", str(out))
    assert code == 0
    result = json.loads((out / "estimate.json").read_text(encoding="utf-8"))
    assert result["target_alpha_prime"] == 0.1
    assert len(result["alpha_scan"]["table"]) == 50


@pytest.mark.integration
def test_estimate_alpha_sweep_reuses_one_fit(tmp_path):
    root, layout = _write_data(tmp_path)
    out = tmp_path / "est"
    code = _run("estimate", "--data", str(root), "--layout", str(layout), "--alpha", "0.1",
                "--alphas", "0.3,0.1,0.2", "--lambdas", "2", "--deltas", "2", "--output-dir", str(out))
    assert code == 0
    result = json.loads((out / "estimate.json").read_text(encoding="utf-8"))
    sweep = result["alpha_sweep"]
    assert [row["alpha"] for row in sweep] == [0.1, 0.2, 0.3]
    # BH rejections only grow with alpha
    assert [row["a"] for row in sweep] == sorted(row["a"] for row in sweep)
    assert [row["b"] for row in sweep] == sorted(row["b"] for row in sweep)
    assert (sweep[0]["a"], sweep[0]["b"]) == (result["a"], result["b"])
    for alpha in ("0.1", "0.2", "0.3"):
        assert len(pd.read_csv(out / f"edges_gamma_alpha_{alpha}.csv")) == 21
        assert len(pd.read_csv(out / f"edges_omega_alpha_{alpha}.csv")) == 15
    assert len(pd.read_csv(out / "alpha_sweep.csv")) == 3


def test_estimate_alpha_sweep_out_of_range(tmp_path):
    root, layout = _write_data(tmp_path)
    code = _run("estimate", "--data", str(root), "--layout", str(layout), "--alphas", "0.1,1.5",
                "--output-dir", str(tmp_path / "o"))
    assert code == 2
    assert not (tmp_path / "o" / "estimate.json").exists()


def test_estimate_data_error(tmp_path):
    root, layout = _write_data(tmp_path, times=3)
    (root / "99.csv").write_text("1,2\n", encoding="utf-8")
    code = _run("estimate", "--data", str(root), "--layout", str(layout), "--output-dir", str(tmp_path / "o"))
    assert code == 3


def test_estimate_degenerate_column(tmp_path):
    root, layout = _write_data(tmp_path, times=10, constant_column=2)
    code = _run("estimate", "--data", str(root), "--layout", str(layout),
                "--lambdas", "2", "--deltas", "2", "--output-dir", str(tmp_path / "o"))
    assert code == 4


@pytest.mark.integration
def test_tune_command(tmp_path):
    root, layout = _write_data(tmp_path)
    out = tmp_path / "tune"
    assert _run("tune", "--data", str(root), "--layout", str(layout),
                "--lambdas", "1,2", "--deltas", "1,2,3", "--output-dir", str(out)) == 0
    result = json.loads((out / "tuning.json").read_text(encoding="utf-8"))
    assert np.array(result["axes"]["omega"]["objective_table"]).shape == (2, 3)
    assert len(pd.read_csv(out / "tuning_gamma.csv")) == 6


@pytest.mark.integration
def test_null_study_command(tmp_path):
    out = tmp_path / "study"
    assert _run("study", "null", "--n", "10", "--p", "10", "--q", "6", "--replications", "2",
                "--workers", "1", "--output-dir", str(out)) == 0
    summary = json.loads((out / "null_study.json").read_text(encoding="utf-8"))
    assert summary["count"] == 2 * 15


def test_parse_floats():
    assert parse_floats("0.1, 0.2,", "alphas") == [0.1, 0.2]
    with pytest.raises(ConfigError):
        parse_floats("a,b", "alphas")
