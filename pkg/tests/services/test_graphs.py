import numpy as np
import pytest
from scipy import linalg

from kronfdr.errors import DegenerateDataError
from kronfdr.models.matrices import PrecisionMatrix
from kronfdr.models.schemas import GraphKind
from kronfdr.services.graphs import (
    PD_MARGIN,
    gen_precision,
    invert_spd,
    joint_partial_corr,
    true_partial_corr,
)


def _off(m):
    out = m.copy()
    np.fill_diagonal(out, 0)
    return out


def test_hub_blocks_and_shift():
    pm = gen_precision(GraphKind(kind="hub"), 25)
    w = pm.entries
    # two hubs of size 10; rows 20..24 keep only their diagonal
    assert np.allclose(w[0, 1:10], 0.5)
    assert np.allclose(w[10, 11:20], 0.5)
    assert np.count_nonzero(_off(w)[20:, :]) == 0
    assert np.count_nonzero(_off(w)) == 2 * 2 * 9
    # 1 + shift on the diagonal; the shift keeps lambda_min at exactly PD_MARGIN
    assert np.allclose(np.diag(w), w[0, 0])
    assert linalg.eigvalsh(w)[0] == pytest.approx(PD_MARGIN, abs=1e-10)


def test_single_hub_shift_value():
    w = gen_precision(GraphKind(kind="hub"), 10).entries
    # star with arms 0.5: lambda_min = 1 - 0.5 * 3 = -0.5, shift = 0.5 + 0.05
    assert np.allclose(np.diag(w), 1.55, atol=1e-10)
    assert np.allclose(w[0, 1:], 0.5)


def test_band_entries_are_exact():
    w = gen_precision(GraphKind(kind="band"), 6).entries
    assert np.allclose(np.diag(w), 1.0)
    assert np.allclose(np.diag(w, 1), 0.6)
    assert np.allclose(np.diag(w, 2), 0.3)
    assert np.count_nonzero(np.triu(w, 3)) == 0
    assert np.allclose(w, w.T)


def test_signal_strength_factor_divides_off_diagonals():
    w = gen_precision(GraphKind(kind="band", factor=3.0), 6).entries
    assert np.allclose(np.diag(w, 1), 0.2)
    assert np.allclose(np.diag(w, 2), 0.1)


def test_random_graph_is_seeded_and_bounded():
    kind = GraphKind(kind="random", edge_prob_cap=0.3)
    a = gen_precision(kind, 30, seed=4)
    b = gen_precision(kind, 30, seed=4)
    c = gen_precision(kind, 30, seed=5)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)

    off = _off(a.entries)
    values = off[off != 0]
    assert values.size > 0
    assert np.all((values >= 0.4) & (values <= 0.8))
    assert np.allclose(a.entries, a.entries.T)
    assert linalg.eigvalsh(a.entries)[0] > 0


def test_random_edge_probability_uses_five_over_dim():
    # cap 1.0 -> prob 5/dim; average edge count over seeds should sit near 5/dim * pairs
    dim = 50
    kind = GraphKind(kind="random", edge_prob_cap=1.0)
    counts = [np.count_nonzero(np.triu(gen_precision(kind, dim, seed=s).entries, 1)) for s in range(40)]
    expected = 5.0 / dim * dim * (dim - 1) / 2
    assert abs(np.mean(counts) - expected) < 0.1 * expected


def test_true_support_matches_nonzeros():
    pm = gen_precision(GraphKind(kind="band"), 7)
    assert np.array_equal(pm.true_support, pm.entries != 0)
    assert pm.off_diagonal_support().sum() == 2 * (6 + 5)


def test_dim_below_three_rejected():
    with pytest.raises(ValueError):
        gen_precision(GraphKind(kind="band"), 2)


def test_invert_spd_round_trip():
    pm = gen_precision(GraphKind(kind="hub"), 20)
    sigma = invert_spd(pm)
    assert np.allclose(sigma @ pm.entries, np.eye(20), atol=1e-10)
    assert np.array_equal(sigma, sigma.T)


def test_invert_spd_rejects_indefinite():
    with pytest.raises(DegenerateDataError):
        invert_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_true_partial_corr():
    pm = PrecisionMatrix.from_entries(np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, 0.5], [0.0, 0.5, 1.0]]))
    rho = true_partial_corr(pm)
    assert np.allclose(np.diag(rho), 1.0)
    assert rho[0, 1] == pytest.approx(0.5)
    assert rho[1, 2] == pytest.approx(-0.5 / np.sqrt(2.0))
    assert rho[0, 2] == 0.0


def test_joint_partial_corr_matches_kronecker_precision():
    omega = gen_precision(GraphKind(kind="band"), 4)
    gamma = gen_precision(GraphKind(kind="hub"), 12)
    q = gamma.dim
    big = np.kron(omega.entries, gamma.entries)
    for i, k, j, l in [(0, 1, 0, 3), (1, 2, 0, 0), (3, 3, 0, 5), (0, 2, 10, 11)]:
        a, b = i * q + j, k * q + l
        expected = -big[a, b] / np.sqrt(big[a, a] * big[b, b])
        assert joint_partial_corr(omega, gamma, i, k, j, l) == pytest.approx(expected, abs=1e-14)


def test_joint_partial_corr_errors():
    omega = gen_precision(GraphKind(kind="band"), 4)
    gamma = gen_precision(GraphKind(kind="band"), 5)
    with pytest.raises(IndexError):
        joint_partial_corr(omega, gamma, 4, 0, 0, 0)
    with pytest.raises(ValueError):
        joint_partial_corr(omega, gamma, 1, 1, 2, 2)
