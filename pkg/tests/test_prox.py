import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hnn.errors import NonFiniteError
from hnn.haar import fhwt2
from hnn.prox import hnn, nuclear_norm, soft_threshold, svd, svt
from hnn.tensor import mode_n_product, unfold


def test_svd_examples():
    f = svd(np.eye(3))
    assert np.allclose(f.sigma, 1.0, atol=1e-15)
    assert np.allclose(svd(np.diag([3.0, 1.0])).sigma, [3.0, 1.0], atol=1e-15)
    assert np.allclose(svd(np.zeros((2, 2))).sigma, 0.0)


def test_svd_reconstructs_economy():
    a = np.random.default_rng(0).standard_normal((7, 4))
    u, s, vt = svd(a)
    assert u.shape == (7, 4) and vt.shape == (4, 4)
    assert np.all(np.diff(s) <= 0)
    assert np.max(np.abs((u * s) @ vt - a)) <= 1e-12


def test_svd_rejects_nonfinite():
    with pytest.raises(NonFiniteError):
        svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_soft_threshold_examples():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.5, 1.0) == 0.0
    assert soft_threshold(2.0, 0.0) == 2.0
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.1)


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(0, 3))
def test_soft_threshold_is_scalar_prox(x, gamma):
    # brute-force minimiser of gamma*|z| + (z - x)^2 / 2 on a fine grid
    grid = np.linspace(-6, 6, 120001)
    obj = gamma * np.abs(grid) + 0.5 * (grid - x) ** 2
    assert abs(soft_threshold(x, gamma) - grid[np.argmin(obj)]) <= 2e-4


def test_svt_examples():
    assert np.allclose(svt(np.diag([3.0, 1.0]), 1.0), np.diag([2.0, 0.0]), atol=1e-14)
    assert np.allclose(svt(np.eye(2), 5.0), 0.0)
    a = np.random.default_rng(1).standard_normal((4, 6))
    assert np.max(np.abs(svt(a, 0.0) - a)) <= 1e-12


def test_svt_batched_matches_loop():
    a = np.random.default_rng(2).standard_normal((4, 9, 5))
    out = svt(a, 0.7)
    for k in range(4):
        assert np.max(np.abs(out[k] - svt(a[k], 0.7))) <= 1e-12


def test_svt_is_prox_of_nuclear_norm():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((6, 5))
    tau = 0.8
    y = svt(a, tau)

    def f(z):
        return tau * nuclear_norm(z) + 0.5 * np.sum((z - a) ** 2)

    fy = f(y)
    for _ in range(200):
        z = y + 1e-2 * rng.standard_normal(a.shape)
        assert fy <= f(z) + 1e-12


def test_svt_nonexpansive():
    rng = np.random.default_rng(4)
    for _ in range(30):
        a, b = rng.standard_normal((2, 8, 6))
        assert np.linalg.norm(svt(a, 0.5) - svt(b, 0.5)) <= np.linalg.norm(a - b) + 1e-12


def test_nuclear_norm():
    assert nuclear_norm(np.diag([3.0, -2.0])) == pytest.approx(5.0, abs=1e-14)
    assert nuclear_norm(np.zeros((3, 2))) == 0.0


def test_hnn_zero_and_constant():
    assert hnn(np.zeros((4, 4, 3))) == 0.0
    c, s = -0.7, 5
    # only b1 is nonzero, equal to 2c everywhere on an (M/2*N/2) x S matrix of rank one
    assert hnn(np.full((2, 2, s), c)) == pytest.approx(2 * abs(c) * np.sqrt(s), rel=1e-13)
    assert hnn(np.full((6, 4, s), c)) == pytest.approx(2 * abs(c) * np.sqrt(6 * s), rel=1e-13)


def test_hnn_matches_blockwise_definition():
    t = np.random.default_rng(5).standard_normal((8, 6, 4))
    want = sum(nuclear_norm(unfold(b, 3)) for b in fhwt2(t).blocks)
    assert abs(hnn(t) - want) <= 1e-10 * want


def test_hnn_norm_axioms():
    rng = np.random.default_rng(6)
    x, y = rng.standard_normal((2, 6, 8, 3))
    assert hnn(-2.5 * x) == pytest.approx(2.5 * hnn(x), rel=1e-12)
    assert hnn(x + y) <= hnn(x) + hnn(y) + 1e-12


def test_hnn_spectral_orthogonal_invariance():
    rng = np.random.default_rng(7)
    t = rng.standard_normal((6, 6, 5))
    q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    assert hnn(mode_n_product(t, q, 3)) == pytest.approx(hnn(t), rel=1e-12)


def test_hnn_rejects_nonfinite():
    t = np.zeros((2, 2, 2))
    t[0, 0, 0] = np.inf
    with pytest.raises(NonFiniteError):
        hnn(t)
