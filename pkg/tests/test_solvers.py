import logging

import numpy as np
import pytest

from hnn.errors import EmptyMaskError, NonFiniteError, OddDimensionError
from hnn.experiments import random_mask, relative_error, sparse_corruption
from hnn.prox import hnn
from hnn.solvers import SolverConfig, auto_lambda, hnn_mc, hnn_rpca, objective_mc, objective_rpca
from hnn.tensor import TuckerSpec, random_tucker


@pytest.fixture(scope="module")
def rank2():
    return random_tucker((30, 30, 30), TuckerSpec((2, 2, 2), seed=0))


def test_config_validation():
    for bad in (dict(rho=1.0), dict(mu_a0=0), dict(mu_b0=-1), dict(max_iter=0), dict(tol=0), dict(lam="x"), dict(lam=0)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def test_auto_lambda():
    assert auto_lambda((30, 30, 30)) == pytest.approx(4 / 15)
    assert auto_lambda((4, 4, 100)) == pytest.approx(0.4)
    assert SolverConfig(lam=0.3).resolve_lambda((30, 30, 30)) == 0.3


def test_full_mask_returns_observation(rank2):
    res = hnn_mc(rank2, np.ones(rank2.shape, bool))
    assert relative_error(res.x, rank2) <= 1e-10


def test_mc_recovers_low_rank_at_half_sampling(rank2):
    mask = random_mask(rank2.shape, 0.5, seed=0)
    seen = []
    res = hnn_mc(np.where(mask, rank2, 0.0), mask, callback=lambda it, x, e: seen.append(e[mask].copy()))
    assert relative_error(res.x, rank2) < 1e-3
    assert res.converged
    # the sparse part never touches observed entries
    assert all(not s.any() for s in seen)
    assert len(seen) == res.iterations
    assert np.array_equal(res.x[mask], rank2[mask])


def test_mc_trace_health(rank2):
    mask = random_mask(rank2.shape, 0.3, seed=1)
    m = np.where(mask, rank2, 0.0)
    res = hnn_mc(m, mask)
    arr = np.array([[r.feasibility, r.block_residual, r.objective, r.change] for r in res.trace])
    assert np.all(np.isfinite(arr))
    assert res.converged
    assert res.final.feasibility <= SolverConfig().tol * np.linalg.norm(m)
    assert res.final.objective == pytest.approx(hnn(res.x), rel=1e-4)


def test_mc_ignores_unobserved_values(rank2):
    mask = random_mask(rank2.shape, 0.5, seed=2)
    a = np.where(mask, rank2, np.nan)
    b = np.where(mask, rank2, 1e6)
    assert np.array_equal(hnn_mc(a, mask).x, hnn_mc(b, mask).x)


def test_mc_deterministic(rank2):
    mask = random_mask(rank2.shape, 0.4, seed=3)
    m = np.where(mask, rank2, 0.0)
    assert hnn_mc(m, mask).x.tobytes() == hnn_mc(m, mask).x.tobytes()


def test_mc_errors(rank2):
    with pytest.raises(EmptyMaskError):
        hnn_mc(rank2, np.zeros(rank2.shape, bool))
    with pytest.raises(OddDimensionError):
        hnn_mc(np.zeros((3, 4, 2)), np.ones((3, 4, 2), bool))
    with pytest.raises(ValueError):
        hnn_mc(rank2, np.ones((2, 2, 2), bool))
    bad = rank2.copy()
    bad[0, 0, 0] = np.inf
    with pytest.raises(NonFiniteError):
        hnn_mc(bad, np.ones(rank2.shape, bool))


def test_rpca_without_corruption(rank2):
    res = hnn_rpca(rank2)
    assert relative_error(res.x, rank2) < 0.1
    assert np.all(np.isfinite(res.x)) and np.all(np.isfinite(res.e))
    assert np.linalg.norm(res.x + res.e - rank2) <= 1e-5 * np.linalg.norm(rank2)


def test_rpca_recovers_with_pixel_scale_lambda(rank2):
    # lambda on the pixel count rather than the auto rule
    cfg = SolverConfig(lam=4 / np.sqrt(30 * 30))
    for seed in range(3):
        m, support = sparse_corruption(rank2, 0.05, seed)
        res = hnn_rpca(m, cfg)
        assert relative_error(res.x, rank2) < 0.1
        found = np.abs(res.e) > 1e-3 * np.abs(m).max()
        assert (found & support).sum() / max(found.sum(), 1) >= 0.9


def test_rpca_errors():
    with pytest.raises(NonFiniteError):
        hnn_rpca(np.full((2, 2, 2), np.nan))
    with pytest.raises(OddDimensionError):
        hnn_rpca(np.zeros((2, 5, 2)))


def test_objectives():
    x = np.full((2, 2, 4), 0.5)
    assert objective_mc(x) == pytest.approx(2.0, rel=1e-13)
    e = np.zeros_like(x)
    e[0, 0, 0] = -3.0
    assert objective_rpca(x, e, 0.5) == pytest.approx(3.5, rel=1e-13)


def test_nonconvergence_warns(rank2, caplog):
    mask = random_mask(rank2.shape, 0.5, seed=4)
    with caplog.at_level(logging.WARNING):
        res = hnn_mc(np.where(mask, rank2, 0.0), mask, SolverConfig(max_iter=3))
    assert not res.converged and res.iterations == 3
    assert "max_iter" in caplog.text
