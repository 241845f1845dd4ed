"""ADMM solvers for Haar-nuclear-norm completion and robust PCA.

Both solvers split the problem as ``M = X + E`` and ``B_i = F_i(X)`` where
``F_i`` extracts the i-th Haar coefficient block, then cycle

    E -> B_1..B_4 -> X -> multipliers -> penalties

with the penalties ``mu_a`` (data split) and ``mu_b`` (wavelet split) grown
geometrically by ``rho`` up to ``mu_cap``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import EmptyMaskError, NonFiniteError, OddDimensionError
from .haar import haar_analysis, haar_synthesis
from .prox import block_unfoldings, hnn, soft_threshold, svt

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    mu_a0: float = 1.0
    mu_b0: float = 1.0
    rho: float = 1.25
    lam: Union[float, str] = "auto"
    max_iter: int = 200
    tol: float = 1e-6
    mu_cap: float = 1e8

    def __post_init__(self):
        if self.mu_a0 <= 0 or self.mu_b0 <= 0:
            raise ValueError("initial penalties must be positive")
        if self.rho <= 1:
            raise ValueError("rho must be greater than 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")
        if self.tol <= 0 or self.mu_cap <= 0:
            raise ValueError("tol and mu_cap must be positive")
        if isinstance(self.lam, str):
            if self.lam != "auto":
                raise ValueError(f"lam must be a positive number or 'auto', got {self.lam!r}")
        elif not self.lam > 0:
            raise ValueError("lam must be positive")

    def resolve_lambda(self, dims) -> float:
        if self.lam == "auto":
            return auto_lambda(dims)
        return float(self.lam)


def auto_lambda(dims) -> float:
    """``4 / sqrt(max(M*N/4, S))``."""
    m, n, s = dims
    return 4.0 / math.sqrt(max(m * n / 4.0, s))


@dataclass
class IterationRecord:
    feasibility: float
    block_residual: float
    objective: float
    change: float


@dataclass
class RestorationResult:
    x: np.ndarray
    e: np.ndarray
    iterations: int
    converged: bool
    trace: list[IterationRecord] = field(default_factory=list)

    @property
    def final(self) -> Optional[IterationRecord]:
        return self.trace[-1] if self.trace else None


def objective_mc(x) -> float:
    return hnn(x)


def objective_rpca(x, e, lam: float) -> float:
    return hnn(x) + lam * float(np.sum(np.abs(e)))


def _check_input(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 3:
        raise ValueError(f"observation must be 3-order, got shape {m.shape}")
    for size, what in zip(m.shape[:2], ("height", "width")):
        if size < 2 or size % 2:
            raise OddDimensionError(f"observation {what} must be even, got {size}")
    return m


def _admm(m, cfg: SolverConfig, mask, lam, callback):
    # Iterate on m / ||m||_F so the penalty defaults do not depend on the data
    # scale; equivalent to dividing both penalties by ||m||_F.
    scale = float(np.linalg.norm(m)) or 1.0
    m = m / scale
    mu_a, mu_b = cfg.mu_a0, cfg.mu_b0
    x = m.copy() if mask is None else np.where(mask, m, 0.0)
    unobserved = None if mask is None else ~mask
    e = np.zeros_like(m)
    fx = haar_analysis(x)
    gam = np.zeros_like(fx)
    gam5 = np.zeros_like(m)
    trace: list[IterationRecord] = []
    converged = False

    for it in range(1, cfg.max_iter + 1):
        t = m - x + gam5 / mu_a
        if unobserved is None:
            e = soft_threshold(t, lam / mu_a)
        else:
            e = t * unobserved

        target = fx - gam / mu_b
        b = svt(block_unfoldings(target), 1.0 / mu_b).reshape(target.shape)

        x_new = (mu_a * (m + gam5 / mu_a - e) + haar_synthesis(mu_b * b + gam)) / (mu_a + mu_b)
        fx = haar_analysis(x_new)

        r_b = b - fx
        r_a = m - x_new - e
        gam += mu_b * r_b
        gam5 += mu_a * r_a

        prev_norm = float(np.linalg.norm(x))
        change = float(np.linalg.norm(x_new - x)) / (prev_norm if prev_norm > 0 else 1.0)
        x = x_new
        feas = float(np.linalg.norm(r_a))
        block = float(np.sqrt(np.max(np.sum(r_b * r_b, axis=(1, 2, 3)))))
        obj = float(np.linalg.svd(block_unfoldings(fx), compute_uv=False).sum())
        if unobserved is None:
            obj += lam * float(np.sum(np.abs(e)))
        trace.append(IterationRecord(feas * scale, block * scale, obj * scale, change))
        if callback is not None:
            callback(it, x * scale, e * scale)

        mu_a = min(mu_a * cfg.rho, cfg.mu_cap)
        mu_b = min(mu_b * cfg.rho, cfg.mu_cap)

        if max(feas, block) <= cfg.tol and change <= cfg.tol:
            converged = True
            break

    if not converged:
        last = trace[-1]
        log.warning(
            "ADMM stopped at max_iter=%d: feasibility %.3e, block residual %.3e, change %.3e",
            cfg.max_iter, last.feasibility, last.block_residual, last.change,
        )
    return x * scale, e * scale, len(trace), converged, trace


Callback = Callable[[int, np.ndarray, np.ndarray], None]


def hnn_mc(m, mask, cfg: Optional[SolverConfig] = None, callback: Optional[Callback] = None) -> RestorationResult:
    """Complete ``m`` from the entries where ``mask`` is true.

    Unobserved entries of ``m`` are ignored and may hold anything, NaN
    included.  The returned ``x`` matches ``m`` exactly on the mask.
    """
    cfg = cfg or SolverConfig()
    m = _check_input(m)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != m.shape:
        raise ValueError(f"mask shape {mask.shape} differs from observation shape {m.shape}")
    if not mask.any():
        raise EmptyMaskError("mask has no observed entries")
    if not np.all(np.isfinite(m[mask])):
        raise NonFiniteError("observed entries must be finite")
    m = np.where(mask, m, 0.0)

    x, e, iters, converged, trace = _admm(m, cfg, mask, None, callback)
    x[mask] = m[mask]
    return RestorationResult(x, e, iters, converged, trace)


def hnn_rpca(m, cfg: Optional[SolverConfig] = None, callback: Optional[Callback] = None) -> RestorationResult:
    """Split ``m`` into a low-HNN part ``x`` and a sparse part ``e``."""
    cfg = cfg or SolverConfig()
    m = _check_input(m)
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("observation must be finite")
    lam = cfg.resolve_lambda(m.shape)
    x, e, iters, converged, trace = _admm(m, cfg, None, lam, callback)
    return RestorationResult(x, e, iters, converged, trace)
