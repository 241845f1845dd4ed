"""Dense 3-order tensor helpers.

Tensors are plain ``numpy.ndarray`` objects of shape ``(M, N, S)``.
Unfoldings follow the convention where the remaining indices vary with the
lower-numbered mode fastest, so ``unfold(t, 1)[i, j + k*N] == t[i, j, k]``.
Modes are numbered 1, 2, 3 as in the formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _check_mode(mode: int) -> int:
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")
    return mode - 1


def as_tensor3(t, name: str = "tensor") -> np.ndarray:
    """Return ``t`` as a float64 3-order array, raising on the wrong order."""
    arr = np.asarray(t, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"{name} must be 3-order, got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ValueError(f"{name} has an empty dimension: {arr.shape}")
    return arr


def unfold(t, mode: int) -> np.ndarray:
    """Mode-n matricization, shape ``I_n x prod(I_k, k != n)``."""
    ax = _check_mode(mode)
    t = as_tensor3(t)
    return np.moveaxis(t, ax, 0).reshape(t.shape[ax], -1, order="F")


def fold(mat, mode: int, dims) -> np.ndarray:
    """Inverse of :func:`unfold` for a target shape ``dims``."""
    ax = _check_mode(mode)
    dims = tuple(int(d) for d in dims)
    mat = np.asarray(mat, dtype=np.float64)
    moved = (dims[ax],) + tuple(d for i, d in enumerate(dims) if i != ax)
    if mat.shape != (moved[0], int(np.prod(moved[1:]))):
        raise ValueError(f"matrix shape {mat.shape} does not fold into {dims} along mode {mode}")
    return np.moveaxis(mat.reshape(moved, order="F"), 0, ax)


def mode_n_product(t, b, mode: int) -> np.ndarray:
    """Tensor times matrix along ``mode``: ``unfold(out, n) == b @ unfold(t, n)``."""
    ax = _check_mode(mode)
    t = as_tensor3(t)
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 2 or b.shape[1] != t.shape[ax]:
        raise ValueError(
            f"matrix of shape {b.shape} incompatible with mode-{mode} size {t.shape[ax]}"
        )
    out = np.tensordot(b, t, axes=([1], [ax]))
    return np.moveaxis(out, 0, ax)


def frobenius_norm(t) -> float:
    arr = np.asarray(t, dtype=np.float64)
    return float(np.sqrt(np.sum(arr * arr)))


def numerical_n_rank(t, mode: int, tol: float = 1e-8) -> int:
    """Count singular values of the mode-n unfolding above ``tol * sigma_max``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = np.linalg.svd(unfold(t, mode), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def tucker_rank(t, tol: float = 1e-8) -> tuple[int, int, int]:
    return tuple(numerical_n_rank(t, n, tol) for n in (1, 2, 3))


@dataclass(frozen=True)
class TuckerSpec:
    core_dims: tuple[int, int, int]
    seed: int = 0

    def validate(self, dims) -> None:
        if len(self.core_dims) != 3 or len(dims) != 3:
            raise ValueError("core_dims and dims must both have length 3")
        for r, d in zip(self.core_dims, dims):
            if not 1 <= r <= d:
                raise ValueError(f"invalid Tucker rank {self.core_dims} for dims {tuple(dims)}")


def random_tucker(dims, spec: TuckerSpec) -> np.ndarray:
    """Gaussian core times Gaussian factors, scaled to unit Frobenius norm."""
    dims = tuple(int(d) for d in dims)
    spec.validate(dims)
    rng = np.random.default_rng(spec.seed)
    out = rng.standard_normal(spec.core_dims)
    for n, (d, r) in enumerate(zip(dims, spec.core_dims), start=1):
        out = mode_n_product(out, rng.standard_normal((d, r)), n)
    return out / frobenius_norm(out)
