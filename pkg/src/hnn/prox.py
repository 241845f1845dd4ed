"""Singular value machinery and the Haar nuclear norm."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NonFiniteError
from .haar import haar_analysis


class SvdFactors(NamedTuple):
    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray


def _finite_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix contains non-finite entries")
    return a


def svd(a) -> SvdFactors:
    """Economy SVD; ``sigma`` is nonincreasing."""
    a = _finite_matrix(a)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return SvdFactors(u, s, vt)


def soft_threshold(x, gamma: float):
    """Elementwise ``sign(x) * max(|x| - gamma, 0)``."""
    if gamma < 0:
        raise ValueError(f"threshold must be nonnegative, got {gamma}")
    x = np.asarray(x, dtype=np.float64)
    out = np.sign(x) * np.maximum(np.abs(x) - gamma, 0.0)
    return out if out.ndim else float(out)


def svt(a, tau: float) -> np.ndarray:
    """Singular value thresholding, the prox of ``tau * ||.||_*``.

    Also accepts a stack of matrices (leading batch axes).
    """
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix contains non-finite entries")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    return (u * s[..., None, :]) @ vt


def nuclear_norm(a) -> float:
    a = _finite_matrix(a)
    return float(np.linalg.svd(a, compute_uv=False).sum())


def block_unfoldings(st) -> np.ndarray:
    """View a ``(4, m, n, S)`` coefficient stack as four ``(m*n, S)`` matrices.

    Each is the transpose of a column-permuted mode-3 unfolding, which leaves
    singular values unchanged.
    """
    return st.reshape(st.shape[0], -1, st.shape[-1])


def hnn(t) -> float:
    """Haar nuclear norm: summed nuclear norms of the mode-3 unfolded wavelet blocks."""
    st = haar_analysis(t)
    if not np.all(np.isfinite(st)):
        raise NonFiniteError("tensor contains non-finite entries")
    return float(np.linalg.svd(block_unfoldings(st), compute_uv=False).sum())
