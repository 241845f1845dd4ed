"""Single-level Haar wavelet transforms.

The 2-D transform of a slice ``A`` is ``W_M @ A @ W_N.T`` with ``W`` the
orthogonal Haar matrix (average rows on top, difference rows below).  The
four quadrants of the result are the approximation, horizontal, vertical and
diagonal coefficient blocks.  Production code uses the per-2x2-patch
butterfly below; the dense matrix path is kept as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OddDimensionError
from .tensor import as_tensor3, mode_n_product

_R2 = np.sqrt(2.0) / 2.0


def _check_even(n: int, what: str = "size") -> int:
    n = int(n)
    if n < 2 or n % 2:
        raise OddDimensionError(f"Haar transform needs an even {what} >= 2, got {n}")
    return n


def haar_matrix(n: int) -> np.ndarray:
    """Dense orthogonal Haar matrix ``W_n`` (``n`` even)."""
    n = _check_even(n, "order")
    h = n // 2
    w = np.zeros((n, n))
    idx = np.arange(h)
    w[idx, 2 * idx] = _R2
    w[idx, 2 * idx + 1] = _R2
    w[h + idx, 2 * idx] = _R2
    w[h + idx, 2 * idx + 1] = -_R2
    return w


def hwt1(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    _check_even(a.shape[0], "length")
    ev, od = a[0::2], a[1::2]
    return np.concatenate([(ev + od) * _R2, (ev - od) * _R2])


def ihwt1(b) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    n = _check_even(b.shape[0], "length")
    lo, hi = b[: n // 2], b[n // 2 :]
    out = np.empty_like(b)
    out[0::2] = (lo + hi) * _R2
    out[1::2] = (lo - hi) * _R2
    return out


@dataclass
class WaveletBlocks:
    """Approximation (b1), horizontal (b2), vertical (b3), diagonal (b4) blocks."""

    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray
    b4: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(b) for b in self.blocks}
        if len(shapes) != 1:
            raise ValueError(f"wavelet blocks have mismatched shapes: {sorted(shapes)}")
        if len(next(iter(shapes))) != 3:
            raise ValueError("wavelet blocks must be 3-order")

    @property
    def blocks(self) -> tuple[np.ndarray, ...]:
        return (self.b1, self.b2, self.b3, self.b4)

    @property
    def parent_dims(self) -> tuple[int, int, int]:
        m, n, s = np.shape(self.b1)
        return (2 * m, 2 * n, s)

    def assemble(self) -> np.ndarray:
        """Per-slice block tensor ``[[b1, b2], [b3, b4]]`` of the parent shape."""
        top = np.concatenate([self.b1, self.b2], axis=1)
        bottom = np.concatenate([self.b3, self.b4], axis=1)
        return np.concatenate([top, bottom], axis=0)

    @classmethod
    def from_assembled(cls, b) -> "WaveletBlocks":
        b = as_tensor3(b)
        m = _check_even(b.shape[0], "height") // 2
        n = _check_even(b.shape[1], "width") // 2
        return cls(b[:m, :n], b[:m, n:], b[m:, :n], b[m:, n:])

    def stack(self) -> np.ndarray:
        return np.stack(self.blocks)

    @classmethod
    def from_stack(cls, st) -> "WaveletBlocks":
        return cls(*st)


def haar_analysis(t) -> np.ndarray:
    """Fast 2-D slice-wise transform, returned as an array of shape ``(4, M/2, N/2, S)``."""
    t = as_tensor3(t)
    _check_even(t.shape[0], "height")
    _check_even(t.shape[1], "width")
    a, b = t[0::2, 0::2], t[0::2, 1::2]
    c, d = t[1::2, 0::2], t[1::2, 1::2]
    u, v = a + b, a - b
    w, x = c + d, c - d
    out = np.empty((4,) + a.shape)
    np.add(u, w, out=out[0])
    np.add(v, x, out=out[1])
    np.subtract(u, w, out=out[2])
    np.subtract(v, x, out=out[3])
    out *= 0.5
    return out


def haar_synthesis(st) -> np.ndarray:
    """Inverse of :func:`haar_analysis`."""
    st = np.asarray(st, dtype=np.float64)
    if st.ndim != 4 or st.shape[0] != 4:
        raise ValueError(f"expected a (4, m, n, s) coefficient stack, got {st.shape}")
    b1, b2, b3, b4 = st
    u, v = b1 + b3, b2 + b4
    w, x = b1 - b3, b2 - b4
    m, n, s = b1.shape
    out = np.empty((2 * m, 2 * n, s))
    np.add(u, v, out=out[0::2, 0::2])
    np.subtract(u, v, out=out[0::2, 1::2])
    np.add(w, x, out=out[1::2, 0::2])
    np.subtract(w, x, out=out[1::2, 1::2])
    out *= 0.5
    return out


def fhwt2(t) -> WaveletBlocks:
    return WaveletBlocks.from_stack(haar_analysis(t))


def ifhwt2(blocks: WaveletBlocks) -> np.ndarray:
    return haar_synthesis(blocks.stack())


def fhwt2_dense(t) -> WaveletBlocks:
    """Matrix path ``t x_1 W_M x_2 W_N``; slow, used to check the fast path."""
    t = as_tensor3(t)
    full = mode_n_product(mode_n_product(t, haar_matrix(t.shape[0]), 1), haar_matrix(t.shape[1]), 2)
    return WaveletBlocks.from_assembled(full)


def ifhwt2_dense(blocks: WaveletBlocks) -> np.ndarray:
    m, n, _ = blocks.parent_dims
    full = blocks.assemble()
    return mode_n_product(mode_n_product(full, haar_matrix(m).T, 1), haar_matrix(n).T, 2)


def cumulative_energy(singular_values) -> np.ndarray:
    """``CE_k = sum(s[:k]) / sum(s)`` for a nonincreasing nonnegative sequence."""
    s = np.asarray(singular_values, dtype=np.float64).ravel()
    if s.size == 0 or np.any(s < 0):
        raise ValueError("singular values must be nonnegative and nonempty")
    if np.any(np.diff(s) > 0):
        raise ValueError("singular values must be nonincreasing")
    total = s.sum()
    if total == 0.0:
        raise ValueError("cumulative energy undefined for an all-zero sequence")
    ce = np.cumsum(s) / total
    ce[-1] = 1.0
    return ce
