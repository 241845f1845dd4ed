"""Image quality metrics for ``(M, N, S)`` tensors (bands along the last axis)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import correlate1d

SSIM_WIN = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(x, ref):
    x = np.asarray(x, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if x.shape != ref.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {ref.shape}")
    if x.ndim == 2:
        x, ref = x[..., None], ref[..., None]
    if x.ndim != 3:
        raise ValueError(f"expected 3-order tensors, got shape {x.shape}")
    return x, ref


def psnr(x, ref, peak: float = 1.0) -> float:
    """``10 log10(peak^2 / MSE)``; ``inf`` for identical inputs."""
    if peak <= 0:
        raise ValueError("peak must be positive")
    x, ref = _pair(x, ref)
    mse = float(np.mean((x - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def band_psnr(x, ref, peak: float = 1.0) -> np.ndarray:
    x, ref = _pair(x, ref)
    mse = np.mean((x - ref) ** 2, axis=(0, 1))
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(peak * peak / mse)


def _gaussian_taps() -> np.ndarray:
    r = np.arange(SSIM_WIN) - SSIM_WIN // 2
    g = np.exp(-(r * r) / (2.0 * SSIM_SIGMA**2))
    return g / g.sum()


def _window_mean(a, taps):
    # Separable Gaussian; borders are cropped afterwards so the boundary mode is irrelevant.
    return correlate1d(correlate1d(a, taps, axis=0, mode="reflect"), taps, axis=1, mode="reflect")


def band_ssim(x, ref, data_range: float = 1.0) -> np.ndarray:
    """Per-band SSIM with an 11x11 Gaussian window (sigma 1.5), valid region only."""
    x, ref = _pair(x, ref)
    m, n, _ = x.shape
    if m < SSIM_WIN or n < SSIM_WIN:
        raise ValueError(f"bands of {m}x{n} are smaller than the {SSIM_WIN}x{SSIM_WIN} SSIM window")
    taps = _gaussian_taps()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mx = _window_mean(x, taps)
    my = _window_mean(ref, taps)
    sxx = _window_mean(x * x, taps) - mx * mx
    syy = _window_mean(ref * ref, taps) - my * my
    sxy = _window_mean(x * ref, taps) - mx * my
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    pad = SSIM_WIN // 2
    smap = (num / den)[pad : m - pad, pad : n - pad]
    return smap.mean(axis=(0, 1))


def ssim(x, ref, data_range: float = 1.0) -> float:
    return float(np.mean(band_ssim(x, ref, data_range)))


def ergas(x, ref) -> float:
    """``100 * sqrt(mean_b (RMSE_b / mean_b(ref))^2)`` with resolution ratio 1."""
    x, ref = _pair(x, ref)
    mu = ref.mean(axis=(0, 1))
    if np.any(mu == 0):
        raise ValueError("ERGAS undefined: reference has a zero-mean band")
    rmse = np.sqrt(np.mean((x - ref) ** 2, axis=(0, 1)))
    return float(100.0 * np.sqrt(np.mean((rmse / mu) ** 2)))


def sam(x, ref, return_skipped: bool = False):
    """Mean spectral angle in radians over pixels with nonzero spectra in both inputs."""
    x, ref = _pair(x, ref)
    xs = x.reshape(-1, x.shape[2])
    rs = ref.reshape(-1, ref.shape[2])
    nx = np.linalg.norm(xs, axis=1)
    nr = np.linalg.norm(rs, axis=1)
    ok = (nx > 0) & (nr > 0)
    if not ok.any():
        raise ValueError("SAM undefined: every pixel has a zero spectrum")
    # half-angle form; arccos of a cosine near 1 loses ~1e-8 rad
    u = xs[ok] / nx[ok, None]
    v = rs[ok] / nr[ok, None]
    ang = 2.0 * np.arctan2(np.linalg.norm(u - v, axis=1), np.linalg.norm(u + v, axis=1))
    val = float(np.mean(ang))
    if return_skipped:
        return val, int(np.count_nonzero(~ok))
    return val


@dataclass
class MetricsReport:
    psnr: float
    ssim: float
    ergas: float
    sam: float
    band_psnr: Optional[np.ndarray] = None

    def as_row(self) -> list[float]:
        return [self.psnr, self.ssim, self.ergas, self.sam]


def evaluate(x, ref, peak: float = 1.0, per_band: bool = False) -> MetricsReport:
    return MetricsReport(
        psnr=psnr(x, ref, peak),
        ssim=ssim(x, ref, data_range=peak),
        ergas=ergas(x, ref),
        sam=sam(x, ref),
        band_psnr=band_psnr(x, ref, peak) if per_band else None,
    )
