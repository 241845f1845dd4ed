"""Synthetic data and experiment harnesses.

Data live on a [0, 1] intensity scale; noise levels quoted on the 0-255 scale
are divided by 255.  Every generator is a pure function of its parameters and
seed.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .metrics import psnr, ssim
from .solvers import SolverConfig, hnn_mc, hnn_rpca
from .tensor import TuckerSpec, random_tucker

log = logging.getLogger(__name__)

MC = "mc"
RPCA = "rpca"


# --------------------------------------------------------------------------
# noise simulation


@dataclass(frozen=True)
class NoiseCase:
    """Denoising scenario 1..6.

    1: i.i.d. Gaussian, ``sigma`` on the 0-255 scale (default 75).
    2: per-band Gaussian with sigma uniform in ``sigma_range``.
    3/4/5: case 2 plus impulse / stripe / deadline noise on ``band_fraction``
       of the bands, per-band ratio uniform in ``p_range``.
    6: case 2 plus all three, each on its own disjoint group of bands.
    """

    case_id: int
    seed: int = 0
    sigma: Optional[float] = None
    sigma_range: tuple[float, float] = (30.0, 100.0)
    p_range: tuple[float, float] = (0.05, 0.20)
    band_fraction: float = 1.0 / 3.0
    stripe_amplitude: float = 0.25

    def __post_init__(self):
        if self.case_id not in range(1, 7):
            raise ValueError(f"noise case must be 1..6, got {self.case_id}")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        lo, hi = self.sigma_range
        if not 0 <= lo <= hi:
            raise ValueError(f"invalid sigma range {self.sigma_range}")
        lo, hi = self.p_range
        if not 0 <= lo <= hi <= 1:
            raise ValueError(f"invalid ratio range {self.p_range}")
        if not 0 < self.band_fraction <= 1:
            raise ValueError("band_fraction must be in (0, 1]")


def _column_count(p: float, n: int, p_range) -> int:
    lo = int(np.ceil(p_range[0] * n))
    hi = max(lo, int(np.floor(p_range[1] * n)))
    return int(min(max(round(p * n), lo), hi))


def _impulse(m, support, bands, rng, p_range):
    for b in bands:
        p = rng.uniform(*p_range)
        hit = rng.random(m.shape[:2]) < p
        salt = rng.random(m.shape[:2]) < 0.5
        m[hit & salt, b] = 1.0
        m[hit & ~salt, b] = 0.0
        support[hit, b] = True


def _stripes(m, support, bands, rng, p_range, amplitude):
    n = m.shape[1]
    for b in bands:
        cols = rng.permutation(n)[: _column_count(rng.uniform(*p_range), n, p_range)]
        m[:, cols, b] += rng.uniform(-amplitude, amplitude, size=cols.size)
        support[:, cols, b] = True


def _deadlines(m, support, bands, rng, p_range):
    n = m.shape[1]
    for b in bands:
        cols = rng.permutation(n)[: _column_count(rng.uniform(*p_range), n, p_range)]
        m[:, cols, b] = 0.0
        support[:, cols, b] = True


def apply_noise(x, case: NoiseCase):
    """Corrupt ``x`` (values in [0, 1]) according to ``case``.

    Returns ``(m, support)`` where ``support`` marks entries hit by impulse,
    stripe or deadline corruption (all false for cases 1 and 2).  No clipping
    is applied.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"expected a 3-order tensor, got shape {x.shape}")
    rng = np.random.default_rng(case.seed)
    s = x.shape[2]
    if case.case_id == 1:
        sigma = np.full(s, 75.0 if case.sigma is None else case.sigma)
    else:
        sigma = rng.uniform(*case.sigma_range, size=s)
    m = x + rng.standard_normal(x.shape) * (sigma / 255.0)
    support = np.zeros(x.shape, dtype=bool)
    if case.case_id <= 2:
        return m, support

    k = max(1, int(round(case.band_fraction * s)))
    order = rng.permutation(s)
    if case.case_id == 3:
        _impulse(m, support, order[:k], rng, case.p_range)
    elif case.case_id == 4:
        _stripes(m, support, order[:k], rng, case.p_range, case.stripe_amplitude)
    elif case.case_id == 5:
        _deadlines(m, support, order[:k], rng, case.p_range)
    else:
        groups = [order[i * k : (i + 1) * k] for i in range(3)]
        _impulse(m, support, groups[0], rng, case.p_range)
        _stripes(m, support, groups[1], rng, case.p_range, case.stripe_amplitude)
        _deadlines(m, support, groups[2], rng, case.p_range)
    return m, support


def random_mask(dims, sampling_rate: float, seed: int = 0) -> np.ndarray:
    """Uniform mask with exactly ``round(rate * M*N*S)`` observed entries."""
    if not 0 < sampling_rate <= 1:
        raise ValueError(f"sampling rate must be in (0, 1], got {sampling_rate}")
    dims = tuple(int(d) for d in dims)
    total = int(np.prod(dims))
    count = int(round(sampling_rate * total))
    mask = np.zeros(total, dtype=bool)
    mask[np.random.default_rng(seed).choice(total, size=count, replace=False)] = True
    return mask.reshape(dims)


def sparse_corruption(x0, ratio: float, seed: int, magnitude: float = 0.5):
    """Add ``+-magnitude * range(x0)`` to a uniform ``ratio`` of the entries."""
    rng = np.random.default_rng(seed)
    total = x0.size
    support = np.zeros(total, dtype=bool)
    support[rng.choice(total, size=int(round(ratio * total)), replace=False)] = True
    support = support.reshape(x0.shape)
    amp = magnitude * float(x0.max() - x0.min())
    signs = rng.choice([-1.0, 1.0], size=x0.shape)
    return x0 + support * signs * amp, support


# --------------------------------------------------------------------------
# phase transitions


@dataclass
class PhaseGrid:
    ranks: Sequence[int] = (1, 3, 5, 10, 20)
    axis2: Sequence[float] = (0.1, 0.3, 0.5, 0.7, 0.9)
    dims: tuple[int, int, int] = (30, 30, 30)
    repeats: int = 10
    threshold: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be positive")
        if any(not 1 <= r <= min(self.dims) for r in self.ranks):
            raise ValueError(f"ranks {list(self.ranks)} out of range for dims {self.dims}")
        if any(not 0 < v <= 1 for v in self.axis2):
            raise ValueError("axis-2 values must lie in (0, 1]")


@dataclass
class PhaseMap:
    problem: str
    ranks: list[int]
    axis2: list[float]
    rates: np.ndarray
    mean_errors: np.ndarray
    errors: np.ndarray = field(repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank"] + [repr(float(v)) for v in self.axis2])
        for r, row in zip(self.ranks, self.rates):
            w.writerow([r] + [repr(float(v)) for v in row])
        return buf.getvalue()


def trial_seeds(grid_seed: int, i: int, j: int, rep: int) -> tuple[int, int]:
    """Independent data and sampling seeds for one phase-map trial."""
    a, b = np.random.SeedSequence([grid_seed, i, j, rep]).generate_state(2)
    return int(a), int(b)


def make_trial(problem: str, dims, rank: int, level: float, seeds):
    """Ground truth plus observation for one trial.

    For MC ``level`` is the sampling rate and the second item is the mask; for
    RPCA it is the corrupted fraction and the second item is the corruption
    support.
    """
    x0 = random_tucker(dims, TuckerSpec((rank,) * 3, seed=seeds[0]))
    if problem == MC:
        return x0, random_mask(dims, level, seeds[1])
    if problem == RPCA:
        m, support = sparse_corruption(x0, level, seeds[1])
        return x0, (m, support)
    raise ValueError(f"unknown problem {problem!r}")


def relative_error(x, x0) -> float:
    return float(np.linalg.norm(x - x0) / np.linalg.norm(x0))


def _run_trial(args):
    problem, dims, rank, level, seeds, cfg, solver = args
    x0, obs = make_trial(problem, dims, rank, level, seeds)
    try:
        if problem == MC:
            x = (solver or _hnn_mc_x)(np.where(obs, x0, 0.0), obs, cfg)
        else:
            x = (solver or _hnn_rpca_x)(obs[0], None, cfg)
        err = relative_error(x, x0)
    except Exception as exc:  # a failed trial is a failed trial, never a failed sweep
        log.warning("trial failed (rank %d, level %g): %s", rank, level, exc)
        err = np.inf
    return err if np.isfinite(err) else np.inf


def _hnn_mc_x(m, mask, cfg):
    return hnn_mc(m, mask, cfg).x


def _hnn_rpca_x(m, _mask, cfg):
    return hnn_rpca(m, cfg).x


def mean_fill(m, mask, _cfg=None):
    """Trivial completion: every missing entry gets the mean of the observed ones."""
    return np.where(mask, m, m[mask].mean())


def phase_map(
    grid: PhaseGrid,
    problem: str,
    cfg: Optional[SolverConfig] = None,
    workers: int = 1,
    solver: Optional[Callable] = None,
) -> PhaseMap:
    """Success-rate matrix over (rank, sampling rate or corruption ratio).

    A trial succeeds when its relative reconstruction error is below
    ``grid.threshold``.  Trial seeds depend only on (grid seed, cell,
    repeat), so ``workers > 1`` gives the same map as a serial run.
    ``solver(m, mask, cfg) -> x`` swaps in a different method (``mask`` is
    None for RPCA).
    """
    problem = problem.lower()
    if problem not in (MC, RPCA):
        raise ValueError(f"problem must be 'mc' or 'rpca', got {problem!r}")
    cfg = cfg or SolverConfig()
    jobs = [
        (problem, grid.dims, r, v, trial_seeds(grid.seed, i, j, k), cfg, solver)
        for i, r in enumerate(grid.ranks)
        for j, v in enumerate(grid.axis2)
        for k in range(grid.repeats)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            errs = list(pool.map(_run_trial, jobs, chunksize=4))
    else:
        errs = [_run_trial(job) for job in jobs]
    errors = np.array(errs).reshape(len(grid.ranks), len(grid.axis2), grid.repeats)
    with np.errstate(invalid="ignore"):
        mean_errors = errors.mean(axis=2)
    return PhaseMap(
        problem=problem,
        ranks=[int(r) for r in grid.ranks],
        axis2=[float(v) for v in grid.axis2],
        rates=(errors < grid.threshold).mean(axis=2),
        mean_errors=mean_errors,
        errors=errors,
    )


# --------------------------------------------------------------------------
# convergence monitoring


class QualityMonitor:
    """Solver callback that records PSNR and SSIM against a reference per iteration.

    Both use the reference's dynamic range as peak.  PSNR saturates at
    ``psnr_cap`` dB so an exact recovery does not read as unbounded change.
    """

    def __init__(self, ref, psnr_cap: float = 100.0):
        self.ref = np.asarray(ref, dtype=np.float64)
        self.peak = float(self.ref.max() - self.ref.min()) or 1.0
        self.psnr_cap = psnr_cap
        self.psnr: list[float] = []
        self.ssim: list[float] = []

    def __call__(self, it, x, e):
        self.psnr.append(min(psnr(x, self.ref, peak=self.peak), self.psnr_cap))
        self.ssim.append(ssim(x, self.ref, data_range=self.peak))

    def stable_at(self, rel: float = 1e-3) -> int:
        return max(stabilization_iteration(self.psnr, rel), stabilization_iteration(self.ssim, rel))


def stabilization_iteration(history, rel: float = 1e-3) -> int:
    """First 1-based iteration after which every step changes the value by less than ``rel`` (relative).

    A history whose last step is still large stabilizes at its final
    iteration, vacuously; check convergence separately.
    """
    h = np.asarray(history, dtype=np.float64)
    if h.size == 0:
        return 1
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.abs(np.diff(h)) / np.maximum(np.abs(h[:-1]), 1e-300)
    bad = np.flatnonzero(~(step < rel))
    # step k compares iterations k+1 and k+2 (1-based)
    return 1 if bad.size == 0 else int(bad[-1]) + 2


# --------------------------------------------------------------------------
# multi-temporal data


def multitemporal_reshape(t4) -> np.ndarray:
    """``(M, N, C, T) -> (M, N, C*T)`` with band index ``c + C*t`` (channel fastest)."""
    t4 = np.asarray(t4, dtype=np.float64)
    if t4.ndim != 4:
        raise ValueError(f"expected a 4-order array, got shape {t4.shape}")
    m, n, c, t = t4.shape
    return np.swapaxes(t4, 2, 3).reshape(m, n, c * t)


def multitemporal_unreshape(t3, channels: int) -> np.ndarray:
    t3 = np.asarray(t3, dtype=np.float64)
    m, n, ct = t3.shape
    if ct % channels:
        raise ValueError(f"{ct} bands do not split into {channels} channels")
    return np.swapaxes(t3.reshape(m, n, ct // channels, channels), 2, 3)


def smooth_video(m: int, n: int, channels: int, frames: int, seed: int = 0, components: int = 3):
    """Piecewise-smooth multi-temporal scene in [0.05, 0.95], shape ``(M, N, C, T)``.

    A few spatial fields (smooth bumps plus one sharp region boundary) are
    mixed by per-channel signatures that drift slowly over time, so the
    channel-time unfolding is low rank.
    """
    rng = np.random.default_rng(seed)
    ii, jj = np.meshgrid(np.linspace(0, 1, m), np.linspace(0, 1, n), indexing="ij")
    fields = []
    for _ in range(components - 1):
        f = np.zeros((m, n))
        for _ in range(4):
            ci, cj = rng.uniform(0, 1, 2)
            w = rng.uniform(0.15, 0.4)
            f += rng.uniform(0.5, 1.0) * np.exp(-((ii - ci) ** 2 + (jj - cj) ** 2) / (2 * w * w))
        fields.append(f / f.max())
    slope = rng.uniform(-1, 1)
    fields.append((jj - 0.5 > slope * (ii - 0.5)).astype(float))

    sig = rng.uniform(0.2, 1.0, size=(components, channels))
    drift = 1.0 + 0.15 * np.sin(np.linspace(0, np.pi, frames)[None, :] + rng.uniform(0, np.pi, (components, 1)))
    coef = sig[:, :, None] * drift[:, None, :]
    video = np.einsum("kij,kct->ijct", np.stack(fields), coef)
    lo, hi = video.min(), video.max()
    return 0.05 + 0.9 * (video - lo) / (hi - lo)


def cloud_masks(m: int, n: int, frames: int, max_cover: float = 0.3, seed: int = 0) -> np.ndarray:
    """Boolean ``(M, N, T)`` cloud cover, true = clouded; each frame covers at most ``max_cover``."""
    rng = np.random.default_rng(seed)
    ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    out = np.zeros((m, n, frames), dtype=bool)
    for t in range(frames):
        target = rng.uniform(0.5 * max_cover, max_cover)
        cover = np.zeros((m, n), dtype=bool)
        for _ in range(50):
            ci, cj = rng.uniform(0, m), rng.uniform(0, n)
            ri, rj = rng.uniform(0.08, 0.25) * m, rng.uniform(0.08, 0.25) * n
            blob = ((ii - ci) / ri) ** 2 + ((jj - cj) / rj) ** 2 <= 1.0
            if (cover | blob).mean() > max_cover:
                continue
            cover |= blob
            if cover.mean() >= target:
                break
        out[:, :, t] = cover
    return out
