"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver did not converge
(the result is still written).
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io as tio
from .errors import HNNError
from .experiments import NoiseCase, PhaseGrid, apply_noise, phase_map, random_mask
from .haar import WaveletBlocks, fhwt2, ifhwt2
from .metrics import evaluate
from .solvers import SolverConfig, hnn_mc, hnn_rpca

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOCONV = 0, 1, 2, 3

log = logging.getLogger("hnn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text: str) -> tuple[int, int, int]:
    try:
        dims = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be M,N,S integers, got {text!r}")
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"dims must be three positive integers, got {text!r}")
    return dims


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _lambda(text: str):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--lambda takes a number or 'auto', got {text!r}")


def _solver_flags(p):
    d = SolverConfig()
    p.add_argument("--mu-a", type=float, default=d.mu_a0, help="initial data-split penalty")
    p.add_argument("--mu-b", type=float, default=d.mu_b0, help="initial wavelet-split penalty")
    p.add_argument("--rho", type=float, default=d.rho, help="penalty growth factor (> 1)")
    p.add_argument("--tol", type=float, default=d.tol, help="relative stopping tolerance")
    p.add_argument("--max-iter", type=int, default=d.max_iter)
    p.add_argument("--mu-cap", type=float, default=d.mu_cap)
    p.add_argument("--pad", action="store_true", help="reflect-pad odd spatial sizes to even and crop after")


def _config(args, lam="auto") -> SolverConfig:
    try:
        return SolverConfig(
            mu_a0=args.mu_a, mu_b0=args.mu_b, rho=args.rho, lam=lam,
            max_iter=args.max_iter, tol=args.tol, mu_cap=args.mu_cap,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _pad_widths(shape):
    return ((0, shape[0] % 2), (0, shape[1] % 2), (0, 0))


def _crop(t, shape):
    return np.ascontiguousarray(t[: shape[0], : shape[1], :])


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hnn", description="Haar nuclear norm tensor restoration")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("inpaint", help="complete missing entries (mask: nonzero = observed)")
    q.add_argument("--input", required=True)
    q.add_argument("--mask", required=True)
    q.add_argument("--out", required=True)
    _solver_flags(q)

    q = sub.add_parser("denoise", help="robust PCA split into clean and sparse parts")
    q.add_argument("--input", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--lambda", dest="lam", type=_lambda, default="auto")
    q.add_argument("--sparse-out", help="also write the sparse component")
    _solver_flags(q)

    q = sub.add_parser("phase-map", help="success-rate sweep on random Tucker tensors")
    q.add_argument("--problem", choices=["mc", "rpca"], required=True)
    q.add_argument("--dims", type=_dims, default=(30, 30, 30))
    q.add_argument("--ranks", type=_int_list, required=True)
    q.add_argument("--axis2", type=_float_list, required=True,
                   help="sampling rates (mc) or corrupted fractions (rpca)")
    q.add_argument("--repeats", type=int, default=10)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--threshold", type=float, default=0.1)
    q.add_argument("--workers", type=int, default=1)
    q.add_argument("--out", required=True)
    _solver_flags(q)
    q.add_argument("--lambda", dest="lam", type=_lambda, default="auto")

    q = sub.add_parser("simulate", help="add synthetic noise (cases 1-6)")
    q.add_argument("--case", type=int, choices=range(1, 7), required=True)
    q.add_argument("--input", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--sigma", type=float, help="case 1 sigma on the 0-255 scale (default 75)")
    q.add_argument("--out", required=True)
    q.add_argument("--support-out", help="write the structured-noise support as a 0/1 tensor")

    q = sub.add_parser("mask", help="uniform random observation mask")
    q.add_argument("--rate", type=float, required=True)
    q.add_argument("--dims", type=_dims, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)

    q = sub.add_parser("metrics", help="print PSNR,SSIM,ERGAS,SAM as a CSV row")
    q.add_argument("--test", required=True)
    q.add_argument("--ref", required=True)
    q.add_argument("--peak", type=float, default=1.0)
    q.add_argument("--header", action="store_true")

    q = sub.add_parser("transform", help="Haar wavelet blocks of a tensor (or the inverse)")
    q.add_argument("--input", required=True,
                   help="tensor file, or with --inverse the prefix of the four block files")
    q.add_argument("--out-prefix", required=True)
    q.add_argument("--inverse", action="store_true")
    return p


def _restore(args, solve):
    m = tio.load(args.input)
    shape = m.shape
    if args.pad:
        m = np.pad(m, _pad_widths(shape), mode="symmetric")
    res = solve(m)
    x = _crop(res.x, shape)
    tio.save(x, args.out)
    last = res.final
    log.info("%d iterations, feasibility %.3e, objective %.6g", res.iterations, last.feasibility, last.objective)
    return res, shape


def cmd_inpaint(args) -> int:
    cfg = _config(args)
    mask_t = tio.load(args.mask)

    def solve(m):
        mask = mask_t != 0
        if args.pad:
            mask = np.pad(mask, _pad_widths(mask.shape), constant_values=False)
        return hnn_mc(m, mask, cfg)

    res, _ = _restore(args, solve)
    return EXIT_OK if res.converged else EXIT_NOCONV


def cmd_denoise(args) -> int:
    cfg = _config(args, args.lam)
    res, shape = _restore(args, lambda m: hnn_rpca(m, cfg))
    if args.sparse_out:
        tio.save(_crop(res.e, shape), args.sparse_out)
    return EXIT_OK if res.converged else EXIT_NOCONV


def cmd_phase_map(args) -> int:
    cfg = _config(args, args.lam)
    try:
        grid = PhaseGrid(ranks=args.ranks, axis2=args.axis2, dims=args.dims,
                         repeats=args.repeats, threshold=args.threshold, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    pm = phase_map(grid, args.problem, cfg, workers=args.workers)
    with open(args.out, "w", newline="") as fh:
        fh.write(pm.to_csv())
    return EXIT_OK


def cmd_simulate(args) -> int:
    x = tio.load(args.input)
    m, support = apply_noise(x, NoiseCase(case_id=args.case, seed=args.seed, sigma=args.sigma))
    tio.save(m, args.out)
    if args.support_out:
        tio.save(support.astype(np.float64), args.support_out)
    return EXIT_OK


def cmd_mask(args) -> int:
    try:
        mask = random_mask(args.dims, args.rate, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    tio.save(mask.astype(np.float64), args.out)
    return EXIT_OK


def cmd_metrics(args) -> int:
    rep = evaluate(tio.load(args.test), tio.load(args.ref), peak=args.peak)
    if args.header:
        print("psnr,ssim,ergas,sam")
    print(",".join(repr(float(v)) for v in rep.as_row()))
    return EXIT_OK


def block_paths(prefix: str) -> list[str]:
    return [f"{prefix}_b{i}.hnt" for i in range(1, 5)]


def cmd_transform(args) -> int:
    if args.inverse:
        blocks = WaveletBlocks(*(tio.load(p) for p in block_paths(args.input)))
        tio.save(ifhwt2(blocks), f"{args.out_prefix}.hnt")
    else:
        blocks = fhwt2(tio.load(args.input))
        for path, b in zip(block_paths(args.out_prefix), blocks.blocks):
            tio.save(b, path)
    return EXIT_OK


COMMANDS = {
    "inpaint": cmd_inpaint,
    "denoise": cmd_denoise,
    "phase-map": cmd_phase_map,
    "simulate": cmd_simulate,
    "mask": cmd_mask,
    "metrics": cmd_metrics,
    "transform": cmd_transform,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hnn {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HNNError, ValueError, OSError) as exc:
        print(f"hnn {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
