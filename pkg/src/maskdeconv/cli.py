"""Command-line interface.

Subcommands:
  degrade    blur + crop + noise (+ dropout) an image, emit y/mask/sidecar
  deblur     run one solver variant on an observed image
  metrics    ISNR/SNR of an estimate against the ground truth
  benchmark  run a sweep config and write a CSV/JSON report

Exit codes: 0 success, 1 usage error, 2 runtime or numerical error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import benchmark as bench
from .errors import MaskDeconvError
from .grids import make_kernel, valid_region_mask
from .imgio import read_image, read_mask, write_image, write_mask
from .pipeline import DegradeSpec, degrade, embed_centered, isnr, snr
from .solvers import AdmmConfig, FrameSpec, default_mu, edgetaper, solve

_BLUR_KINDS = ("uniform", "out_of_focus", "linear_motion", "gaussian")


def _add_blur_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--blur", required=True, choices=_BLUR_KINDS, help="blur kernel kind")
    p.add_argument("--l", required=True, type=int, help="kernel half-width")
    p.add_argument("--sigma", type=float, help="gaussian std dev")
    p.add_argument("--radius", type=float, help="out-of-focus disk radius")
    p.add_argument("--length", type=float, help="motion blur length")
    p.add_argument("--angle", type=float, help="motion blur angle (degrees)")


def _kernel_from_args(args):
    params = {}
    if args.sigma is not None:
        params["sigma"] = args.sigma
    if args.radius is not None:
        params["radius"] = args.radius
    if args.length is not None:
        params["length"] = args.length
    if args.angle is not None:
        params["angle_deg"] = args.angle
    return make_kernel(args.blur, args.l, **params)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maskdeconv",
                                     description="image deconvolution with unknown boundaries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="blur, crop, add noise, drop pixels")
    p.add_argument("--in", dest="input", required=True, help="ground-truth image")
    _add_blur_args(p)
    p.add_argument("--bsnr", type=float, default=40.0, help="target BSNR in dB (inf = noiseless)")
    p.add_argument("--dropout", type=float, default=0.0, help="fraction of observed pixels to drop")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="observed image output path")
    p.add_argument("--mask", required=True, help="mask image output path")

    p = sub.add_parser("deblur", help="run a solver variant")
    p.add_argument("--in", dest="input", required=True, help="observed image")
    p.add_argument("--mask", help="mask image (md/cg variants)")
    _add_blur_args(p)
    p.add_argument("--variant", required=True, choices=bench.BENCH_VARIANTS,
                   help="solver variant")
    p.add_argument("--lambda", dest="lam", required=True, type=float, help="regularization weight")
    p.add_argument("--mu1", type=float, help="first penalty (default from heuristic)")
    p.add_argument("--mu2", type=float, help="second penalty (default from heuristic)")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-4, help="relative objective tolerance")
    p.add_argument("--cg-iters", type=int, default=1, help="inner CG iterations (cg variants)")
    p.add_argument("--frame-levels", type=int, default=4)
    p.add_argument("--out", required=True, help="estimate output path")

    p = sub.add_parser("metrics", help="score an estimate")
    p.add_argument("--true", dest="truth", required=True, help="ground-truth image")
    p.add_argument("--obs", required=True, help="observed image")
    p.add_argument("--est", required=True, help="estimated image")
    p.add_argument("--mask", required=True, help="mask image")

    p = sub.add_parser("benchmark", help="run a sweep config")
    p.add_argument("--config", required=True, help="JSON benchmark config")
    p.add_argument("--out", required=True, help="report output path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--quiet", action="store_true")

    return parser


def _cmd_degrade(args) -> int:
    x = read_image(args.input)
    kernel = _kernel_from_args(args)
    spec = DegradeSpec(kernel=kernel, bsnr_db=args.bsnr,
                       dropout_fraction=args.dropout, seed=args.seed)
    y, mask, sigma = degrade(x, spec)
    write_image(args.out, y)
    write_mask(args.mask, mask)
    sidecar = {
        "kernel": {"kind": args.blur, "l": args.l},
        "bsnr_db": args.bsnr if math.isfinite(args.bsnr) else "inf",
        "dropout_fraction": args.dropout,
        "seed": args.seed,
        "sigma": sigma,
        "observed_pixels": int(mask.sum()),
    }
    Path(str(args.out) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    print(f"degraded {args.input}: y={y.shape[0]}x{y.shape[1]}, "
          f"{int(mask.sum())} observed pixels, sigma={sigma:.6g}")
    return 0


def _cmd_deblur(args) -> int:
    y = read_image(args.input)
    kernel = _kernel_from_args(args)
    variant, taper = bench.solver_variant(args.variant)
    needs_mask = not variant.endswith("_bc")
    if needs_mask:
        if args.mask:
            mask = read_mask(args.mask)
        else:
            # no mask given: assume the pure unknown-boundary setup
            mask = valid_region_mask(y.shape[0] + 2 * args.l, y.shape[1] + 2 * args.l, args.l)
    else:
        mask = None

    mu = None
    if args.mu1 is not None or args.mu2 is not None:
        mu1, mu2 = default_mu(args.lam)
        mu = (args.mu1 if args.mu1 is not None else mu1,
              args.mu2 if args.mu2 is not None else mu2)
    cfg = AdmmConfig(lam=args.lam, variant=variant, mu=mu, max_iters=args.max_iters,
                     rel_obj_tol=args.tol, frame=FrameSpec(levels=args.frame_levels),
                     cg_iters=args.cg_iters)
    y_in = edgetaper(y, kernel) if taper else y
    start = time.perf_counter()
    result = solve(y_in, kernel, mask, cfg)
    wall = time.perf_counter() - start
    write_image(args.out, result.estimate)
    status = "converged" if result.converged else "max-iters"
    print(f"{args.variant}: {status} after {result.iterations} iterations, "
          f"objective {result.final_objective:.6g}, {wall:.2f}s "
          f"({wall / result.iterations * 1e3:.1f} ms/iter)")
    return 0


def _cmd_metrics(args) -> int:
    x = read_image(args.truth)
    y = read_image(args.obs)
    est = read_image(args.est)
    mask = read_mask(args.mask)
    y_full = embed_centered(y, mask) if y.shape != mask.shape else y * mask
    est_full = embed_centered(est, mask) if est.shape != mask.shape else est
    isnr_db = isnr(x, y_full, est_full, mask)
    snr_db = snr(x, est_full, mask)
    print(f"ISNR = {isnr_db:.2f} dB")
    print(f"SNR  = {snr_db:.2f} dB")
    return 0


def _cmd_benchmark(args) -> int:
    config = bench.load_config(args.config)

    def progress(row):
        if not args.quiet:
            isnr_db = row["isnr_db"]
            print(f"{row['image']} {row['blur']} {row['bsnr_db']:g}dB "
                  f"{row['variant']} lambda={row['lambda']:g}: "
                  f"ISNR={isnr_db:.2f}dB iters={row['iterations']}")

    rows = bench.run_benchmark(config, progress=progress)
    if args.format == "csv":
        bench.write_report_csv(rows, args.out)
    else:
        bench.write_report_json(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; this tool reserves 2
        # for runtime failures and reports usage problems as 1
        return 1 if exc.code not in (0, None) else 0

    commands = {
        "degrade": _cmd_degrade,
        "deblur": _cmd_deblur,
        "metrics": _cmd_metrics,
        "benchmark": _cmd_benchmark,
    }
    try:
        return commands[args.command](args)
    except MaskDeconvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
