"""Benchmark sweep harness: degrade -> solve -> score, over a condition matrix.

A benchmark config is a JSON document:

    {
      "images":   ["cameraman.png", ...],
      "blurs":    [{"kind": "uniform", "l": 9},
                   {"kind": "gaussian", "l": 9, "sigma": 2.0}],
      "bsnrs_db": [30, 40, 50, 60],
      "variants": ["tv-bc", "tv-et", "tv-cg", "tv-md"],
      "lambdas":  [1e-4, 1e-3, 1e-2],
      "dropout_fraction": 0.0,
      "seed": 0,
      "max_iters": 500,
      "rel_obj_tol": 1e-4,
      "frame_levels": 4
    }

Each (image, blur, bsnr) condition is degraded once with a seed derived
deterministically from the base seed, then every (variant, lambda) cell runs
on the same degraded data.  ISNR is scored over the observed region, the one
region all variants share; full-image SNR is reported for the variants that
reconstruct the full grid.  Cells may run on a thread pool sized by the
MASKDECONV_THREADS environment variable (default 1); row order and values do
not depend on the pool size.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ParameterError
from .grids import Kernel, embed_centered, make_kernel
from .imgio import read_image
from .pipeline import DegradeSpec, degrade, isnr, snr
from .solvers import VARIANTS, AdmmConfig, FrameSpec, edgetaper, solve

REPORT_COLUMNS = (
    "image", "blur", "bsnr_db", "variant", "lambda",
    "isnr_db", "snr_full_db", "iterations", "wall_seconds", "seconds_per_iter",
)

# benchmark-level variant names: the solver variants plus the edge-tapered baselines
BENCH_VARIANTS = tuple(v.replace("_", "-") for v in VARIANTS) + ("tv-et", "fa-et")


def normalize_variant(name: str) -> str:
    """Accept dash or underscore spellings; return the dashed benchmark name."""
    v = name.strip().lower().replace("_", "-")
    if v not in BENCH_VARIANTS:
        raise ParameterError(f"unknown variant {name!r}, expected one of {BENCH_VARIANTS}")
    return v


def solver_variant(bench_name: str) -> tuple[str, bool]:
    """Map a benchmark variant to (solver variant, edgetaper preprocessing)."""
    v = normalize_variant(bench_name)
    if v.endswith("-et"):
        return v.split("-")[0] + "_bc", True
    return v.replace("-", "_"), False


def kernel_from_config(blur: dict) -> Kernel:
    params = {k: v for k, v in blur.items() if k not in ("kind", "l")}
    return make_kernel(blur["kind"], int(blur["l"]), **params)


def condition_seed(base_seed: int, index: int) -> int:
    """Stable per-condition seed so rows do not depend on evaluation order."""
    return int(np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1)[0])


def run_cell(x_true, y, mask, kernel: Kernel, bench_variant: str, lam: float,
             *, max_iters: int = 500, rel_obj_tol: float = 1e-4,
             frame_levels: int = 4, cg_iters: int = 1) -> dict:
    """Solve one (variant, lambda) cell on already-degraded data and score it."""
    variant, taper = solver_variant(bench_variant)
    y_in = edgetaper(y, kernel) if taper else y
    cfg = AdmmConfig(lam=lam, variant=variant, max_iters=max_iters,
                     rel_obj_tol=rel_obj_tol, frame=FrameSpec(levels=frame_levels),
                     cg_iters=cg_iters)
    start = time.perf_counter()
    result = solve(y_in, kernel, mask, cfg)
    wall = time.perf_counter() - start

    full_output = result.estimate.shape == mask.shape
    estimate_full = result.estimate if full_output else embed_centered(result.estimate, mask)
    y_full = embed_centered(y, mask)
    row = {
        "variant": bench_variant,
        "lambda": lam,
        "isnr_db": isnr(x_true, y_full, estimate_full, mask),
        "snr_full_db": snr(x_true, result.estimate, np.ones(mask.shape, dtype=bool))
        if full_output else None,
        "iterations": result.iterations,
        "wall_seconds": wall,
        "seconds_per_iter": wall / result.iterations,
    }
    return row


def run_benchmark(config: dict, progress=None) -> list[dict]:
    """Run the full sweep matrix; returns one row dict per cell in config order."""
    images = config["images"]
    blurs = config["blurs"]
    bsnrs = config.get("bsnrs_db", [40.0])
    variants = [normalize_variant(v) for v in config.get("variants", ["tv-md"])]
    lambdas = [float(v) for v in config.get("lambdas", [1e-3])]
    if any(lam <= 0 for lam in lambdas):
        raise ParameterError("lambda grid must be strictly positive")
    dropout = float(config.get("dropout_fraction", 0.0))
    base_seed = int(config.get("seed", 0))
    solver_kwargs = dict(
        max_iters=int(config.get("max_iters", 500)),
        rel_obj_tol=float(config.get("rel_obj_tol", 1e-4)),
        frame_levels=int(config.get("frame_levels", 4)),
        cg_iters=int(config.get("cg_iters", 1)),
    )
    threads = max(1, int(os.environ.get("MASKDECONV_THREADS", "1")))

    rows: list[dict] = []
    cond_index = 0
    for image_path in images:
        x_true = read_image(image_path) if isinstance(image_path, str) else np.asarray(image_path)
        image_name = image_path if isinstance(image_path, str) else "array"
        for blur in blurs:
            kernel = kernel_from_config(blur)
            for bsnr in bsnrs:
                spec = DegradeSpec(kernel=kernel, bsnr_db=float(bsnr),
                                   dropout_fraction=dropout,
                                   seed=condition_seed(base_seed, cond_index))
                cond_index += 1
                y, mask, _sigma = degrade(x_true, spec)

                cells = [(v, lam) for v in variants for lam in lambdas]

                def one(cell):
                    v, lam = cell
                    return run_cell(x_true, y, mask, kernel, v, lam, **solver_kwargs)

                if threads > 1:
                    with ThreadPoolExecutor(max_workers=threads) as pool:
                        cell_rows = list(pool.map(one, cells))
                else:
                    cell_rows = [one(c) for c in cells]

                for row in cell_rows:
                    row.update(image=image_name, blur=blur["kind"], bsnr_db=float(bsnr))
                    rows.append(row)
                    if progress is not None:
                        progress(row)
    return rows


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_report_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for row in rows:
            writer.writerow([_format_value(row.get(c)) for c in REPORT_COLUMNS])


def write_report_json(rows: list[dict], path) -> None:
    ordered = [{c: row.get(c) for c in REPORT_COLUMNS} for row in rows]
    with open(path, "w") as fh:
        json.dump(ordered, fh, indent=2)
        fh.write("\n")


def load_config(path) -> dict:
    with open(path) as fh:
        config = json.load(fh)
    for key in ("images", "blurs"):
        if key not in config or not config[key]:
            raise ParameterError(f"benchmark config must list at least one entry in {key!r}")
    return config
