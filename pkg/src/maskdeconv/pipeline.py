"""Degradation pipeline and restoration quality metrics.

degrade() reproduces the benchmark protocol: blur the full image
periodically, keep only the valid region (the outputs that do not depend on
pixels outside the image), add Gaussian noise calibrated to a target blurred
signal-to-noise ratio, and optionally drop a random fraction of the
observed pixels (inpainting).  Noise and dropout come from numpy's PCG64
generator seeded explicitly, so a given spec always produces the same data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .grids import Kernel, as_grid, as_mask, embed_centered, valid_region_mask
from .spectral import conv_periodic, kernel_spectrum


@dataclass(frozen=True)
class DegradeSpec:
    kernel: Kernel
    bsnr_db: float = 40.0
    dropout_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.dropout_fraction < 1.0):
            raise ParameterError(
                f"dropout_fraction must be in [0, 1), got {self.dropout_fraction}"
            )
        if math.isnan(self.bsnr_db):
            raise ParameterError("bsnr_db must be a number (use math.inf for noiseless)")


def crop_valid(full, l: int) -> np.ndarray:
    """Central (h-2l) x (w-2l) crop: the blur outputs free of boundary influence."""
    g = as_grid(full, "image")
    h, w = g.shape
    if h <= 2 * l or w <= 2 * l:
        raise DimensionError(f"band of width {l} does not fit in {h}x{w}")
    return g[l : h - l, l : w - l].copy()


def degrade(x, spec: DegradeSpec) -> tuple[np.ndarray, np.ndarray, float]:
    """Blur, crop to the valid region, add calibrated noise, drop pixels.

    Returns (y, mask, sigma): the observed image of shape (h-2l, w-2l), the
    full-size observation mask (valid region minus dropout), and the noise
    standard deviation actually used.  sigma satisfies
    10*log10(var(blurred | observed) / sigma^2) = bsnr_db, with the variance
    taken mean-removed over the observed pixels; bsnr_db = inf gives exact,
    noiseless data.  Dropout removes round(fraction * m) observed pixels,
    chosen uniformly without replacement.
    """
    xg = as_grid(x, "x")
    l = spec.kernel.half_width
    blurred = conv_periodic(xg, kernel_spectrum(spec.kernel, *xg.shape))
    y = crop_valid(blurred, l)
    mask = valid_region_mask(*xg.shape, l)

    rng = np.random.default_rng(spec.seed)
    if spec.dropout_fraction > 0.0:
        observed_flat = np.flatnonzero(mask.ravel())
        n_drop = int(round(spec.dropout_fraction * observed_flat.size))
        drop = rng.choice(observed_flat, size=n_drop, replace=False)
        mask.ravel()[drop] = False
        if not mask.any():
            raise ParameterError("dropout removed every observed pixel")

    if math.isinf(spec.bsnr_db):
        sigma = 0.0
    else:
        inner = mask[l : mask.shape[0] - l, l : mask.shape[1] - l]
        signal_var = float(np.var(y[inner]))
        sigma = math.sqrt(signal_var / 10.0 ** (spec.bsnr_db / 10.0))
        y = y + sigma * rng.standard_normal(y.shape)
    return y, mask, sigma


def _region_energies(x_true, x_hat, region) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xt = as_grid(x_true, "x_true")
    xh = as_grid(x_hat, "x_hat")
    m = as_mask(region, "region")
    if xt.shape != xh.shape or xt.shape != m.shape:
        raise DimensionError(
            f"grids and region must share a shape: {xt.shape}, {xh.shape}, {m.shape}"
        )
    return xt[m], xh[m], m


def isnr(x_true, y_observed, x_hat, region) -> float:
    """Improvement in SNR of the estimate over the observation, in dB.

    All inputs live on the full grid (embed smaller images first); the sums
    run over the region's observed pixels.  Perfect recovery returns inf.
    """
    xt, xh, m = _region_energies(x_true, x_hat, region)
    yo = as_grid(y_observed, "y_observed")
    if yo.shape != m.shape:
        raise DimensionError(f"y_observed shape {yo.shape} vs region {m.shape}")
    num = float(np.sum((yo[m] - xt) ** 2))
    den = float(np.sum((xh - xt) ** 2))
    if den == 0.0:
        return math.inf
    return 10.0 * math.log10(num / den)


def snr(x_true, x_hat, region) -> float:
    """Signal-to-noise ratio of the estimate over the region, in dB."""
    xt, xh, _ = _region_energies(x_true, x_hat, region)
    den = float(np.sum((xh - xt) ** 2))
    if den == 0.0:
        return math.inf
    return 10.0 * math.log10(float(np.sum(xt**2)) / den)


def measured_bsnr(blurred, noisy, region) -> float:
    """Empirical BSNR of a degraded image given its noiseless blur, in dB."""
    b, nz, m = _region_energies(blurred, noisy, region)
    noise_var = float(np.var(nz - b))
    if noise_var == 0.0:
        return math.inf
    return 10.0 * math.log10(float(np.var(b)) / noise_var)


def make_phantom(size: int = 64, seed: int = 0) -> np.ndarray:
    """Deterministic cartoon test image in [0, 255]: ramps, boxes, a disk.

    Piecewise-smooth with strong contrast between opposite borders, so
    periodic-BC artifacts show up clearly.
    """
    rng = np.random.default_rng(seed)
    ii, jj = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    img = 40.0 + 140.0 * ii / (size - 1)
    img[(ii - 0.35 * size) ** 2 + (jj - 0.6 * size) ** 2 < (0.18 * size) ** 2] = 230.0
    r0, r1 = int(0.55 * size), int(0.85 * size)
    c0, c1 = int(0.1 * size), int(0.45 * size)
    img[r0:r1, c0:c1] = 25.0
    img[int(0.1 * size) : int(0.2 * size), int(0.55 * size) :] = 200.0
    img += 2.0 * rng.standard_normal((size, size))
    return np.clip(img, 0.0, 255.0)


__all__ = [
    "DegradeSpec",
    "crop_valid",
    "degrade",
    "embed_centered",
    "isnr",
    "snr",
    "measured_bsnr",
    "make_phantom",
]
