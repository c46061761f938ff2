"""2-D DFT machinery for circulant operators.

A periodic convolution is diagonal in the 2-D DFT basis, so every circulant
operator here is represented by its transfer function ("spectrum"): the
complex 2-D array of DFT-domain diagonal entries.  Applying the operator is
fft2 -> pointwise multiply -> ifft2.  The module also builds the cached
diagonal inverses used by the solvers' quadratic steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .grids import Kernel, as_grid

# cache kinds: diagonal entries of the inverse each one represents
CACHE_KINDS = ("synthesis", "ridge", "tv")


def kernel_spectrum(kernel: Kernel, height: int, width: int) -> np.ndarray:
    """DFT transfer function of the kernel embedded periodically on an
    height x width grid, with the center tap circularly shifted to (0, 0).

    Entry (0, 0) equals the kernel's DC gain (the tap sum).
    """
    l = kernel.half_width
    if 2 * l + 1 > min(height, width):
        raise DimensionError(
            f"kernel support {2 * l + 1} exceeds grid {height}x{width}"
        )
    embed = np.zeros((height, width))
    embed[: 2 * l + 1, : 2 * l + 1] = kernel.taps
    embed = np.roll(embed, (-l, -l), axis=(0, 1))
    return np.fft.fft2(embed)


def conv_periodic(x, otf: np.ndarray) -> np.ndarray:
    """Periodic convolution: real(ifft2(fft2(x) * otf)).

    Pass np.conj(otf) to apply the adjoint operator.
    """
    xg = as_grid(x, "x")
    if xg.shape != otf.shape:
        raise DimensionError(f"image {xg.shape} vs spectrum {otf.shape}")
    return np.real(np.fft.ifft2(np.fft.fft2(xg) * otf))


def diff_spectra(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Spectra of the periodic first-difference filters.

    Horizontal: x[i, j] - x[i, j-1 mod w]; vertical: x[i, j] - x[i-1 mod h, j].
    Both have zero response at DC (constants are in the null space).
    """
    if height < 2 or width < 2:
        raise DimensionError(f"difference filters need a grid >= 2x2, got {height}x{width}")
    wj = np.exp(-2j * np.pi * np.arange(width) / width)
    wi = np.exp(-2j * np.pi * np.arange(height) / height)
    dh = np.tile(1.0 - wj, (height, 1))
    dv = np.tile((1.0 - wi)[:, None], (1, width))
    return dh, dv


def diff_h(x) -> np.ndarray:
    """Periodic horizontal first difference, x[i,j] - x[i,j-1]."""
    xg = np.asarray(x, dtype=np.float64)
    return xg - np.roll(xg, 1, axis=1)


def diff_v(x) -> np.ndarray:
    """Periodic vertical first difference, x[i,j] - x[i-1,j]."""
    xg = np.asarray(x, dtype=np.float64)
    return xg - np.roll(xg, 1, axis=0)


def diff_h_adjoint(y) -> np.ndarray:
    yg = np.asarray(y, dtype=np.float64)
    return yg - np.roll(yg, -1, axis=1)


def diff_v_adjoint(y) -> np.ndarray:
    yg = np.asarray(y, dtype=np.float64)
    return yg - np.roll(yg, -1, axis=0)


@dataclass(frozen=True)
class InverseFilterCache:
    """Precomputed DFT diagonal of one of the solvers' inverses.

    kind        diagonal entries
    ----        ----------------
    synthesis   conj(L) * L / (|L|^2 + gamma)   with L the blur spectrum
    ridge       1 / (|L|^2 + gamma)
    tv          1 / (|L|^2 + gamma |Dh|^2 + gamma |Dv|^2)
    """

    spectrum: np.ndarray
    gamma: float
    kind: str


def build_inverse_cache(
    kind: str,
    blur_spectrum: np.ndarray,
    gamma: float,
    dh_spectrum: np.ndarray | None = None,
    dv_spectrum: np.ndarray | None = None,
) -> InverseFilterCache:
    """Assemble the diagonal inverse for the given formulation.

    gamma is the penalty ratio (second penalty over first) and must be
    positive, which keeps every denominator bounded away from zero.
    """
    if gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if kind not in CACHE_KINDS:
        raise ParameterError(f"unknown cache kind {kind!r}, expected one of {CACHE_KINDS}")
    mag2 = np.abs(blur_spectrum) ** 2
    if kind == "synthesis":
        diag = np.conj(blur_spectrum) * blur_spectrum / (mag2 + gamma)
    elif kind == "ridge":
        diag = 1.0 / (mag2 + gamma)
    else:
        if dh_spectrum is None or dv_spectrum is None:
            raise ParameterError("tv cache requires both difference spectra")
        if dh_spectrum.shape != blur_spectrum.shape or dv_spectrum.shape != blur_spectrum.shape:
            raise DimensionError("difference spectra must match the blur spectrum shape")
        diag = 1.0 / (mag2 + gamma * np.abs(dh_spectrum) ** 2 + gamma * np.abs(dv_spectrum) ** 2)
    if not np.all(np.isfinite(diag)):
        raise ParameterError("inverse cache has non-finite entries")
    return InverseFilterCache(spectrum=np.asarray(diag, dtype=np.complex128), gamma=gamma, kind=kind)


def apply_diag_inverse(cache: InverseFilterCache, x) -> np.ndarray:
    """Apply the cached diagonal inverse: real(ifft2(diag * fft2(x)))."""
    xg = as_grid(x, "x")
    if xg.shape != cache.spectrum.shape:
        raise DimensionError(f"image {xg.shape} vs cache {cache.spectrum.shape}")
    return np.real(np.fft.ifft2(cache.spectrum * np.fft.fft2(xg)))
