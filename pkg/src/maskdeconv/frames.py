"""Parseval undecimated Haar frame.

The transform is the a-trous (stationary) Haar cascade with periodic wrap:
at level j the 1-D filters are [1/2, 1/2] and [1/2, -1/2] dilated by 2^(j-1).
Each level splits the running approximation into four subbands whose squared
transfer functions sum to one, so the full analysis operator is exactly tight
with unit frame constant: energy is preserved and synthesize(analyze(x)) == x.

Coefficient stacks are arrays of shape (3*levels + 1, height, width): three
detail bands (horizontal, vertical, diagonal) per level, coarsest last band
being the approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .grids import as_grid


@dataclass(frozen=True)
class FrameSpec:
    levels: int = 4

    def __post_init__(self):
        if not 1 <= self.levels <= 6:
            raise ParameterError(f"frame levels must be in 1..6, got {self.levels}")

    @property
    def num_bands(self) -> int:
        return 3 * self.levels + 1


def _split(a: np.ndarray, step: int, axis: int) -> tuple[np.ndarray, np.ndarray]:
    shifted = np.roll(a, -step, axis=axis)
    return (a + shifted) / 2.0, (a - shifted) / 2.0


def _merge(low: np.ndarray, high: np.ndarray, step: int, axis: int) -> np.ndarray:
    # adjoint of _split
    return (low + np.roll(low, step, axis=axis) + high - np.roll(high, step, axis=axis)) / 2.0


def analyze(x, spec: FrameSpec = FrameSpec()) -> np.ndarray:
    """Frame analysis: image -> coefficient stack (the tight-frame forward map)."""
    a = as_grid(x, "x")
    bands = np.empty((spec.num_bands,) + a.shape)
    for j in range(spec.levels):
        step = 1 << j
        low_c, high_c = _split(a, step, axis=1)
        a, det_v = _split(low_c, step, axis=0)
        det_h, det_d = _split(high_c, step, axis=0)
        bands[3 * j] = det_h
        bands[3 * j + 1] = det_v
        bands[3 * j + 2] = det_d
    bands[-1] = a
    return bands


def synthesize(z, spec: FrameSpec = FrameSpec()) -> np.ndarray:
    """Frame synthesis: coefficient stack -> image, the exact adjoint of analyze."""
    stack = np.asarray(z, dtype=np.float64)
    if stack.ndim != 3 or stack.shape[0] != spec.num_bands:
        raise DimensionError(
            f"stack must have {spec.num_bands} bands for {spec.levels} levels, got shape {stack.shape}"
        )
    a = stack[-1]
    for j in reversed(range(spec.levels)):
        step = 1 << j
        low_c = _merge(a, stack[3 * j + 1], step, axis=0)
        high_c = _merge(stack[3 * j], stack[3 * j + 2], step, axis=0)
        a = _merge(low_c, high_c, step, axis=1)
    return a


def stack_norm1(z) -> float:
    """l1 norm over all coefficients of a stack."""
    return float(np.abs(np.asarray(z)).sum())
