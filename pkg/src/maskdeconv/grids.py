"""Image grids, blur kernels, and observation masks.

Images are plain 2-D float64 numpy arrays ("grids"); masks are 2-D boolean
arrays of the same layout (True = pixel observed).  Blur kernels are small
dense tap matrices with odd support (2l+1) x (2l+1), where tap (l, l) is the
kernel origin, and carry their generator metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError

KERNEL_KINDS = ("uniform", "out_of_focus", "linear_motion", "gaussian", "custom")

# subpixel sampling density used to rasterize disk/line kernels
_SUBSAMPLES = 64


def as_grid(x, name: str = "grid") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"{name} contains NaN or Inf entries")
    return a


def as_mask(m, name: str = "mask") -> np.ndarray:
    """Coerce to a 2-D boolean array with at least one observed pixel."""
    a = np.asarray(m)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    a = a.astype(bool)
    if not a.any():
        raise ParameterError(f"{name} must mark at least one pixel as observed")
    return a


def require_same_shape(a: np.ndarray, b: np.ndarray, what: str = "operands") -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{what} have mismatched shapes {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class Kernel:
    """Compact blur point-spread function with odd square support.

    taps has shape (2l+1, 2l+1); the logical filter origin sits at the array
    center (l, l).  Named kinds are normalized to unit DC gain (taps sum to 1).
    """

    half_width: int
    taps: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        l = self.half_width
        if l < 0:
            raise ParameterError(f"half_width must be >= 0, got {l}")
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.shape != (2 * l + 1, 2 * l + 1):
            raise DimensionError(
                f"taps must have shape {(2 * l + 1, 2 * l + 1)}, got {taps.shape}"
            )
        if not np.all(np.isfinite(taps)):
            raise ParameterError("kernel taps must be finite")
        if self.kind not in KERNEL_KINDS:
            raise ParameterError(f"unknown kernel kind {self.kind!r}")
        object.__setattr__(self, "taps", taps)

    @property
    def support(self) -> int:
        return 2 * self.half_width + 1


def _disk_taps(l: int, radius: float) -> np.ndarray:
    """Disk indicator with boundary pixels weighted by covered area.

    Pixel coverage is estimated on a _SUBSAMPLES x _SUBSAMPLES subgrid, which
    is exact to ~1/_SUBSAMPLES^2 before the final normalization.
    """
    size = 2 * l + 1
    offs = (np.arange(_SUBSAMPLES) + 0.5) / _SUBSAMPLES - 0.5
    centers = np.arange(size) - l
    sub = centers[:, None] + offs[None, :]  # (size, sub) sample coordinates
    r2 = sub.reshape(size, 1, _SUBSAMPLES, 1) ** 2 + sub.reshape(1, size, 1, _SUBSAMPLES) ** 2
    return (r2 <= radius * radius).mean(axis=(2, 3))


def _motion_taps(l: int, length: float, angle_deg: float) -> np.ndarray:
    """Anti-aliased line segment of the given length through the center.

    Each pixel is weighted by max(0, 1 - distance to the segment), the usual
    hat rasterization; the segment spans (length - 1)/2 on each side.
    """
    size = 2 * l + 1
    half = max((length - 1.0) / 2.0, 0.0)
    theta = np.deg2rad(angle_deg)
    ux, uy = np.cos(theta), np.sin(theta)
    jj, ii = np.meshgrid(np.arange(size) - l, np.arange(size) - l)
    # image rows grow downward; use (x, y) = (col, -row) so angle is CCW from horizontal
    px, py = jj.astype(float), -ii.astype(float)
    t = np.clip(px * ux + py * uy, -half, half)
    dist = np.hypot(px - t * ux, py - t * uy)
    return np.maximum(0.0, 1.0 - dist)


def make_kernel(kind: str, l: int, **params) -> Kernel:
    """Build one of the named blur kernels with support (2l+1) x (2l+1).

    kind        parameters
    ----        ----------
    uniform     none; every tap is 1/(2l+1)^2
    out_of_focus  radius (default l); disk indicator, area-weighted boundary
    linear_motion length (default 2l+1), angle_deg (default 0, horizontal)
    gaussian    sigma (> 0); sampled exp(-(i^2+j^2)/(2 sigma^2))
    custom      taps; any finite (2l+1) x (2l+1) array, kept unnormalized

    All named kinds are normalized so the taps sum to exactly 1.
    """
    if l < 0:
        raise ParameterError(f"half_width l must be >= 0, got {l}")
    size = 2 * l + 1

    if kind == "uniform":
        taps = np.full((size, size), 1.0 / size**2)
    elif kind == "out_of_focus":
        radius = float(params.get("radius", l))
        if radius <= 0 and l > 0:
            raise ParameterError(f"out-of-focus radius must be positive, got {radius}")
        if radius > l:
            raise ParameterError(f"radius {radius} exceeds kernel support (l={l})")
        taps = _disk_taps(l, radius) if l > 0 else np.ones((1, 1))
    elif kind == "linear_motion":
        length = float(params.get("length", size))
        angle = float(params.get("angle_deg", 0.0))
        if length < 1:
            raise ParameterError(f"motion length must be >= 1, got {length}")
        if (length - 1.0) / 2.0 > l:
            raise ParameterError(f"motion length {length} exceeds kernel support (l={l})")
        taps = _motion_taps(l, length, angle)
    elif kind == "gaussian":
        sigma = float(params.get("sigma", 0.0))
        if sigma <= 0:
            raise ParameterError(f"gaussian sigma must be positive, got {sigma}")
        r = np.arange(size) - l
        g = np.exp(-(r[:, None] ** 2 + r[None, :] ** 2) / (2.0 * sigma**2))
        taps = g
    elif kind == "custom":
        if "taps" not in params:
            raise ParameterError("custom kernel requires taps=")
        return Kernel(half_width=l, taps=np.asarray(params["taps"], dtype=np.float64), kind="custom")
    else:
        raise ParameterError(f"unknown kernel kind {kind!r}")

    total = taps.sum()
    if total <= 0:
        raise ParameterError(f"degenerate {kind} kernel: taps sum to {total}")
    return Kernel(half_width=l, taps=taps / total, kind=kind, params=dict(params))


def valid_region_mask(height: int, width: int, l: int) -> np.ndarray:
    """Mask that keeps the centered (height-2l) x (width-2l) region.

    The discarded band of width l holds exactly the blur outputs that depend
    on pixels outside the image; l = 0 gives the all-true mask.
    """
    if height <= 0 or width <= 0:
        raise DimensionError(f"image dimensions must be positive, got {height}x{width}")
    if l < 0:
        raise ParameterError(f"band width l must be >= 0, got {l}")
    if height <= 2 * l or width <= 2 * l:
        raise DimensionError(
            f"band of width {l} leaves no observed pixels in a {height}x{width} image"
        )
    mask = np.zeros((height, width), dtype=bool)
    mask[l : height - l, l : width - l] = True
    return mask


def grid_axpy(a: float, x, y) -> np.ndarray:
    """Return a*x + y elementwise for two same-shaped grids."""
    xg = as_grid(x, "x")
    yg = as_grid(y, "y")
    require_same_shape(xg, yg)
    return a * xg + yg


def embed_centered(y, mask) -> np.ndarray:
    """Extend an observed image to the mask's full grid with a zero boundary.

    y must match the centered observed box of the mask (equal shapes, or
    smaller by an even margin on each axis); all observed pixels must lie
    inside that box.  Unobserved positions of the result are zeroed, so the
    output is exactly the masked embedding M*y.
    """
    yg = as_grid(y, "y")
    m = as_mask(mask)
    dr = m.shape[0] - yg.shape[0]
    dc = m.shape[1] - yg.shape[1]
    if dr < 0 or dc < 0 or dr % 2 or dc % 2:
        raise DimensionError(
            f"observed image {yg.shape} does not embed centered in grid {m.shape}"
        )
    r0, c0 = dr // 2, dc // 2
    inside = np.zeros(m.shape, dtype=bool)
    inside[r0 : r0 + yg.shape[0], c0 : c0 + yg.shape[1]] = True
    if (m & ~inside).any():
        raise DimensionError("mask marks observed pixels outside the embedded image box")
    out = np.zeros(m.shape)
    out[r0 : r0 + yg.shape[0], c0 : c0 + yg.shape[1]] = yg
    out[~m] = 0.0
    return out
