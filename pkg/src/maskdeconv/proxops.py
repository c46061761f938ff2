"""Moreau proximity operators used by the solvers.

Each operator solves argmin_w g(w) + (mu/2) ||w - v||^2 in closed form:
soft thresholding for the l1 norm, vector shrinkage for the isotropic TV
atom, and diagonal solves for the (masked) quadratic data terms.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .grids import as_grid, as_mask, require_same_shape


def soft(v, tau: float) -> np.ndarray:
    """Soft threshold: sign(v) * max(|v| - tau, 0), elementwise."""
    if tau < 0:
        raise ParameterError(f"threshold must be >= 0, got {tau}")
    a = np.asarray(v, dtype=np.float64)
    return np.sign(a) * np.maximum(np.abs(a) - tau, 0.0)


def vector_soft(vh, vv, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Vector (isotropic) shrinkage applied to per-pixel 2-vectors.

    Takes the two component planes, shrinks each pixel's vector magnitude by
    tau, and returns the shrunken planes.  Zero vectors map to zero (the
    0/||0|| = 0 convention).
    """
    if tau < 0:
        raise ParameterError(f"threshold must be >= 0, got {tau}")
    h = np.asarray(vh, dtype=np.float64)
    v = np.asarray(vv, dtype=np.float64)
    require_same_shape(h, v, "vector components")
    norm = np.hypot(h, v)
    scale = np.divide(np.maximum(norm - tau, 0.0), norm, out=np.zeros_like(norm), where=norm > 0.0)
    return scale * h, scale * v


def prox_quadratic(v, y, mu1: float) -> np.ndarray:
    """Prox of the quadratic data term (y + mu1*v) / (1 + mu1)."""
    if mu1 <= 0:
        raise ParameterError(f"mu1 must be positive, got {mu1}")
    vg = as_grid(v, "v")
    yg = as_grid(y, "y")
    require_same_shape(vg, yg)
    return (yg + mu1 * vg) / (1.0 + mu1)


def prox_masked_quadratic(v, y_embedded, mask, mu1: float) -> np.ndarray:
    """Prox of the masked data term, the diagonal solve
    (M*M + mu1 I)^{-1} (M*y + mu1 v).

    Observed pixels move toward the data as in prox_quadratic; unobserved
    pixels pass through unchanged.  y_embedded is the observed image extended
    with zeros at unobserved positions.
    """
    if mu1 <= 0:
        raise ParameterError(f"mu1 must be positive, got {mu1}")
    vg = as_grid(v, "v")
    yg = as_grid(y_embedded, "y_embedded")
    m = as_mask(mask)
    require_same_shape(vg, yg)
    require_same_shape(vg, m, "image and mask")
    return (yg * m + mu1 * vg) / (m + mu1)
