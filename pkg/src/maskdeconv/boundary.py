"""Boundary-row operator and Woodbury-reduced linear solves.

The masked normal matrix (op* M*M op + gamma I) differs from its circulant
counterpart (op* op + gamma I) only through the rows of op at unobserved
pixels.  Writing B for those rows and C for the cached circulant inverse,
the Woodbury identity gives

    (op* M*M op + gamma I)^{-1} = C - C B* (B C B* - I)^{-1} B C,

so the big solve reduces to the cached inverse plus a system of the size of
the unobserved set, handled by (warm-started) conjugate gradient.  With
gamma > 0 the equivalent system (I - B C B*) s = -t is symmetric positive
definite, which is the form the CG actually solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericalError, ParameterError
from .grids import as_mask


@dataclass(frozen=True)
class BoundarySelector:
    """Row-major flat indices of the unobserved pixels (the rows of B)."""

    mask: np.ndarray
    boundary_flat: np.ndarray

    @classmethod
    def from_mask(cls, mask) -> "BoundarySelector":
        m = as_mask(mask)
        flat = np.flatnonzero(~m.ravel())
        return cls(mask=m, boundary_flat=flat)

    @property
    def size(self) -> int:
        return int(self.boundary_flat.size)

    def gather(self, grid: np.ndarray) -> np.ndarray:
        """Entries of a full grid at the unobserved positions."""
        return grid.ravel()[self.boundary_flat]

    def scatter(self, values: np.ndarray) -> np.ndarray:
        """Full grid that is `values` at unobserved positions, zero elsewhere."""
        if values.shape != (self.size,):
            raise ParameterError(
                f"expected {self.size} boundary values, got shape {values.shape}"
            )
        out = np.zeros(self.mask.size)
        out[self.boundary_flat] = values
        return out.reshape(self.mask.shape)


@dataclass
class CgState:
    """Warm-start state for the inner boundary system.

    With iters_per_outer=1 (the default) each outer call performs a single CG
    step from the previous solution, the scheme that converges fastest in
    practice; raise iters_per_outer and tighten tolerance for exact solves.
    """

    solution: np.ndarray
    tolerance: float = 1e-12
    iters_per_outer: int = 1
    last_residual: float = field(default=np.inf, init=False)

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ParameterError(f"tolerance must be positive, got {self.tolerance}")
        if self.iters_per_outer < 1:
            raise ParameterError(f"iters_per_outer must be >= 1, got {self.iters_per_outer}")

    @classmethod
    def for_selector(cls, sel: BoundarySelector, tolerance: float = 1e-12,
                     iters_per_outer: int = 1) -> "CgState":
        return cls(solution=np.zeros(sel.size), tolerance=tolerance,
                   iters_per_outer=iters_per_outer)


def apply_boundary_rows(v, sel: BoundarySelector, forward_op: Callable) -> np.ndarray:
    """Apply B: run the full circulant map, keep the unobserved entries."""
    return sel.gather(np.asarray(forward_op(v)))


def apply_boundary_rows_adjoint(w, sel: BoundarySelector, adjoint_op: Callable):
    """Apply B*: scatter boundary values to a zero grid, run the adjoint map."""
    return adjoint_op(sel.scatter(np.asarray(w, dtype=np.float64)))


class _IndefiniteSystem(Exception):
    pass


def _cg(apply_op: Callable, b: np.ndarray, x0: np.ndarray, tol: float,
        max_iters: int) -> tuple[np.ndarray, float]:
    """Plain CG on an SPD operator, warm-started at x0.

    Returns (solution, final residual norm).  Raises _IndefiniteSystem on a
    nonpositive curvature direction so the caller can switch systems.
    """
    x = x0.copy()
    r = b - apply_op(x)
    threshold = tol * max(float(np.linalg.norm(b)), np.finfo(float).tiny)
    rs = float(r @ r)
    if np.sqrt(rs) <= threshold:
        return x, np.sqrt(rs)
    p = r.copy()
    for _ in range(max_iters):
        ap = apply_op(p)
        curvature = float(p @ ap)
        if curvature <= 0.0:
            raise _IndefiniteSystem(
                f"nonpositive curvature {curvature:.3e} (||p||={np.linalg.norm(p):.3e})"
            )
        alpha = rs / curvature
        x += alpha * p
        r -= alpha * ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= threshold:
            rs = rs_new
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x, np.sqrt(rs)


def woodbury_solve(rhs, c_apply: Callable, sel: BoundarySelector, cg: CgState,
                   forward_op: Callable, adjoint_op: Callable):
    """Apply (op* M*M op + gamma I)^{-1} through the Woodbury identity.

    c_apply implements the cached circulant inverse C = (gamma I + op* op)^{-1};
    forward_op/adjoint_op are the full circulant map and its adjoint used to
    realize B.  The inner system is solved by CG per the state in `cg`
    (exactly when run to convergence, approximately in one-step mode);
    cg.solution is updated in place for the next warm start.
    """
    base = c_apply(rhs)
    if sel.size == 0:
        return base
    t = apply_boundary_rows(base, sel, forward_op)

    def bcb(s: np.ndarray) -> np.ndarray:
        return apply_boundary_rows(c_apply(apply_boundary_rows_adjoint(s, sel, adjoint_op)),
                                   sel, forward_op)

    # (B C B* - I) s = t  <=>  (I - B C B*) s = -t, SPD for gamma > 0
    def spd(s: np.ndarray) -> np.ndarray:
        return s - bcb(s)

    try:
        sol, res = _cg(spd, -t, cg.solution, cg.tolerance, cg.iters_per_outer)
    except _IndefiniteSystem:
        # documented fallback: normal equations of the same system, always PSD
        try:
            sol, res = _cg(lambda s: spd(spd(s)), spd(-t), cg.solution,
                           cg.tolerance, cg.iters_per_outer)
        except _IndefiniteSystem as exc:
            raise NumericalError(f"CG breakdown in boundary solve: {exc}") from exc
    cg.solution = sol
    cg.last_residual = res
    return base - c_apply(apply_boundary_rows_adjoint(sol, sel, adjoint_op))
