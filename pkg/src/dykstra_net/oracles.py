"""Centralized reference solvers, independent of the distributed code paths.

Both oracles reduce to minimizing a sum of catalog functions over one shared
``x``. Coordinate-separable instances are solved exactly by bisection on the
summed subdifferential intervals; a quadratic sum plus one other function is
a single prox; anything else falls back to consensus ADMM.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .funcs import (INF, Affine, ConvexFunction, IndicatorBox, IndicatorPoint,
                    InfeasibleInstance, Quadratic, Regularized, UnboundedInstance,
                    UnsupportedInstance, Zero)

_BISECT_STEPS = 2200  # enough to shrink any finite double interval to adjacent floats


class OracleError(RuntimeError):
    """The iterative fallback did not reach its tolerance within budget."""


def _coord_domain(f: ConvexFunction) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(f, Regularized):
        return _coord_domain(f.base)
    if isinstance(f, IndicatorBox):
        return f.lo.copy(), f.hi.copy()
    if isinstance(f, IndicatorPoint):
        return f.p.copy(), f.p.copy()
    return np.full(f.dim, -INF), np.full(f.dim, INF)


def _exact_bounds(f: ConvexFunction, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Subdifferential intervals with exact, tolerance-free boundary tests."""
    if isinstance(f, Regularized):
        a, b = _exact_bounds(f.base, x)
        lin = f.a * (x - f.c)
        return f.scale * a + lin, f.scale * b + lin
    if isinstance(f, IndicatorBox):
        return np.where(x <= f.lo, -INF, 0.0), np.where(x >= f.hi, INF, 0.0)
    if isinstance(f, IndicatorPoint):
        return np.full(f.dim, -INF), np.full(f.dim, INF)
    return f.subdiff_bounds(x)


def _summed_bounds(funcs, x) -> tuple[np.ndarray, np.ndarray]:
    lo = np.zeros(len(x))
    hi = np.zeros(len(x))
    for f in funcs:
        a, b = _exact_bounds(f, x)
        lo += a
        hi += b
    return lo, hi


def _bisect_separable(funcs: Sequence[ConvexFunction]) -> np.ndarray:
    """Per-coordinate t with 0 in the summed subdifferential at t."""
    dim = funcs[0].dim
    dlo = np.full(dim, -INF)
    dhi = np.full(dim, INF)
    for f in funcs:
        a, b = _coord_domain(f)
        dlo = np.maximum(dlo, a)
        dhi = np.minimum(dhi, b)
    if np.any(dlo > dhi):
        raise InfeasibleInstance("domains do not intersect")
    # bracket: expand from the domain until the derivative changes sign
    left = np.where(np.isfinite(dlo), dlo, np.minimum(-1.0, dhi - 1.0))
    right = np.where(np.isfinite(dhi), dhi, np.maximum(1.0, left + 1.0))
    for _ in range(80):
        a_left, _ = _summed_bounds(funcs, left)
        _, b_right = _summed_bounds(funcs, right)
        grow_l = (a_left > 0) & ~np.isfinite(dlo)
        grow_r = (b_right < 0) & ~np.isfinite(dhi)
        if not np.any(grow_l | grow_r):
            break
        left = np.where(grow_l, np.minimum(left * 4.0, -1.0), left)
        right = np.where(grow_r, np.maximum(right * 4.0, 1.0), right)
    else:
        raise UnboundedInstance("sum of functions is unbounded below")
    lo, hi = left.copy(), right.copy()
    done = np.zeros(dim, dtype=bool)
    x = lo.copy()
    for _ in range(_BISECT_STEPS):
        mid = np.where(done, x, lo + 0.5 * (hi - lo))
        stalled = (mid == lo) | (mid == hi)
        a, b = _summed_bounds(funcs, mid)
        low_side = b < 0   # every subgradient negative: minimizer to the right
        high_side = a > 0
        hit = ~low_side & ~high_side
        x = np.where(hit & ~done, mid, x)
        done |= hit
        lo = np.where(low_side & ~done, mid, lo)
        hi = np.where(high_side & ~done, mid, hi)
        if np.all(done | stalled):
            break
    # coordinates that never hit exactly: pick the bracket end whose
    # interval comes closest to containing zero
    for j in np.flatnonzero(~done):
        best, dist = None, INF
        for t in (lo[j], hi[j]):
            xt = x.copy()
            xt[j] = t
            a, b = _summed_bounds(funcs, xt)
            d = max(a[j], 0.0) + max(-b[j], 0.0)
            if d < dist:
                best, dist = t, d
        x[j] = best
    return x


def _split_into_intervals(lo: np.ndarray, hi: np.ndarray, total: np.ndarray) -> list[np.ndarray]:
    """y_i in [lo_i, hi_i] per coordinate with sum_i y_i = total."""
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    y = np.clip(np.zeros_like(lo), lo, hi)
    for j in range(lo.shape[1]):
        need = total[j] - y[:, j].sum()
        for i in range(lo.shape[0]):
            if need == 0:
                break
            room = hi[i, j] - y[i, j] if need > 0 else lo[i, j] - y[i, j]
            step = min(need, room) if need > 0 else max(need, room)
            y[i, j] += step
            need -= step
        # rounding leftovers go to the first coordinate with an unbounded side
        if need != 0:
            y[int(np.argmax(hi[:, j] - lo[:, j])), j] += need
    return [row.copy() for row in y]


def _closed_form(funcs: Sequence[ConvexFunction]):
    """Quadratics and linear terms plus at most one other kind, or None."""
    quad = [f for f in funcs if isinstance(f, Quadratic)]
    lin = [f for f in funcs if isinstance(f, (Zero, Affine))]
    rest = [f for f in funcs if not isinstance(f, (Quadratic, Zero, Affine))]
    if len(rest) > 1:
        return None
    dim = funcs[0].dim
    A = sum(f.a for f in quad)
    b = sum((f.a * f.c for f in quad), np.zeros(dim))
    b = b - sum((f.g for f in lin if isinstance(f, Affine)), np.zeros(dim))
    if A == 0:
        return None
    return rest[0].prox(1.0 / A, b / A) if rest else b / A


def _admm(funcs: Sequence[ConvexFunction], tol: float, budget: int, rho: float = 1.0):
    """Consensus ADMM for min sum_k g_k(x); returns x and y_k in dg_k(x)."""
    m, dim = len(funcs), funcs[0].dim
    xs = np.zeros((m, dim))
    u = np.zeros((m, dim))
    z = np.zeros(dim)
    for it in range(budget):
        for k, f in enumerate(funcs):
            xs[k] = f.prox(1.0 / rho, z - u[k])
        z_old = z
        z = (xs + u).mean(axis=0)
        u += xs - z
        r = float(np.linalg.norm(xs - z))
        s = rho * math.sqrt(m) * float(np.linalg.norm(z - z_old))
        if it > 0 and max(r, s) <= tol * (1.0 + float(np.linalg.norm(z))):
            return z, [-rho * uk for uk in u]
    raise OracleError(f"ADMM did not reach {tol:g} in {budget} iterations")


def minimize_sum(funcs: Sequence[ConvexFunction], tol: float = 1e-12,
                 budget: int = 1_000_000) -> np.ndarray:
    """A minimizer of sum_k f_k over R^d."""
    if all(f.separable for f in funcs):
        return _bisect_separable(funcs)
    x = _closed_form(funcs)
    if x is not None:
        return x
    return _admm(funcs, tol, budget)[0]


def oracle_dykstra(funcs: Sequence[ConvexFunction], x0, tol: float = 1e-12,
                   budget: int = 1_000_000) -> np.ndarray:
    """Consensus minimizer of 1/2 |x - x0|^2 + sum_i f_i(x_i), replicated per block."""
    x0 = np.asarray(x0, dtype=float)
    n = len(funcs)
    if x0.ndim == 1:
        x0 = x0.reshape(n, -1)
    anchor = Quadratic(float(n), x0.mean(axis=0))
    x = minimize_sum(list(funcs) + [anchor], tol, budget)
    for f in funcs:
        if f.eval(x) == INF:
            raise InfeasibleInstance("oracle point leaves a domain")
    return np.tile(x, (n, 1))


def oracle_allocation(funcs: Sequence[ConvexFunction], tol: float = 1e-12,
                      budget: int = 1_000_000) -> tuple[np.ndarray, list[np.ndarray]]:
    """Minimizer x* of sum_i f_i and multipliers y*_i in df_i(x*) summing to zero."""
    funcs = list(funcs)
    if all(f.separable for f in funcs):
        x = _bisect_separable(funcs)
        bounds = [_exact_bounds(f, x) for f in funcs]
        lo = np.array([b[0] for b in bounds])
        hi = np.array([b[1] for b in bounds])
        return x, _split_into_intervals(lo, hi, np.zeros(len(x)))
    x = _closed_form(funcs)
    if x is not None:
        ys = [f.subgradient(x) for f in funcs
              if isinstance(f, (Quadratic, Zero, Affine))]
        y: list[np.ndarray] = []
        it = iter(ys)
        for f in funcs:
            y.append(next(it) if isinstance(f, (Quadratic, Zero, Affine)) else None)
        other = [k for k, v in enumerate(y) if v is None]
        rest = -sum((v for v in y if v is not None), np.zeros(len(x)))
        if other:
            y[other[0]] = rest
        return x, y
    return _admm(funcs, tol, budget)


def fenchel_young_residual(f: ConvexFunction, x, y) -> float:
    """f(x) + f*(y) - <x, y>; zero iff y is a subgradient of f at x."""
    return f.eval(x) + f.conjugate(y) - float(np.dot(x, y))
