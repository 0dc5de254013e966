"""Catalog of closed convex functions on R^d.

Every kind exposes value, proximal map, Fenchel conjugate, a canonical
subgradient and a maximizer of ``<z, x> - f(x)`` (an element of the
conjugate's subdifferential). Extended reals are plain floats with
``math.inf``; no oracle ever returns NaN.

================  ==========================  =================
kind              conjugate                   conjugate smooth
================  ==========================  =================
Zero              indicator of {0}            no
Quadratic         |z|^2/(2a) + <c, z>         yes
IndicatorPoint    <p, z>                      yes
IndicatorBox      sum_j max(hi_j z_j, lo_j z_j)  only if lo == hi
IndicatorBall     <c, z> + r |z|              only if r == 0
L1                indicator of |z|_inf <= lam no
Affine            indicator of {g}, minus b   no
Regularized       via its prox (closed form)  yes when a > 0
================  ==========================  =================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tolerances import DEFAULT

INF = math.inf


class DomainError(ValueError):
    """Point outside the domain of a function (or of its conjugate)."""


class UnsupportedInstance(ValueError):
    """Function combination outside what the closed-form solvers cover."""


class InfeasibleInstance(ValueError):
    """The domains of the functions do not intersect."""


class UnboundedInstance(ValueError):
    """A subproblem has no maximizer because it is unbounded."""


def _vec(a, dim: int | None = None) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(a, dtype=float))
    if dim is not None and arr.shape == (1,) and dim != 1:
        arr = np.full(dim, arr[0])
    return arr


def _check(x, dim: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (dim,):
        raise ValueError(f"expected a vector of dimension {dim}, got shape {x.shape}")
    return x


def _slack(ref) -> float:
    scale = float(np.max(np.abs(ref))) if np.size(ref) else 0.0
    return DEFAULT.domain * (1.0 + scale)


class ConvexFunction:
    """Base class; subclasses implement the closed forms."""

    dim: int
    conj_smooth = False
    separable = True
    # strong-convexity modulus of the exact quadratic kinds
    curvature = 0.0

    def eval(self, x) -> float:
        raise NotImplementedError

    def prox(self, tau: float, y) -> np.ndarray:
        raise NotImplementedError

    def conjugate(self, z) -> float:
        raise NotImplementedError

    def subgradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def conj_argmax(self, z) -> np.ndarray:
        """A maximizer of <z, x> - f(x); raises when none exists."""
        raise NotImplementedError

    def subdiff_bounds(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Per-coordinate interval of the subdifferential (separable kinds only)."""
        raise UnsupportedInstance(f"{type(self).__name__} is not coordinate-separable")

    def in_domain(self, x) -> bool:
        return self.eval(x) < INF

    def conj_prox(self, sigma: float, y) -> np.ndarray:
        """prox of sigma * f^* at y, by the Moreau decomposition."""
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        y = _check(y, self.dim)
        return y - sigma * self.prox(1.0 / sigma, y / sigma)

    def __call__(self, x) -> float:
        return self.eval(x)


@dataclass(frozen=True, eq=False)
class Zero(ConvexFunction):
    dim: int = 1

    def eval(self, x):
        _check(x, self.dim)
        return 0.0

    def prox(self, tau, y):
        return _check(y, self.dim).copy()

    def conjugate(self, z):
        z = _check(z, self.dim)
        return 0.0 if np.max(np.abs(z)) <= DEFAULT.domain else INF

    def subgradient(self, x):
        _check(x, self.dim)
        return np.zeros(self.dim)

    def conj_argmax(self, z):
        if self.conjugate(z) == INF:
            raise UnboundedInstance("sup_x <z, x> is unbounded for z != 0")
        return np.zeros(self.dim)

    def subdiff_bounds(self, x):
        _check(x, self.dim)
        return np.zeros(self.dim), np.zeros(self.dim)


@dataclass(frozen=True, eq=False)
class Quadratic(ConvexFunction):
    """(a/2) |x - c|^2 with a > 0."""

    a: float
    c: np.ndarray
    dim: int = field(init=False)
    conj_smooth = True

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("Quadratic needs a > 0")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "c", _vec(self.c))
        object.__setattr__(self, "dim", len(self.c))

    @property
    def curvature(self):
        return self.a

    def eval(self, x):
        x = _check(x, self.dim)
        return 0.5 * self.a * float(np.dot(x - self.c, x - self.c))

    def prox(self, tau, y):
        y = _check(y, self.dim)
        return (y + tau * self.a * self.c) / (1.0 + tau * self.a)

    def conjugate(self, z):
        z = _check(z, self.dim)
        return float(np.dot(z, z)) / (2.0 * self.a) + float(np.dot(self.c, z))

    def subgradient(self, x):
        return self.a * (_check(x, self.dim) - self.c)

    def conj_argmax(self, z):
        return self.c + _check(z, self.dim) / self.a

    def subdiff_bounds(self, x):
        g = self.subgradient(x)
        return g, g.copy()


@dataclass(frozen=True, eq=False)
class IndicatorPoint(ConvexFunction):
    p: np.ndarray
    dim: int = field(init=False)
    conj_smooth = True

    def __post_init__(self):
        object.__setattr__(self, "p", _vec(self.p))
        object.__setattr__(self, "dim", len(self.p))

    def eval(self, x):
        x = _check(x, self.dim)
        return 0.0 if np.max(np.abs(x - self.p)) <= _slack(self.p) else INF

    def prox(self, tau, y):
        _check(y, self.dim)
        return self.p.copy()

    def conjugate(self, z):
        return float(np.dot(self.p, _check(z, self.dim)))

    def subgradient(self, x):
        if self.eval(x) == INF:
            raise DomainError("x is not the point")
        return np.zeros(self.dim)

    def conj_argmax(self, z):
        _check(z, self.dim)
        return self.p.copy()

    def subdiff_bounds(self, x):
        if self.eval(x) == INF:
            raise DomainError("x is not the point")
        return np.full(self.dim, -INF), np.full(self.dim, INF)


@dataclass(frozen=True, eq=False)
class IndicatorBox(ConvexFunction):
    lo: np.ndarray
    hi: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        lo, hi = _vec(self.lo), _vec(self.hi)
        if lo.shape != hi.shape:
            lo, hi = np.broadcast_arrays(lo, hi)
            lo, hi = lo.copy(), hi.copy()
        if np.any(lo > hi):
            raise ValueError("IndicatorBox needs lo <= hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "dim", len(lo))

    @property
    def conj_smooth(self):
        return bool(np.all(self.lo == self.hi))

    def _tol(self):
        finite = np.concatenate([self.lo[np.isfinite(self.lo)], self.hi[np.isfinite(self.hi)]])
        return _slack(finite)

    def eval(self, x):
        x = _check(x, self.dim)
        t = self._tol()
        return 0.0 if np.all(x >= self.lo - t) and np.all(x <= self.hi + t) else INF

    def prox(self, tau, y):
        return np.clip(_check(y, self.dim), self.lo, self.hi)

    def conjugate(self, z):
        z = _check(z, self.dim)
        total = 0.0
        for zj, lo, hi in zip(z, self.lo, self.hi):
            bound = hi if zj > 0 else lo
            if zj == 0 or (math.isinf(bound) and abs(zj) <= DEFAULT.domain):
                continue  # rounding residue against an infinite side counts as 0
            total += bound * zj
        return total

    def conj_prox(self, sigma, y):
        # y - sigma P(y / sigma) with exact zeros inside the box
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        y = _check(y, self.dim)
        t = y / sigma
        return np.where(t < self.lo, y - sigma * self.lo, np.where(t > self.hi, y - sigma * self.hi, 0.0))

    def subgradient(self, x):
        if self.eval(x) == INF:
            raise DomainError("x outside the box")
        return np.zeros(self.dim)

    def conj_argmax(self, z):
        z = _check(z, self.dim)
        out = np.clip(np.zeros(self.dim), self.lo, self.hi)
        out = np.where(z > 0, self.hi, np.where(z < 0, self.lo, out))
        if not np.all(np.isfinite(out)):
            raise UnboundedInstance("support function of the box is infinite here")
        return out

    def subdiff_bounds(self, x):
        x = _check(x, self.dim)
        if self.eval(x) == INF:
            raise DomainError("x outside the box")
        t = self._tol()
        at_lo = np.abs(x - self.lo) <= t
        at_hi = np.abs(x - self.hi) <= t
        lo = np.where(at_lo, -INF, 0.0)
        hi = np.where(at_hi, INF, 0.0)
        return lo, hi


@dataclass(frozen=True, eq=False)
class IndicatorBall(ConvexFunction):
    center: np.ndarray
    radius: float
    dim: int = field(init=False)
    separable = False

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("IndicatorBall needs radius >= 0")
        object.__setattr__(self, "center", _vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "dim", len(self.center))

    @property
    def conj_smooth(self):
        return self.radius == 0

    def eval(self, x):
        x = _check(x, self.dim)
        d = float(np.linalg.norm(x - self.center))
        return 0.0 if d <= self.radius + DEFAULT.domain * (1.0 + self.radius) else INF

    def prox(self, tau, y):
        y = _check(y, self.dim)
        r = y - self.center
        nr = float(np.linalg.norm(r))
        if nr <= self.radius:
            return y.copy()
        return self.center + (self.radius / nr) * r

    def conjugate(self, z):
        z = _check(z, self.dim)
        return float(np.dot(self.center, z)) + self.radius * float(np.linalg.norm(z))

    def subgradient(self, x):
        if self.eval(x) == INF:
            raise DomainError("x outside the ball")
        return np.zeros(self.dim)

    def conj_argmax(self, z):
        z = _check(z, self.dim)
        nz = float(np.linalg.norm(z))
        if nz == 0:
            return self.center.copy()
        return self.center + (self.radius / nz) * z


@dataclass(frozen=True, eq=False)
class L1(ConvexFunction):
    """lam * |x|_1."""

    lam: float
    dim: int = 1

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("L1 needs lam >= 0")
        object.__setattr__(self, "lam", float(self.lam))

    def eval(self, x):
        return self.lam * float(np.sum(np.abs(_check(x, self.dim))))

    def prox(self, tau, y):
        y = _check(y, self.dim)
        return np.sign(y) * np.maximum(np.abs(y) - tau * self.lam, 0.0)

    def conjugate(self, z):
        z = _check(z, self.dim)
        return 0.0 if np.max(np.abs(z)) <= self.lam + DEFAULT.domain * (1.0 + self.lam) else INF

    def subgradient(self, x):
        # 0 at kinks
        return self.lam * np.sign(_check(x, self.dim))

    def conj_argmax(self, z):
        if self.conjugate(z) == INF:
            raise UnboundedInstance("|z|_inf exceeds lam")
        return np.zeros(self.dim)

    def subdiff_bounds(self, x):
        x = _check(x, self.dim)
        s = np.sign(x)
        lo = np.where(s == 0, -self.lam, self.lam * s)
        hi = np.where(s == 0, self.lam, self.lam * s)
        return lo, hi


@dataclass(frozen=True, eq=False)
class Affine(ConvexFunction):
    """<g, x> + b."""

    g: np.ndarray
    b: float = 0.0
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "g", _vec(self.g))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "dim", len(self.g))

    def eval(self, x):
        return float(np.dot(self.g, _check(x, self.dim))) + self.b

    def prox(self, tau, y):
        return _check(y, self.dim) - tau * self.g

    def conjugate(self, z):
        z = _check(z, self.dim)
        return -self.b if np.max(np.abs(z - self.g)) <= _slack(self.g) else INF

    def subgradient(self, x):
        _check(x, self.dim)
        return self.g.copy()

    def conj_argmax(self, z):
        if self.conjugate(z) == INF:
            raise UnboundedInstance("z differs from the slope")
        return np.zeros(self.dim)

    def subdiff_bounds(self, x):
        _check(x, self.dim)
        return self.g.copy(), self.g.copy()


@dataclass(frozen=True, eq=False)
class Regularized(ConvexFunction):
    """scale * base(x) + (a/2) |x - c|^2, with scale > 0 and a >= 0."""

    base: ConvexFunction
    scale: float = 1.0
    a: float = 0.0
    c: np.ndarray | None = None
    dim: int = field(init=False)

    def __post_init__(self):
        if not self.scale > 0 or self.a < 0:
            raise ValueError("Regularized needs scale > 0 and a >= 0")
        c = np.zeros(self.base.dim) if self.c is None else _vec(self.c, self.base.dim)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "dim", self.base.dim)

    @property
    def conj_smooth(self):
        return self.a > 0 or self.base.conj_smooth

    @property
    def separable(self):
        return self.base.separable

    def eval(self, x):
        x = _check(x, self.dim)
        v = self.base.eval(x)
        if v == INF:
            return INF
        return self.scale * v + 0.5 * self.a * float(np.dot(x - self.c, x - self.c))

    def prox(self, tau, y):
        y = _check(y, self.dim)
        m = (y + tau * self.a * self.c) / (1.0 + tau * self.a)
        return self.base.prox(self.scale * tau / (1.0 + tau * self.a), m)

    def conj_argmax(self, z):
        z = _check(z, self.dim)
        if self.a > 0:
            return self.base.prox(self.scale / self.a, self.c + z / self.a)
        return self.base.conj_argmax(z / self.scale)

    def conjugate(self, z):
        z = _check(z, self.dim)
        if self.a == 0:
            return self.scale * self.base.conjugate(z / self.scale)
        x = self.conj_argmax(z)
        return float(np.dot(z, x)) - self.eval(x)

    def subgradient(self, x):
        x = _check(x, self.dim)
        return self.scale * self.base.subgradient(x) + self.a * (x - self.c)

    def subdiff_bounds(self, x):
        x = _check(x, self.dim)
        lo, hi = self.base.subdiff_bounds(x)
        lin = self.a * (x - self.c)
        return self.scale * lo + lin, self.scale * hi + lin


# -- stationary pairs ---------------------------------------------------------

def _is_linear(f: ConvexFunction) -> bool:
    return isinstance(f, (Zero, Affine))


def stationary_solve(funcs: Sequence[ConvexFunction], s) -> tuple[np.ndarray, list[np.ndarray]]:
    """Solve ``s in sum_i df_i(x)`` and split ``s`` into ``y_i in df_i(x)``.

    ``(x, y)`` is the KKT pair of ``max -sum f_i^*(y_i)  s.t.  sum y_i = s``.
    Supported: quadratics, zero and affine terms plus at most one other kind.
    """
    if not funcs:
        raise ValueError("need at least one function")
    dim = funcs[0].dim
    s = _check(s, dim)
    quad = [k for k, f in enumerate(funcs) if isinstance(f, Quadratic)]
    lin = [k for k, f in enumerate(funcs) if _is_linear(f)]
    other = [k for k in range(len(funcs)) if k not in quad and k not in lin]
    if len(other) > 1:
        raise UnsupportedInstance("at most one non-quadratic, non-linear function is supported")
    A = sum(funcs[k].a for k in quad)
    ac = sum((funcs[k].a * funcs[k].c for k in quad), np.zeros(dim))
    g = sum((funcs[k].g for k in lin if isinstance(funcs[k], Affine)), np.zeros(dim))
    # smooth part gradient: A x - ac + g; remaining residual must lie in dh(x)
    if other:
        h = funcs[other[0]]
        if A > 0:
            x = h.prox(1.0 / A, (s + ac - g) / A)
        else:
            try:
                x = h.conj_argmax(s - g)
            except UnboundedInstance as exc:
                raise UnboundedInstance(f"no x solves the inclusion: {exc}") from exc
        if h.eval(x) == INF:
            raise InfeasibleInstance("empty domain")
    elif A > 0:
        x = (s + ac - g) / A
    else:
        if np.max(np.abs(s - g)) > DEFAULT.domain * (1.0 + float(np.max(np.abs(g)))):
            raise UnboundedInstance("linear terms cannot absorb s")
        x = np.zeros(dim)
    y: list[np.ndarray | None] = [None] * len(funcs)
    for k in quad + lin:
        y[k] = funcs[k].subgradient(x)
    rest = s - sum((y[k] for k in quad + lin), np.zeros(dim))
    if other:
        y[other[0]] = rest
    elif lin and not quad:
        # absorb rounding into the first linear term
        y[lin[0]] = y[lin[0]] + rest
    elif quad:
        y[quad[-1]] = y[quad[-1]] + rest
    return x, y


# -- text descriptions ------------------------------------------------------------

def _parse_value(text: str, dim: int) -> np.ndarray:
    parts = [p for p in text.split(",") if p]
    return _vec([float(p) for p in parts], dim)


def parse_function(desc: str, dim: int) -> ConvexFunction:
    """Parse strings like ``"quadratic a=1 c=-1"``, ``"box lo=0 hi=inf"``.

    Vector parameters are comma-separated; a scalar is broadcast to ``dim``.
    """
    tokens = desc.split()
    if not tokens:
        raise ValueError("empty function description")
    kind, params = tokens[0].lower(), {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ValueError(f"bad parameter {tok!r} in {desc!r}")
        k, v = tok.split("=", 1)
        params[k.lower()] = v

    def get(name, default=None):
        if name in params:
            return params.pop(name)
        if default is None:
            raise ValueError(f"{kind}: missing parameter {name!r}")
        return default

    if kind == "zero":
        f = Zero(dim)
    elif kind == "quadratic":
        f = Quadratic(float(get("a", "1")), _parse_value(get("c", "0"), dim))
    elif kind == "point":
        f = IndicatorPoint(_parse_value(get("p"), dim))
    elif kind == "box":
        f = IndicatorBox(_parse_value(get("lo", "-inf"), dim), _parse_value(get("hi", "inf"), dim))
    elif kind == "ball":
        f = IndicatorBall(_parse_value(get("c", "0"), dim), float(get("r")))
    elif kind == "l1":
        f = L1(float(get("lambda")), dim)
    elif kind == "affine":
        f = Affine(_parse_value(get("g"), dim), float(get("b", "0")))
    else:
        raise ValueError(f"unknown function kind {kind!r}")
    if params:
        raise ValueError(f"{kind}: unknown parameters {sorted(params)}")
    if f.dim != dim:
        raise ValueError(f"{kind}: dimension {f.dim} does not match {dim}")
    return f
