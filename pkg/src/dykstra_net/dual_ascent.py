"""Subset dual ascent on the resource-allocation dual.

Minimizes ``G(y) = sum_i f_i^*(y_i)`` subject to ``sum_i y_i = 0`` by exactly
re-optimizing the ``y`` of one vertex subset at a time with the subset sum
held fixed. Without smoothness of enough conjugates the method can stall at a
non-optimal point; the helpers here detect that and check the sufficient
overlap conditions for convergence. The lifting maps relate this dual to the
Dykstra dual on the doubled graph.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .funcs import INF, ConvexFunction, DomainError, Quadratic, UnboundedInstance, stationary_solve
from .graph import _UnionFind, in_diag_orth
from .trace import Trace, TraceRow

Subset = tuple[int, ...]


class UnboundedDual(UnboundedInstance):
    """Dual iterates left the configured bound."""


class NoKKTPair(LookupError):
    """No subset solve has been recorded for this subset."""


def _key(S) -> Subset:
    return tuple(sorted(int(i) for i in S))


@dataclass
class AllocationState:
    funcs: tuple[ConvexFunction, ...]
    y: np.ndarray
    step: int = 0
    # KKT multiplier x of the most recent solve of each subset
    subset_x: dict[Subset, np.ndarray] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.funcs)

    def copy(self) -> "AllocationState":
        return AllocationState(self.funcs, self.y.copy(), self.step,
                               {k: v.copy() for k, v in self.subset_x.items()})


def init_allocation(funcs: Sequence[ConvexFunction], y=None) -> AllocationState:
    funcs = tuple(funcs)
    dim = funcs[0].dim
    y = np.zeros((len(funcs), dim)) if y is None else np.array(y, dtype=float).reshape(len(funcs), dim)
    if not in_diag_orth(y, 1e-12):
        raise ValueError("allocation duals must sum to zero")
    for i, (f, yi) in enumerate(zip(funcs, y)):
        if f.conjugate(yi) == INF:
            raise DomainError(f"y_{i} is outside the domain of f_{i}^*")
    return AllocationState(funcs, y)


def allocation_objective(funcs: Sequence[ConvexFunction], y) -> float:
    """G(y) = sum_i f_i^*(y_i)."""
    return float(sum(f.conjugate(yi) for f, yi in zip(funcs, y)))


def _worse(candidate: float, current: float) -> bool:
    """Candidate loses beyond rounding; only then is the current point kept.

    Comparing G exactly would cap the accuracy of y near sqrt(eps |G|):
    true gains that small vanish in the rounding of G.
    """
    return candidate > current + 1e-12 * (1.0 + abs(current))


def ascend_subset(state: AllocationState, S) -> AllocationState:
    """Re-optimize y on ``S`` with its sum fixed; other vertices untouched."""
    S = _key(S)
    if len(S) < 2 or len(set(S)) != len(S):
        raise ValueError("a subset needs at least two distinct vertices")
    out = state.copy()
    funcs = [state.funcs[i] for i in S]
    s = state.y[list(S)].sum(axis=0)
    x, ys = stationary_solve(funcs, s)
    cur = allocation_objective(funcs, state.y[list(S)])
    cand = allocation_objective(funcs, ys)
    if not _worse(cand, cur):
        out.y[list(S)] = np.array(ys)
    out.subset_x[S] = np.asarray(x, dtype=float)
    out.step += 1
    return out


def subset_consensus_x(state: AllocationState, S) -> np.ndarray:
    """KKT multiplier x of the last solve of ``S``."""
    try:
        return state.subset_x[_key(S)].copy()
    except KeyError:
        raise NoKKTPair(f"subset {list(_key(S))} has not been solved") from None


@dataclass(frozen=True)
class StuckReport:
    flagged: bool
    x_values: tuple[np.ndarray, ...]
    improvements: tuple[float, ...]
    spread: float


def detect_stuck(state: AllocationState, subsets: Sequence, tol: float = 1e-9) -> StuckReport:
    """Flag states no scheduled subset can improve whose subset x values disagree."""
    xs, imps = [], []
    moved = False
    for S in subsets:
        trial = ascend_subset(state, S)
        xs.append(subset_consensus_x(trial, S))
        before = allocation_objective(state.funcs, state.y)
        imps.append(before - allocation_objective(trial.funcs, trial.y))
        moved |= bool(np.any(trial.y != state.y))
    spread = max((float(np.linalg.norm(a - b)) for a, b in itertools.combinations(xs, 2)),
                 default=0.0)
    return StuckReport(not moved and spread > tol, tuple(xs), tuple(imps), spread)


@dataclass(frozen=True)
class OverlapReport:
    ok: bool
    # pairs (S', S'', shared smooth vertex) linking all subsets
    chain: tuple[tuple[Subset, Subset, int], ...] = ()
    violation: str = ""
    pair: tuple = ()


def check_smooth_overlap(subsets: Sequence, smooth_flags: Sequence[bool]) -> OverlapReport:
    """Sufficient conditions for subset ascent to converge.

    (a) intersecting subsets share a vertex with a smooth conjugate;
    (b) every pair of vertices is joined by a chain of subsets whose
        consecutive members share such a vertex.
    """
    n = len(smooth_flags)
    smooth = {i for i, s in enumerate(smooth_flags) if s}
    subs = [_key(S) for S in subsets]
    for a, b in itertools.combinations(subs, 2):
        common = set(a) & set(b)
        if common and not common & smooth:
            return OverlapReport(False, violation="intersection misses the smooth set", pair=(a, b))
    uf = _UnionFind(len(subs))
    chain = []
    for p, q in itertools.combinations(range(len(subs)), 2):
        shared = sorted(set(subs[p]) & set(subs[q]) & smooth)
        if shared and uf.union(p, q):
            chain.append((subs[p], subs[q], shared[0]))
    comp_of_vertex: dict[int, set[int]] = {}
    for k, S in enumerate(subs):
        for i in S:
            comp_of_vertex.setdefault(i, set()).add(uf.find(k))
    for i in range(n):
        if i not in comp_of_vertex:
            return OverlapReport(False, violation="vertex in no subset", pair=(i,))
    # vertices i, j are linked iff some subsets containing them share a component
    vuf = _UnionFind(n + len(subs))
    for i, comps in comp_of_vertex.items():
        for c in comps:
            vuf.union(i, n + c)
    for j in range(1, n):
        if vuf.find(0) != vuf.find(j):
            return OverlapReport(False, violation="vertices not linked by a chain", pair=(0, j))
    return OverlapReport(True, chain=tuple(chain))


# -- lifting ----------------------------------------------------------------------

def lifted_functions(funcs: Sequence[ConvexFunction], x0) -> list[ConvexFunction]:
    """Functions on the doubled vertex set, vertex ``(i, s)`` numbered ``i + s n``."""
    x0 = np.asarray(x0, dtype=float).reshape(len(funcs), -1)
    return [Quadratic(1.0, c) for c in x0] + list(funcs)


def lift_to_dykstra(y0, y1) -> tuple[np.ndarray, np.ndarray]:
    """Allocation duals ``(y_{i,0}, y_{i,1})`` to node duals z (compact) and z_e in D-perp."""
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    return y1.copy(), -y0 - y1


def lift_from_dykstra(z, z_e) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`lift_to_dykstra`: returns ``(y0, y1)``."""
    z = np.asarray(z, dtype=float)
    z_e = np.asarray(z_e, dtype=float)
    return -z_e - z, z.copy()


def lifted_allocation_objective(funcs, x0, y0, y1) -> float:
    """-sum f_i^*(y_{i,1}) - sum [1/2 |y_{i,0} + x0_i|^2 - 1/2 |x0_i|^2]."""
    x0 = np.asarray(x0, dtype=float).reshape(len(funcs), -1)
    y0 = np.asarray(y0, dtype=float)
    val = -allocation_objective(funcs, y1)
    return val - 0.5 * float(np.sum((y0 + x0) ** 2)) + 0.5 * float(np.sum(x0 ** 2))


def lifted_dykstra_objective(funcs, x0, z, z_e) -> float:
    """-sum f_i^*(z_i) - 1/2 |sum z_i + z_e - x0|^2 + 1/2 |x0|^2, z compact."""
    x0 = np.asarray(x0, dtype=float).reshape(len(funcs), -1)
    r = np.asarray(z) + np.asarray(z_e) - x0
    return -allocation_objective(funcs, z) - 0.5 * float(np.sum(r * r)) + 0.5 * float(np.sum(x0 ** 2))


# -- driver ---------------------------------------------------------------------

def _disagreement(xs: Sequence[np.ndarray]) -> float:
    if not xs:
        return 0.0
    arr = np.array(xs)
    return 0.5 * float(np.sum((arr - arr.mean(axis=0)) ** 2))


def run_allocation(state: AllocationState, subsets: Sequence | Callable[[int], Sequence],
                   max_steps: int = 10_000, tol: float = 1e-12, window: int | None = None,
                   y_bound: float = 1e12) -> tuple[AllocationState, Trace]:
    """Subset ascent until a full window of steps changes nothing.

    ``subsets`` is a list cycled in order or a callable ``n -> subset``. Each
    trace row stores ``F = -G(y)`` and, as ``gap_lb``, the spread of the
    latest subset x values over the window. The run stops as ``converged``
    when the spread is within ``tol``, or as ``stuck`` when y stopped moving
    while the spread stays large.
    """
    if callable(subsets):
        pick, window = subsets, window or state.n
    else:
        subs = [_key(S) for S in subsets]
        if not subs:
            raise ValueError("empty subset schedule")
        pick, window = (lambda n: subs[(n - 1) % len(subs)]), window or len(subs)
    trace = Trace()
    t0 = time.perf_counter_ns()
    g_hist = [allocation_objective(state.funcs, state.y)]
    recent: list[Subset] = []
    last_move = 0
    for n in range(1, max_steps + 1):
        S = _key(pick(n))
        prev = state.y
        state = ascend_subset(state, S)
        if np.any(state.y != prev):
            last_move = n
        if float(np.max(np.abs(state.y))) > y_bound:
            raise UnboundedDual(f"|y| exceeded {y_bound:g} at step {n}")
        g = allocation_objective(state.funcs, state.y)
        if g > g_hist[-1] + 1e-12 * (1.0 + abs(g_hist[-1])):
            raise AssertionError("G increased")
        g_hist.append(g)
        recent = (recent + [S])[-window:]
        spread = _disagreement([state.subset_x[k] for k in dict.fromkeys(recent)])
        trace.append(TraceRow(n, -g, spread, math.nan,
                              float(np.sum(np.linalg.norm(state.y, axis=1))) / math.sqrt(n),
                              time.perf_counter_ns() - t0))
        if n >= window:
            flat = abs(g_hist[-1] - g_hist[-1 - window]) <= tol * (1.0 + abs(g))
            if flat and spread <= tol:
                trace.status = "converged"
                break
            if n - last_move >= window and spread > tol:
                trace.status = "stuck"
                break
    else:
        trace.status = "max_steps"
    return state, trace
