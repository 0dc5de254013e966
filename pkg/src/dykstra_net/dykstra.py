"""Distributed Dykstra splitting as block dual-coordinate ascent.

The primal problem is

    min_x  1/2 |x - x0|^2 + sum_{(i,j)} delta_{x_i = x_j}(x) + sum_i f_i(x_i)

over block vectors ``x`` of shape ``(n, d)``. The state keeps one dual per
vertex (its only nonzero block, ``z[i]``) and one antisymmetric dual per edge;
the primal estimate is always ``x = x0 - v_H - z``.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .funcs import INF, ConvexFunction, Regularized
from .graph import (DiagOrthError, Edge, Graph, NotConnectedError, TreePlan,
                    canonical, decompose_diag_orth, expand_edge_duals, is_connected,
                    spanning_tree)
from .schedules import Block, CycleSchedule, batch_disjoint, validate
from .tolerances import DEFAULT
from .trace import Trace, TraceRow

log = logging.getLogger(__name__)


class InvalidCycle(ValueError):
    """A schedule source produced a cycle violating the convergence hypotheses."""


@dataclass
class DykstraState:
    graph: Graph
    funcs: tuple[ConvexFunction, ...]
    x0: np.ndarray
    x: np.ndarray
    z: np.ndarray
    edge_duals: dict[Edge, np.ndarray] = field(default_factory=dict)
    cycle: int = 0
    block: int = 0

    @property
    def n(self) -> int:
        return self.graph.n_vertices

    @property
    def dim(self) -> int:
        return self.x0.shape[1]

    @property
    def v_h(self) -> np.ndarray:
        return expand_edge_duals(self.edge_duals, self.n, self.dim)

    @property
    def v_a(self) -> np.ndarray:
        return self.v_h + self.z

    def copy(self) -> "DykstraState":
        return DykstraState(self.graph, self.funcs, self.x0, self.x.copy(), self.z.copy(),
                            {e: w.copy() for e, w in self.edge_duals.items()},
                            self.cycle, self.block)

    def identity_residual(self) -> float:
        """Relative violation of x = x0 - v_H - z."""
        r = self.x - (self.x0 - self.v_a)
        return float(np.linalg.norm(r)) / (1.0 + float(np.linalg.norm(self.x0)))

    def sum_dual_norms(self) -> float:
        total = float(np.sum(np.linalg.norm(self.z, axis=1)))
        total += sum(math.sqrt(2.0) * float(np.linalg.norm(w)) for w in self.edge_duals.values())
        return total


def as_blocks(x, n: int, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(n, -1)
    if arr.shape[0] != n or (dim is not None and arr.shape[1] != dim):
        raise ValueError(f"expected {n} blocks, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("block vector has non-finite entries")
    return arr


def init_state(graph: Graph, funcs: Sequence[ConvexFunction], x0, z_init=None,
               v_h: np.ndarray | dict | None = None, tree: Sequence[Edge] | None = None,
               ) -> DykstraState:
    """Starting state.

    ``z_init`` is either compact ``(n, d)`` (block ``i`` of ``z_i``) or full
    ``(n, n, d)``, in which case off-diagonal blocks must vanish. ``v_h`` is a
    dict of edge duals or a D-perp block vector, decomposed over ``tree``.
    """
    n = graph.n_vertices
    x0 = as_blocks(x0, n)
    dim = x0.shape[1]
    funcs = tuple(funcs)
    if len(funcs) != n or any(f.dim != dim for f in funcs):
        raise ValueError("need one function of matching dimension per vertex")
    if z_init is None:
        z = np.zeros((n, dim))
    else:
        zi = np.asarray(z_init, dtype=float)
        if zi.shape == (n, n, dim):
            off = zi.copy()
            off[np.arange(n), np.arange(n)] = 0.0
            if np.any(off != 0):
                raise ValueError("z_i must vanish off block i")
            z = zi[np.arange(n), np.arange(n)].copy()
        else:
            z = as_blocks(zi, n, dim).copy()
    if v_h is None:
        duals: dict[Edge, np.ndarray] = {}
    elif isinstance(v_h, dict):
        duals = {}
        for e, w in v_h.items():
            ce = canonical(e)
            if not graph.has_edge(ce):
                raise ValueError(f"edge {ce} is not in the graph")
            w = np.atleast_1d(np.asarray(w, dtype=float))
            duals[ce] = w if ce == tuple(e) else -w
    else:
        t = list(tree) if tree is not None else spanning_tree(graph)
        duals = decompose_diag_orth(as_blocks(v_h, n, dim), t)
    state = DykstraState(graph, funcs, x0, np.zeros((n, dim)), z, duals)
    state.x = x0 - state.v_a
    return state


# -- block solves ---------------------------------------------------------------

@dataclass
class _Update:
    support: tuple[int, ...]
    x_new: np.ndarray
    vertex: int | None
    z_new: np.ndarray | None
    edge_inc: dict[Edge, np.ndarray]
    # 1/2 |x_after - x_before|^2, a lower bound on the dual gain
    move: float = 0.0


def _block_update(state: DykstraState, block: Block) -> _Update:
    i = block.vertex
    x = state.x
    if not block.edges:
        y = x[i] + state.z[i]
        xn = state.funcs[i].prox(1.0, y)
        d = x[i] - xn
        return _Update((i,), xn, i, y - xn, {}, 0.5 * float(d @ d))
    sup = block.support
    k = len(sup)
    if k == 2:
        s = x[sup[0]] + x[sup[1]]
    else:
        s = x[list(sup)].sum(axis=0)
    if i is not None:
        s = s + state.z[i]
    ybar = s / k
    if i is not None:
        xn = state.funcs[i].prox(1.0 / k, ybar)
        zn = k * (ybar - xn)
    else:
        xn, zn = ybar, None
    if k == 2:
        d0, d1 = x[sup[0]] - xn, x[sup[1]] - xn
        move = 0.5 * float(d0 @ d0 + d1 @ d1)
        if i == sup[0]:
            d0 = d0 - (zn - state.z[i])
        elif i is not None:
            d1 = d1 - (zn - state.z[i])
        # +w at the smaller endpoint, which is sup[0]
        return _Update(sup, xn, i, zn, {block.edges[0]: d0}, move)
    dvh = x[list(sup)] - xn
    move = 0.5 * float(np.sum(dvh * dvh))
    if i is not None:
        dvh[sup.index(i)] -= zn - state.z[i]
    inc = block.plan.decompose({v: dvh[p] for p, v in enumerate(sup)})
    return _Update(sup, xn, i, zn, inc, move)


def _apply(state: DykstraState, up: _Update) -> None:
    for v in up.support:
        state.x[v] = up.x_new
    if up.z_new is not None:
        state.z[up.vertex] = up.z_new
    for e, w in up.edge_inc.items():
        old = state.edge_duals.get(e)
        state.edge_duals[e] = w if old is None else old + w


def _check_block(state: DykstraState, block: Block) -> None:
    for e in block.edges:
        if not state.graph.has_edge(e):
            raise ValueError(f"block references absent edge {e}")
    probs = block.problems()
    if probs:
        raise ValueError("; ".join(probs))


def solve_block(state: DykstraState, block: Block) -> DykstraState:
    """Maximize the dual over the variables of one block; returns a new state."""
    _check_block(state, block)
    out = state.copy()
    _apply(out, _block_update(out, block))
    out.block += 1
    return out


def solve_batch(state: DykstraState, blocks: Sequence[Block],
                executor: Executor | None = None) -> DykstraState:
    """Solve blocks with pairwise-disjoint supports concurrently."""
    return _solve_batch(state, blocks, executor)[0]


def _solve_batch(state, blocks, executor):
    seen: set[int] = set()
    for b in blocks:
        _check_block(state, b)
        if seen & set(b.support):
            raise ValueError("blocks in a batch must have disjoint supports")
        seen |= set(b.support)
    out = state.copy()
    if executor is None or len(blocks) < 2:
        ups = [_block_update(out, b) for b in blocks]
    else:
        ups = list(executor.map(lambda b: _block_update(out, b), blocks))
    for up in ups:
        _apply(out, up)
    out.block += len(blocks)
    return out, [up.move for up in ups]


def begin_cycle(state: DykstraState, e_n: Iterable[Edge], tree: Sequence[Edge],
                _checked: bool = False) -> DykstraState:
    """Move every edge dual onto ``tree`` while keeping v_H."""
    graph = state.graph
    tree = [canonical(e) for e in tree]
    if not _checked:
        e_n = [canonical(e) for e in e_n]
        if not is_connected(graph, e_n):
            raise NotConnectedError("E_n does not connect V")
        if (not set(tree) <= set(e_n) or len(tree) != graph.n_vertices - 1
                or not is_connected(graph, tree)):
            raise ValueError("tree must be a spanning tree inside E_n")
    out = state.copy()
    tset = set(tree)
    live = {e: w for e, w in out.edge_duals.items() if np.any(w != 0)}
    if set(live) <= tset:
        out.edge_duals = live
    elif graph.n_vertices > 1:
        out.edge_duals = TreePlan(tree).decompose(out.v_h)
    return out


# -- objectives -----------------------------------------------------------------

def dual_objective(state: DykstraState) -> float:
    """F = <x0, v_A> - |v_A|^2 / 2 - sum_i f_i^*(z_i); edge terms vanish on H-perp."""
    va = state.v_a
    val = float(np.sum(state.x0 * va)) - 0.5 * float(np.sum(va * va))
    for f, zi in zip(state.funcs, state.z):
        c = f.conjugate(zi)
        if c == INF:
            return -INF
        val -= c
    return val


def primal_objective(x0, funcs: Sequence[ConvexFunction], x, graph: Graph | None = None) -> float:
    """1/2 |x - x0|^2 + consensus indicator + sum_i f_i(x_i)."""
    x0 = np.asarray(x0, dtype=float)
    x = np.asarray(x, dtype=float)
    edges = graph.edges if graph is not None else [(0, k) for k in range(1, len(x))]
    scale = 1.0 + float(np.max(np.abs(x))) if x.size else 1.0
    for i, j in edges:
        if np.max(np.abs(x[i] - x[j])) > DEFAULT.domain * scale:
            return INF
    val = 0.5 * float(np.sum((x - x0) ** 2))
    for f, xi in zip(funcs, x):
        v = f.eval(xi)
        if v == INF:
            return INF
        val += v
    return val


def gap_lower_bound(state: DykstraState, x_feasible=None) -> float:
    """1/2 |x0 - x_feas - v_A|^2 = 1/2 |x - x_feas|^2; default x_feas is the block mean."""
    xf = np.broadcast_to(state.x.mean(axis=0), state.x.shape) if x_feasible is None else x_feasible
    d = state.x - xf
    return 0.5 * float(np.sum(d * d))


@dataclass(frozen=True)
class GapCertificate:
    gap: float
    lower_bound: float


def gap_certificate(state: DykstraState, x_feasible, tol: float = 1e-10) -> GapCertificate:
    xf = as_blocks(x_feasible, state.n, state.dim)
    p = primal_objective(state.x0, state.funcs, xf, state.graph)
    if p == INF:
        raise ValueError("x_feasible is not feasible")
    gap = p - dual_objective(state)
    lb = gap_lower_bound(state, xf)
    slack = tol * (1.0 + abs(p))
    if not gap >= lb - slack or not lb >= 0:
        raise AssertionError(f"duality gap {gap:.3e} below its lower bound {lb:.3e}")
    return GapCertificate(gap, lb)


# -- weighted consensus -----------------------------------------------------------

@dataclass(frozen=True)
class WeightedInstance:
    x0: np.ndarray
    funcs: tuple[ConvexFunction, ...]
    scale: float

    def map_back(self, x):
        return np.asarray(x, dtype=float).copy()


def transform_weighted(lambdas, x0, funcs: Sequence[ConvexFunction]) -> WeightedInstance:
    """Reduce ``1/2 sum_i lam_i |x_i - x0_i|^2 + ...`` to unit weights.

    Dividing by ``lam_min`` leaves weights ``r_i >= 1``; the excess
    ``(r_i - 1)/2 |x - x0_i|^2`` joins ``f_i / lam_min``. Minimizers coincide.
    """
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("weights must be positive")
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim == 1:
        x0 = x0.reshape(len(lam), -1)
    lmin = float(lam.min())
    out = []
    for f, r, c in zip(funcs, lam / lmin, x0):
        if lmin == 1.0 and r == 1.0:
            out.append(f)
        else:
            out.append(Regularized(f, 1.0 / lmin, float(r - 1.0), c))
    return WeightedInstance(x0.copy(), tuple(out), lmin)


# -- driver ---------------------------------------------------------------------------

BlockHook = Callable[[Block, float, float, np.ndarray], None]


def run(state: DykstraState, schedule_source: Callable[[int], CycleSchedule],
        max_cycles: int = 1000, gap_tol: float = 1e-12, reference=None,
        on_block: BlockHook | None = None, parallel: bool = False,
        executor: Executor | None = None) -> tuple[DykstraState, Trace]:
    """Run cycles until the gap bound and the per-cycle movement are <= gap_tol.

    Movement is the sum over the cycle's blocks of ``1/2 |Delta x|^2``; it
    bounds the dual gain from below and vanishes only when every block is
    already optimal. The gain itself drowns in rounding long before x
    settles, so it is not used for stopping.

    ``on_block(block, F_before, F_after, delta_v_A)`` is called after every
    block when given (costly: two dual evaluations per block).
    """
    ref = None if reference is None else as_blocks(reference, state.n, state.dim)
    trace = Trace()
    t0 = time.perf_counter_ns()
    own_pool = None
    if parallel and executor is None:
        own_pool = executor = ThreadPoolExecutor()
    try:
        for n in range(state.cycle + 1, state.cycle + max_cycles + 1):
            sched = schedule_source(n)
            probs = validate(sched, state.graph)
            if probs:
                raise InvalidCycle(f"cycle {n}: " + "; ".join(probs))
            state = begin_cycle(state, sched.e_n, sched.tree, _checked=True)
            state.cycle, state.block = n, 0
            move = 0.0
            if parallel:
                # sum movements in schedule order so the stop test matches the sequential run
                slots: dict[int, list[int]] = {}
                for pos, b in enumerate(sched.blocks):
                    slots.setdefault(id(b), []).append(pos)
                moves = [0.0] * len(sched.blocks)
                for batch in batch_disjoint(sched):
                    state, ms = _solve_batch(state, batch, executor)
                    for b, m in zip(batch, ms):
                        moves[slots[id(b)].pop(0)] = m
                for m in moves:
                    move += m
            else:
                for b in sched.blocks:
                    up = _block_update(state, b)
                    move += up.move
                    if on_block is None:
                        _apply(state, up)
                    else:
                        before = dual_objective(state)
                        x_before = state.x.copy()
                        _apply(state, up)
                        on_block(b, before, dual_objective(state), x_before - state.x)
                    state.block += 1
            f = dual_objective(state)
            lb = gap_lower_bound(state)
            dist = math.nan if ref is None else float(np.linalg.norm(state.x - ref))
            trace.append(TraceRow(n, f, lb, dist, state.sum_dual_norms() / math.sqrt(n),
                                  time.perf_counter_ns() - t0))
            if lb <= gap_tol and move <= gap_tol:
                trace.status = "converged"
                break
        else:
            trace.status = "max_cycles"
    finally:
        if own_pool is not None:
            own_pool.shutdown()
    log.debug("dykstra stopped after %d cycles: %s", len(trace), trace.status)
    return state, trace
