"""Accelerated proximal gradient on the Dykstra dual.

Dual variables are one vector per vertex (``f_i^*`` block) and one per edge
(antisymmetric pair, ``+w`` at the smaller endpoint). The smooth part
``1/2 |x0 - S(u)|^2 - 1/2 |x0|^2`` with ``S(u) = sum_alpha u_alpha`` has a
gradient that is Lipschitz with constant ``max degree + 1`` in the norm that
counts an edge dual as ``2 |w|^2``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .dykstra import DykstraState, _apply, _block_update, as_blocks
from .funcs import INF, ConvexFunction
from .graph import Graph, max_degree
from .schedules import Block, tree_cycle
from .trace import Trace, TraceRow


@dataclass(frozen=True)
class DualPoint:
    """Sparse dual collection: ``vert`` is ``(n, d)``, ``edge`` is ``(m, d)`` over ``graph.edges``."""

    vert: np.ndarray
    edge: np.ndarray

    def __add__(self, other: "DualPoint") -> "DualPoint":
        return DualPoint(self.vert + other.vert, self.edge + other.edge)

    def __sub__(self, other: "DualPoint") -> "DualPoint":
        return DualPoint(self.vert - other.vert, self.edge - other.edge)

    def __rmul__(self, a: float) -> "DualPoint":
        return DualPoint(a * self.vert, a * self.edge)

    def sq_norm(self) -> float:
        """sum_alpha |u_alpha|^2 with each edge dual counted at both endpoints."""
        return float(np.sum(self.vert ** 2)) + 2.0 * float(np.sum(self.edge ** 2))


def zeros(graph: Graph, dim: int) -> DualPoint:
    return DualPoint(np.zeros((graph.n_vertices, dim)), np.zeros((graph.n_edges, dim)))


def aggregate(graph: Graph, u: DualPoint) -> np.ndarray:
    """S(u) = sum of all duals as a block vector."""
    out = u.vert.copy()
    if graph.n_edges:
        idx = np.asarray(graph.edges)
        np.add.at(out, idx[:, 0], u.edge)
        np.subtract.at(out, idx[:, 1], u.edge)
    return out


def conj_sum(funcs: Sequence[ConvexFunction], vert: np.ndarray) -> float:
    total = 0.0
    for f, z in zip(funcs, vert):
        c = f.conjugate(z)
        if c == INF:
            return INF
        total += c
    return total


def dual_value(graph: Graph, funcs, x0, u: DualPoint) -> float:
    """F(u); edge terms vanish because edge duals lie in their H-perp."""
    s = aggregate(graph, u)
    c = conj_sum(funcs, u.vert)
    if c == INF:
        return -INF
    return float(np.sum(x0 * s)) - 0.5 * float(np.sum(s * s)) - c


def linearization(graph: Graph, funcs, x0, u: DualPoint, v: DualPoint) -> float:
    """l(u, v): smooth part linearized at v plus the conjugate terms at u."""
    x0 = np.asarray(x0, dtype=float)
    sv = aggregate(graph, v)
    su = aggregate(graph, u)
    c = conj_sum(funcs, u.vert)
    if c == INF:
        return INF
    r = x0 - sv
    return (0.5 * float(np.sum(r * r)) - 0.5 * float(np.sum(x0 * x0))
            - float(np.sum(r * (su - sv))) + c)


def lipschitz_bound(graph: Graph) -> float:
    return float(max_degree(graph) + 1)


def next_theta(theta: float) -> float:
    """Largest root of (1 - t) / t^2 = 1 / theta^2."""
    return 0.5 * theta * (math.sqrt(theta * theta + 4.0) - theta)


def theta_sequence(k: int, theta0: float = 1.0) -> list[float]:
    out = [theta0]
    for _ in range(k):
        out.append(next_theta(out[-1]))
    return out


@dataclass(frozen=True)
class ApgState:
    graph: Graph
    funcs: tuple[ConvexFunction, ...]
    x0: np.ndarray
    u: DualPoint
    w: DualPoint
    theta: float = 1.0
    k: int = 0
    L: float = 0.0
    greedy_accepted: int = 0


def init_apg(graph: Graph, funcs: Sequence[ConvexFunction], x0, theta0: float = 1.0,
             L: float | None = None) -> ApgState:
    """u^0 = w^0 with vertex blocks projected into dom f_i^* (prox of f_i^* at 0)."""
    if not 0 < theta0 <= 1:
        raise ValueError("theta0 must lie in (0, 1]")
    x0 = as_blocks(x0, graph.n_vertices)
    funcs = tuple(funcs)
    u = zeros(graph, x0.shape[1])
    vert = np.array([f.conj_prox(1.0, np.zeros(f.dim)) for f in funcs])
    u = DualPoint(vert, u.edge)
    return ApgState(graph, funcs, x0, u, u, theta0, 0, L or lipschitz_bound(graph))


def prox_step(state: ApgState, v: DualPoint, center: DualPoint, c: float) -> DualPoint:
    """argmin_u l(u; v) + c/2 |u - center|^2, block by block."""
    g = aggregate(state.graph, v) - state.x0
    vert = np.array([f.conj_prox(1.0 / c, center.vert[i] - g[i] / c)
                     for i, f in enumerate(state.funcs)])
    if state.graph.n_edges:
        idx = np.asarray(state.graph.edges)
        edge = center.edge - (g[idx[:, 0]] - g[idx[:, 1]]) / (2.0 * c)
    else:
        edge = center.edge.copy()
    return DualPoint(vert, edge)


def _to_dykstra(state: ApgState, u: DualPoint) -> DykstraState:
    duals = {e: u.edge[k].copy() for k, e in enumerate(state.graph.edges)}
    x = state.x0 - aggregate(state.graph, u)
    return DykstraState(state.graph, state.funcs, state.x0, x, u.vert.copy(), duals)


def greedy_blocks(state: ApgState, kind: str = "edges", seed: int = 0) -> list[Block]:
    """Dykstra blocks for the greedy step.

    ``"edges"``: every edge as a single-edge block. ``"cycle"``: the blocks
    of a random-tree cycle, vertex blocks included.
    """
    if kind == "edges":
        return [Block(edges=(e,)) for e in state.graph.edges]
    if kind == "cycle":
        return list(tree_cycle(state.graph, seed, state.k + 1).blocks)
    raise ValueError(f"unknown greedy block set {kind!r}")


def greedy_pass(state: ApgState, u: DualPoint, blocks: Sequence[Block] | None = None) -> DualPoint:
    """Exact Dykstra block maximizations applied in order starting from ``u``."""
    ds = _to_dykstra(state, u)
    for b in (greedy_blocks(state) if blocks is None else blocks):
        _apply(ds, _block_update(ds, b))
    edge = np.array([ds.edge_duals[e] for e in state.graph.edges]).reshape(u.edge.shape)
    return DualPoint(ds.z.copy(), edge)


def apg_iterate(state: ApgState, greedy: bool = False, greedy_kind: str = "edges",
                seed: int = 0) -> ApgState:
    th, L = state.theta, state.L
    v = (1.0 - th) * state.u + th * state.w
    w = prox_step(state, v, state.w, th * L)
    u_hat = (1.0 - th) * state.u + th * w
    u_next, accepted = u_hat, state.greedy_accepted
    if greedy:
        cand = greedy_pass(state, u_hat, greedy_blocks(state, greedy_kind, seed))
        bound = (linearization(state.graph, state.funcs, state.x0, u_hat, v)
                 + 0.5 * L * (u_hat - v).sq_norm())
        if -dual_value(state.graph, state.funcs, state.x0, cand) <= bound + 1e-12 * (1.0 + abs(bound)):
            u_next, accepted = cand, accepted + 1
    return replace(state, u=u_next, w=w, theta=next_theta(th), k=state.k + 1,
                   greedy_accepted=accepted)


def primal_estimate(state: ApgState) -> np.ndarray:
    return state.x0 - aggregate(state.graph, state.u)


def run_apg(state: ApgState, max_iter: int = 10_000, gap_tol: float = 1e-12,
            greedy: bool = False, reference=None, f_star: float | None = None,
            eps: float | None = None, greedy_kind: str = "edges",
            seed: int = 0) -> tuple[ApgState, Trace]:
    """Iterate until the primal estimate is near consensus and F stops moving.

    Trace rows store the running maximum of F (the running minimum of -F).
    With ``f_star`` and ``eps`` the run stops once that maximum is within
    ``eps`` of ``f_star``.
    """
    ref = None if reference is None else as_blocks(reference, state.graph.n_vertices)
    trace = Trace()
    t0 = time.perf_counter_ns()
    best = dual_value(state.graph, state.funcs, state.x0, state.u)
    prev = best
    n = state.graph.n_vertices
    for _ in range(max_iter):
        state = apg_iterate(state, greedy, greedy_kind, seed)
        f = dual_value(state.graph, state.funcs, state.x0, state.u)
        best = max(best, f)
        x = primal_estimate(state)
        lb = 0.5 * float(np.sum((x - x.mean(axis=0)) ** 2))
        dist = math.nan if ref is None else float(np.linalg.norm(x - ref))
        norms = float(np.sum(np.linalg.norm(state.u.vert, axis=1)))
        norms += math.sqrt(2.0) * float(np.sum(np.linalg.norm(state.u.edge, axis=1)))
        trace.append(TraceRow(state.k, best, lb, dist, norms / math.sqrt(state.k),
                              time.perf_counter_ns() - t0))
        if f_star is not None and eps is not None:
            if best >= f_star - eps:
                trace.status = "converged"
                break
        elif lb <= gap_tol and abs(f - prev) <= gap_tol * (1.0 + abs(f)):
            trace.status = "converged"
            break
        prev = f
    else:
        trace.status = "max_iter"
    return state, trace


def dykstra_as_dual_point(graph: Graph, ds: DykstraState) -> DualPoint:
    """Embed a Dykstra state's duals in the sparse APG layout."""
    edge = np.zeros((graph.n_edges, ds.dim))
    pos = {e: k for k, e in enumerate(graph.edges)}
    for e, w in ds.edge_duals.items():
        edge[pos[e]] = w
    return DualPoint(ds.z.copy(), edge)


def apg_iteration_bound(L: float, eps: float, u_star: DualPoint, u0: DualPoint) -> float:
    """sqrt(4 L / eps) |u* - u0| + 2."""
    return math.sqrt(4.0 * L / eps) * math.sqrt((u_star - u0).sq_norm()) + 2.0


def iterations_to(trace: Trace, target: float) -> int | None:
    """First iteration whose F column reaches ``target``."""
    for r in trace.rows:
        if r.F >= target:
            return r.iter
    return None
