"""Cycle generators: edge subsets E_n and ordered block sequences.

A block holds at most one vertex (its function is minimized) and an acyclic,
connected set of edges (its endpoints are averaged). A cycle is valid when
its edges connect V, every vertex appears as some block's vertex, and E_n is
exactly the union of the block edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .graph import (Edge, Graph, GraphError, TreePlan, _UnionFind, canonical,
                    is_forest, spanning_tree)


@lru_cache(maxsize=4096)
def _plan(edges: tuple[Edge, ...]) -> TreePlan:
    return TreePlan(edges)


@dataclass(frozen=True)
class Block:
    vertex: int | None = None
    edges: tuple[Edge, ...] = ()
    support: tuple[int, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        edges = tuple(sorted(canonical(e) for e in self.edges))
        object.__setattr__(self, "edges", edges)
        if self.vertex is None and not edges:
            raise ValueError("a block must contain a vertex or an edge")
        # V' for edge blocks, (vertex,) for a lone vertex
        sup = tuple(sorted({v for e in edges for v in e})) if edges else (self.vertex,)
        object.__setattr__(self, "support", sup)

    @cached_property
    def plan(self) -> TreePlan | None:
        return _plan(self.edges) if self.edges else None

    def problems(self) -> list[str]:
        out = []
        if len(self.edges) == 1:
            if self.vertex is not None and self.vertex not in self.edges[0]:
                out.append(f"block vertex {self.vertex} is not an endpoint of its edges")
        elif self.edges:
            verts = self.support
            if len(self.edges) != len(verts) - 1 or not is_forest(self.edges, max(verts) + 1):
                out.append(f"block edges {list(self.edges)} are not a tree on their endpoints")
            if self.vertex is not None and self.vertex not in verts:
                out.append(f"block vertex {self.vertex} is not an endpoint of its edges")
        return out


def vertex_block(i: int) -> Block:
    return Block(vertex=i)


def edge_block(*edges: Edge, vertex: int | None = None) -> Block:
    return Block(vertex=vertex, edges=tuple(edges))


@dataclass(frozen=True)
class CycleSchedule:
    n: int
    e_n: tuple[Edge, ...]
    tree: tuple[Edge, ...]
    blocks: tuple[Block, ...] = field(default=())

    @property
    def w_bar(self) -> int:
        return len(self.blocks)


def _spans(n: int, edges) -> bool:
    uf = _UnionFind(n)
    parts = n
    for i, j in edges:
        parts -= uf.union(i, j)
    return parts == 1


def validate(schedule: CycleSchedule, graph: Graph) -> list[str]:
    """Named violations of the cycle invariants; empty when valid."""
    out: list[str] = []
    e_n = set(schedule.e_n)
    for e in e_n - graph._edge_set:
        out.append(f"edge {e} is not in the graph")
    if out:
        return out
    if not _spans(graph.n_vertices, e_n):
        out.append("E_n does not connect V")
    tree = set(schedule.tree)
    if not tree <= e_n:
        out.append("tree is not contained in E_n")
    elif len(tree) != graph.n_vertices - 1 or not _spans(graph.n_vertices, tree):
        out.append("tree does not span V")
    used: set[Edge] = set()
    covered: set[int] = set()
    for w, block in enumerate(schedule.blocks):
        for msg in block.problems():
            out.append(f"block {w}: {msg}")
        for e in block.edges:
            if e not in e_n:
                out.append(f"block {w}: edge {e} is not in E_n")
        if block.vertex is not None:
            if not 0 <= block.vertex < graph.n_vertices:
                out.append(f"block {w}: vertex {block.vertex} out of range")
            covered.add(block.vertex)
        used.update(block.edges)
    for i in range(graph.n_vertices):
        if i not in covered:
            out.append(f"vertex {i} uncovered")
    if used != e_n:
        out.append("E_n is not the union of the block edges")
    return out


def _rng(seed: int, n: int) -> np.random.Generator:
    return np.random.default_rng([seed, n])


def tree_cycle(graph: Graph, seed: int, n: int) -> CycleSchedule:
    """Random spanning tree as E_n; edge blocks, then vertex+edge blocks."""
    tree = tuple(spanning_tree(graph, graph.edges, _rng(seed, n)))
    blocks = [Block(edges=(e,)) for e in tree]
    for i in range(graph.n_vertices):
        incident = [e for e in tree if i in e]
        if incident:
            blocks.append(Block(vertex=i, edges=(incident[0],)))
        else:
            blocks.append(Block(vertex=i))
    return CycleSchedule(n, tree, tree, tuple(blocks))


def full_cycle(graph: Graph, n: int, seed: int = 0) -> CycleSchedule:
    """E_n = E; every edge as a block, then every vertex on its own."""
    tree = tuple(spanning_tree(graph, graph.edges, _rng(seed, n)))
    blocks = [Block(edges=(e,)) for e in graph.edges]
    blocks += [Block(vertex=i) for i in range(graph.n_vertices)]
    return CycleSchedule(n, graph.edges, tree, tuple(blocks))


def star_cycle(graph: Graph, hub_order: Sequence[int] = (), n: int = 1) -> CycleSchedule:
    """Stars grown from hubs in ``hub_order`` (then remaining vertices).

    Each star joins its hub to neighbours not yet reached; the stars together
    form a spanning tree. Vertices that never act as a hub get a lone vertex
    block at the end.
    """
    nv = graph.n_vertices
    order = list(dict.fromkeys(list(hub_order) + list(range(nv))))
    covered: set[int] = set()
    blocks: list[Block] = []
    hubs: set[int] = set()
    pending = order
    while len(covered) < nv:
        progress = False
        rest = []
        for h in pending:
            if covered and h not in covered:
                rest.append(h)
                continue
            covered.add(h)
            new = [k for k in graph.adjacency[h] if k not in covered]
            if new:
                blocks.append(Block(vertex=h, edges=tuple((h, k) for k in new)))
                covered.update(new)
                hubs.add(h)
            progress = True
        if not progress:
            raise GraphError("graph is not connected")
        pending = rest
    blocks += [Block(vertex=i) for i in range(nv) if i not in hubs]
    e_n = tuple(sorted(e for b in blocks for e in b.edges))
    return CycleSchedule(n, e_n, e_n, tuple(blocks))


def batch_disjoint(schedule: CycleSchedule | Iterable[Block]) -> list[list[Block]]:
    """Group blocks into batches whose supports are pairwise disjoint.

    Each block goes into the earliest batch after the last batch holding a
    conflicting block, so conflicting blocks keep their relative order.
    """
    blocks = schedule.blocks if isinstance(schedule, CycleSchedule) else list(schedule)
    batches: list[list[Block]] = []
    used: list[set[int]] = []
    for b in blocks:
        sup = set(b.support)
        last = -1
        for k, u in enumerate(used):
            if u & sup:
                last = k
        target = last + 1
        if target == len(batches):
            batches.append([])
            used.append(set())
        batches[target].append(b)
        used[target] |= sup
    return batches


def make_source(kind: str, graph: Graph, seed: int = 0, hub_order: Sequence[int] = ()):
    """Callable ``n -> CycleSchedule`` for the CLI's ``--schedule`` flag."""
    if kind == "tree":
        return lambda n: tree_cycle(graph, seed, n)
    if kind == "full":
        return lambda n: full_cycle(graph, n, seed)
    if kind == "star":
        return lambda n: star_cycle(graph, hub_order, n)
    raise ValueError(f"unknown schedule {kind!r}")
