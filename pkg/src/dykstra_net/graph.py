"""Undirected graphs, spanning trees and the D / D-perp machinery.

Block vectors (elements of X^|V|) are plain ``(n_vertices, d)`` float arrays.
An edge dual on ``(i, j)`` with ``i < j`` is stored as a single d-vector ``w``
and means ``+w`` at ``i``, ``-w`` at ``j`` and zero elsewhere.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .tolerances import DEFAULT

Edge = tuple[int, int]


class GraphError(ValueError):
    """Invalid graph or edge arguments."""


class NotConnectedError(GraphError):
    """An edge subset does not connect the vertex set."""


class DiagOrthError(ValueError):
    """A block vector does not lie in the orthogonal complement of D."""


def canonical(edge: Sequence[int]) -> Edge:
    i, j = int(edge[0]), int(edge[1])
    if i == j:
        raise GraphError(f"self-loop at vertex {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[Edge, ...]
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_vertices < 1:
            raise GraphError("a graph needs at least one vertex")
        edges = tuple(canonical(e) for e in self.edges)
        if len(set(edges)) != len(edges):
            raise GraphError("duplicate edges")
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, j in edges:
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise GraphError(f"edge {(i, j)} out of range")
            adj[i].append(j)
            adj[j].append(i)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in adj))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def has_edge(self, edge: Sequence[int]) -> bool:
        return canonical(edge) in self._edge_set

    @property
    def _edge_set(self) -> frozenset[Edge]:
        cached = self.__dict__.get("_edge_set_cache")
        if cached is None:
            cached = frozenset(self.edges)
            object.__setattr__(self, "_edge_set_cache", cached)
        return cached

    def incident(self, i: int, edges: Iterable[Edge] | None = None) -> list[Edge]:
        pool = self.edges if edges is None else edges
        return [e for e in pool if i in e]


# -- named graphs ---------------------------------------------------------

def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def star_graph(leaves: int) -> Graph:
    """Star K_{1,leaves} with centre 0."""
    return Graph(leaves + 1, tuple((0, k) for k in range(1, leaves + 1)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def random_connected_graph(n: int, rng: np.random.Generator, p: float = 0.4) -> Graph:
    """Random spanning tree plus independent extra edges with probability ``p``."""
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        parent = order[rng.integers(0, k)]
        edges.add(canonical((order[k], parent)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < p:
                edges.add((i, j))
    return Graph(n, tuple(sorted(edges)))


# -- connectivity and trees -----------------------------------------------

def _check_subset(graph: Graph, edge_subset: Iterable[Sequence[int]]) -> list[Edge]:
    out = []
    for e in edge_subset:
        ce = canonical(e)
        if not graph.has_edge(ce):
            raise GraphError(f"edge {ce} is not in the graph")
        out.append(ce)
    return out


def is_connected(graph: Graph, edge_subset: Iterable[Sequence[int]] | None = None) -> bool:
    """True iff ``(V, edge_subset)`` is connected, i.e. the subset connects V."""
    edges = graph.edges if edge_subset is None else _check_subset(graph, edge_subset)
    n = graph.n_vertices
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == n


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def spanning_tree(graph: Graph, edge_subset: Iterable[Sequence[int]] | None = None,
                  seed: int | np.random.Generator | None = 0) -> list[Edge]:
    """Spanning tree of ``(V, edge_subset)`` via Kruskal on seeded random weights."""
    edges = list(graph.edges) if edge_subset is None else _check_subset(graph, edge_subset)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    weights = rng.random(len(edges))
    uf = _UnionFind(graph.n_vertices)
    tree = []
    for k in np.argsort(weights, kind="stable"):
        i, j = edges[k]
        if uf.union(i, j):
            tree.append((i, j))
    if len(tree) != graph.n_vertices - 1:
        raise NotConnectedError("edge subset does not connect V")
    return sorted(tree)


def is_forest(edges: Iterable[Edge], n_vertices: int) -> bool:
    uf = _UnionFind(n_vertices)
    return all(uf.union(i, j) for i, j in edges)


def max_degree(graph: Graph) -> int:
    return max(graph.degree(i) for i in range(graph.n_vertices))


def lift_graph(graph: Graph) -> Graph:
    """Graph on V x {0, 1}: copy (i, 0) keeps the original edges, (i, 1) hangs off (i, 0).

    Vertex ``(i, s)`` is numbered ``i + s * n``.
    """
    n = graph.n_vertices
    edges = list(graph.edges) + [(i, i + n) for i in range(n)]
    return Graph(2 * n, tuple(edges))


# -- D-perp ----------------------------------------------------------------

def in_diag_orth(v: np.ndarray, tol: float = DEFAULT.diag_orth) -> bool:
    v = np.asarray(v, dtype=float)
    return float(np.linalg.norm(v.sum(axis=0))) <= tol * (1.0 + float(np.linalg.norm(v)))


def consensus_projection(x: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto D: every block replaced by the block mean."""
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(x.mean(axis=0), x.shape).copy()


@dataclass(frozen=True)
class EdgeDual:
    edge: Edge
    w: np.ndarray

    def expand(self, n_vertices: int) -> np.ndarray:
        i, j = self.edge
        out = np.zeros((n_vertices, len(self.w)))
        out[i] = self.w
        out[j] = -self.w
        return out


def expand_edge_duals(duals: dict[Edge, np.ndarray], n_vertices: int, dim: int) -> np.ndarray:
    """Sum of the expanded edge duals, i.e. v_H."""
    out = np.zeros((n_vertices, dim))
    # fixed order keeps the result independent of dict insertion order
    for (i, j) in sorted(duals):
        w = duals[(i, j)]
        out[i] += w
        out[j] -= w
    return out


class TreePlan:
    """Leaf-elimination order for decomposing a D-perp vector over a tree.

    The tree may span only part of the vertex set; it must be connected on
    the vertices it touches.
    """

    def __init__(self, tree: Sequence[Edge]):
        tree = [canonical(e) for e in tree]
        if not tree:
            raise GraphError("empty tree")
        verts = sorted({v for e in tree for v in e})
        adj: dict[int, list[tuple[int, Edge]]] = {v: [] for v in verts}
        for e in tree:
            adj[e[0]].append((e[1], e))
            adj[e[1]].append((e[0], e))
        root = verts[0]
        parent_edge: dict[int, Edge] = {}
        order = [root]
        seen = {root}
        k = 0
        while k < len(order):
            u = order[k]
            k += 1
            for v, e in adj[u]:
                if v not in seen:
                    seen.add(v)
                    parent_edge[v] = e
                    order.append(v)
        if len(seen) != len(verts) or len(tree) != len(verts) - 1:
            raise GraphError("edges do not form a tree on their endpoints")
        self.vertices = tuple(verts)
        self.root = root
        # children before parents
        self.steps = [(v, parent_edge[v]) for v in reversed(order[1:])]

    def decompose(self, v: np.ndarray) -> dict[Edge, np.ndarray]:
        """Unique edge duals on the tree whose expansion equals ``v``.

        ``v`` must vanish off the tree's vertices and sum to zero.
        """
        acc = {u: np.array(v[u], dtype=float) for u in self.vertices}
        out: dict[Edge, np.ndarray] = {}
        for child, e in self.steps:
            flow = acc[child]
            i, j = e
            other = i if child == j else j
            # edge contributes +w at the smaller index, -w at the larger
            out[e] = flow.copy() if child == i else -flow
            acc[other] = acc[other] + flow
        return out


def decompose_diag_orth(v: np.ndarray, tree: Sequence[Edge],
                        tol: float = DEFAULT.diag_orth) -> dict[Edge, np.ndarray]:
    """Write ``v`` in D-perp as a sum of edge duals supported on ``tree``."""
    v = np.asarray(v, dtype=float)
    resid = float(np.linalg.norm(v.sum(axis=0)))
    if resid > tol * (1.0 + float(np.linalg.norm(v))):
        raise DiagOrthError(f"vector is not in D-perp: ||sum of blocks|| = {resid:.3e}")
    plan = TreePlan(tree)
    off = [k for k in range(v.shape[0]) if k not in set(plan.vertices)]
    if off and np.any(v[off] != 0):
        raise DiagOrthError("vector has mass off the tree's vertices")
    return plan.decompose(v)
