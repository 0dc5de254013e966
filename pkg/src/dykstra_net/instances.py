"""Problem instances used by tests, scripts and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .funcs import (ConvexFunction, IndicatorBall, IndicatorBox, IndicatorPoint, L1,
                    Quadratic, Zero)
from .graph import Graph, path_graph, random_connected_graph


@dataclass(frozen=True)
class Instance:
    graph: Graph
    funcs: tuple[ConvexFunction, ...]
    x0: np.ndarray

    @property
    def dim(self) -> int:
        return self.x0.shape[1]


def random_instance(rng: np.random.Generator, n_max: int = 10, d_max: int = 3,
                    kinds: tuple[str, ...] = ("quadratic", "box", "point", "l1")) -> Instance:
    """Connected graph with mixed node functions and a common feasible point.

    Boxes are drawn around a shared anchor ``q`` and point indicators sit at
    ``q``, so the domains always intersect.
    """
    n = int(rng.integers(2, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    graph = random_connected_graph(n, rng)
    q = rng.normal(size=d)
    funcs: list[ConvexFunction] = []
    n_points = 0
    for _ in range(n):
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind == "point" and n_points:
            kind = "quadratic"
        if kind == "quadratic":
            funcs.append(Quadratic(float(rng.uniform(0.2, 3.0)), rng.normal(scale=2.0, size=d)))
        elif kind == "box":
            lo = q - rng.uniform(0.0, 1.5, size=d)
            hi = q + rng.uniform(0.0, 1.5, size=d)
            lo[rng.random(d) < 0.2] = -np.inf
            funcs.append(IndicatorBox(lo, hi))
        elif kind == "point":
            n_points += 1
            funcs.append(IndicatorPoint(q.copy()))
        elif kind == "l1":
            funcs.append(L1(float(rng.uniform(0.05, 1.0)), d))
        elif kind == "zero":
            funcs.append(Zero(d))
        else:
            raise ValueError(f"unknown kind {kind!r}")
    x0 = rng.normal(scale=3.0, size=(n, d))
    return Instance(graph, tuple(funcs), x0)


def random_quadratic_allocation(rng: np.random.Generator, n_max: int = 8,
                                d_max: int = 3) -> tuple[tuple[Quadratic, ...], list[tuple[int, ...]]]:
    """All-quadratic nodes and a chain of overlapping subsets covering them."""
    n = int(rng.integers(3, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    funcs = tuple(Quadratic(float(rng.uniform(0.3, 3.0)), rng.normal(scale=2.0, size=d))
                  for _ in range(n))
    order = [int(i) for i in rng.permutation(n)]
    subsets, start = [], 0
    while start < n - 1:
        size = int(rng.integers(2, 4))
        subsets.append(tuple(sorted(order[start:start + size])))
        start += size - 1
    return funcs, subsets


def three_node_stall() -> tuple[ConvexFunction, ...]:
    """1/2 (x+1)^2, 0, 1/2 (x-1)^2 on a path of three vertices."""
    return (Quadratic(1.0, -1.0), Zero(1), Quadratic(1.0, 1.0))


def touching_disks() -> Instance:
    """Two unit disks meeting only at the origin; x0 pulls both nodes above it."""
    funcs = (IndicatorBall([-1.0, 0.0], 1.0), IndicatorBall([1.0, 0.0], 1.0))
    return Instance(path_graph(2), funcs, np.array([[0.0, 1.0], [0.0, 1.0]]))
