import numpy as np
from hypothesis import given, strategies as st

from dykstra_net.graph import complete_graph, path_graph, random_connected_graph, star_graph
from dykstra_net.schedules import (Block, CycleSchedule, batch_disjoint, full_cycle, star_cycle,
                                   tree_cycle, validate)


def test_tree_cycle_examples():
    s = tree_cycle(path_graph(3), 0, 1)
    assert s.w_bar == 5 and validate(s, path_graph(3)) == []
    k4 = complete_graph(4)
    trees = {tree_cycle(k4, 0, n).tree for n in range(1, 20)}
    assert len(trees) > 1
    assert all(validate(tree_cycle(k4, 0, n), k4) == [] for n in range(1, 20))
    s = tree_cycle(path_graph(2), 3, 1)
    assert sum(b.vertex is None for b in s.blocks) == 1
    assert sum(b.vertex is not None for b in s.blocks) == 2


def test_full_cycle_examples():
    s = full_cycle(complete_graph(3), 1)
    assert sum(not b.edges for b in s.blocks) == 3 and sum(bool(b.edges) for b in s.blocks) == 3
    assert full_cycle(path_graph(3), 1).w_bar == 5


def test_star_cycle_examples():
    s = star_cycle(star_graph(3), hub_order=[0])
    hub = [b for b in s.blocks if len(b.edges) == 3]
    assert len(hub) == 1 and hub[0].vertex == 0
    assert {b.vertex for b in s.blocks if not b.edges} == {1, 2, 3}
    s = star_cycle(path_graph(3), hub_order=[1])
    assert set(s.e_n) == {(0, 1), (1, 2)} and validate(s, path_graph(3)) == []
    s = star_cycle(complete_graph(3), hub_order=[0])
    assert set(s.e_n) == {(0, 1), (0, 2)} and validate(s, complete_graph(3)) == []


def test_validate_violations():
    g = path_graph(3)
    s = CycleSchedule(1, ((0, 1), (1, 2)), ((0, 1), (1, 2)),
                      (Block(edges=((0, 1),)), Block(edges=((1, 2),)), Block(vertex=0),
                       Block(vertex=1)))
    assert validate(s, g) == ["vertex 2 uncovered"]
    s = CycleSchedule(1, ((0, 1),), ((0, 1),),
                      (Block(vertex=0, edges=((0, 1),)), Block(vertex=1), Block(vertex=2)))
    assert "E_n does not connect V" in validate(s, g)


def test_batch_disjoint_examples():
    blocks = [Block(edges=((0, 1),)), Block(edges=((2, 3),)), Block(edges=((1, 2),))]
    b = batch_disjoint(blocks)
    assert b[0] == blocks[:2] and b[1] == [blocks[2]]
    star = [Block(edges=((0, k),)) for k in (1, 2, 3)]
    assert [len(x) for x in batch_disjoint(star)] == [1, 1, 1]
    three = [Block(edges=(e,)) for e in ((0, 1), (2, 3), (4, 5))]
    assert batch_disjoint(three) == [three]


@given(st.integers(2, 10), st.integers(0, 5000), st.integers(1, 50))
def test_generated_cycles_valid(n, seed, cyc):
    g = random_connected_graph(n, np.random.default_rng(seed))
    for s in (tree_cycle(g, seed, cyc), full_cycle(g, cyc), star_cycle(g, (), cyc)):
        assert validate(s, g) == []


@given(st.integers(2, 10), st.integers(0, 5000))
def test_batches_disjoint_and_ordered(n, seed):
    g = random_connected_graph(n, np.random.default_rng(seed))
    s = tree_cycle(g, seed, 1)
    batches = batch_disjoint(s)
    assert sorted(map(id, (b for bt in batches for b in bt))) == sorted(map(id, s.blocks))
    where = {}
    for k, bt in enumerate(batches):
        sups = [set(b.support) for b in bt]
        for i in range(len(sups)):
            for j in range(i + 1, len(sups)):
                assert not sups[i] & sups[j]
        for b in bt:
            where[id(b)] = k
    # conflicting blocks keep schedule order
    for i, a in enumerate(s.blocks):
        for b in s.blocks[i + 1:]:
            if set(a.support) & set(b.support):
                assert where[id(a)] < where[id(b)]
