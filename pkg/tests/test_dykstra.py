import numpy as np
import pytest
from hypothesis import given, strategies as st

from dykstra_net.dykstra import (InvalidCycle, begin_cycle, dual_objective, gap_certificate,
                                 gap_lower_bound, init_state, primal_objective, run, solve_block,
                                 transform_weighted)
from dykstra_net.funcs import IndicatorPoint, Quadratic, Zero
from dykstra_net.graph import Graph, complete_graph, expand_edge_duals, path_graph
from dykstra_net.instances import three_node_stall, random_instance
from dykstra_net.oracles import oracle_dykstra
from dykstra_net.schedules import Block, CycleSchedule, full_cycle, tree_cycle


def zeros(n, d=1):
    return tuple(Zero(d) for _ in range(n))


def test_init_state_examples():
    g = path_graph(3)
    x0 = np.array([[1.0], [2.0], [3.0]])
    s = init_state(g, zeros(3), x0)
    assert np.array_equal(s.x, x0)
    s = init_state(g, zeros(3), x0, v_h=np.array([[1.0], [0.0], [-1.0]]), tree=g.edges)
    assert np.allclose(s.edge_duals[(0, 1)], 1) and np.allclose(s.edge_duals[(1, 2)], 1)
    assert np.allclose(s.x, x0 - np.array([[1.0], [0.0], [-1.0]]))
    z = np.zeros((3, 3, 1))
    z[0, 1] = 1.0
    with pytest.raises(ValueError):
        init_state(g, zeros(3), x0, z_init=z)


def test_solve_block_edge_average():
    s = init_state(path_graph(3), zeros(3), [[0.0], [4.0], [6.0]])
    s = solve_block(s, Block(edges=((0, 1),)))
    assert np.allclose(s.x.ravel(), [2, 2, 6])


def test_solve_block_lone_vertex():
    s = init_state(Graph(1, ()), (Quadratic(1.0, 0.0),), [[2.0]])
    s = solve_block(s, Block(vertex=0))
    assert s.x[0, 0] == pytest.approx(1.0) and s.z[0, 0] == pytest.approx(1.0)


def test_solve_block_edge_with_point_vertex():
    funcs = (Zero(1), IndicatorPoint([0.0]), Zero(1))
    s = init_state(path_graph(3), funcs, [[0.0], [4.0], [6.0]])
    s = solve_block(s, Block(vertex=1, edges=((0, 1),)))
    assert np.allclose(s.x[:2], 0) and s.z[1, 0] == pytest.approx(4.0)
    assert s.identity_residual() < 1e-12


def test_begin_cycle_examples():
    g = path_graph(3)
    s = init_state(g, zeros(3), np.zeros((3, 1)), v_h={(0, 1): [1.0], (1, 2): [-2.0]})
    s2 = begin_cycle(s, g.edges, g.edges)
    assert np.allclose(s2.v_h.ravel(), [1, -3, 2])
    assert np.allclose(s2.edge_duals[(0, 1)], 1) and np.allclose(s2.edge_duals[(1, 2)], -2)
    k3 = complete_graph(3)
    s = init_state(k3, zeros(3), np.zeros((3, 1)), v_h={(0, 1): [1.0], (1, 2): [0.5]})
    s2 = begin_cycle(s, [(0, 2), (1, 2)], [(0, 2), (1, 2)])
    assert set(s2.edge_duals) <= {(0, 2), (1, 2)}
    assert np.allclose(s2.v_h, s.v_h)
    s = init_state(g, zeros(3), np.zeros((3, 1)))
    assert all(np.all(w == 0) for w in begin_cycle(s, g.edges, g.edges).edge_duals.values())


def test_dual_objective_zero_duals():
    funcs = (Quadratic(1, 1), Quadratic(2, -1), Quadratic(0.5, 3))
    assert dual_objective(init_state(path_graph(3), funcs, np.zeros((3, 1)))) == 0.0


def test_gap_certificate_examples():
    x0 = np.array([[1.0], [2.0], [6.0]])
    s = init_state(path_graph(3), zeros(3), x0)
    mean = np.full((3, 1), 3.0)
    cert = gap_certificate(s, mean)
    assert cert.gap == pytest.approx(0.5 * np.sum((x0 - 3) ** 2))
    assert cert.lower_bound == pytest.approx(cert.gap)
    funcs = (Quadratic(1, 1), Quadratic(2, -1), Quadratic(0.5, 3))
    s, _ = run(init_state(path_graph(3), funcs, x0), lambda n: full_cycle(path_graph(3), n),
               2000, 1e-24)
    ref = oracle_dykstra(funcs, x0)
    assert gap_certificate(s, ref).gap == pytest.approx(0.0, abs=1e-9)
    assert primal_objective(x0, funcs, ref) == pytest.approx(dual_objective(s), abs=1e-9)


@given(st.integers(0, 5000))
def test_gap_at_random_feasible_point(seed):
    rng = np.random.default_rng(seed)
    x0 = rng.normal(size=(4, 2))
    funcs = tuple(Quadratic(1.0, rng.normal(size=2)) for _ in range(4))
    s = init_state(path_graph(4), funcs, x0)
    s, _ = run(s, lambda n: tree_cycle(path_graph(4), seed, n), 3)
    xf = np.broadcast_to(rng.normal(size=2), (4, 2))
    c = gap_certificate(s, xf)
    assert c.gap >= c.lower_bound - 1e-10 and c.lower_bound >= 0


def test_transform_weighted_examples():
    funcs = zeros(2)
    w = transform_weighted([1.0, 1.0], [[0.0], [4.0]], funcs)
    assert w.funcs == funcs
    g = path_graph(2)
    for lam, expect in (([1.0, 3.0], 3.0), ([2.0, 2.0], 2.0)):
        w = transform_weighted(lam, [[0.0], [4.0]], funcs)
        s, tr = run(init_state(g, w.funcs, w.x0), lambda n: tree_cycle(g, 0, n), 500, 1e-24)
        assert tr.status == "converged"
        assert np.allclose(w.map_back(s.x), expect, atol=1e-9)


def test_run_consensus_and_quadratic():
    g = path_graph(5)
    s, tr = run(init_state(g, zeros(5), [[1.0], [2.0], [3.0], [4.0], [5.0]]),
                lambda n: tree_cycle(g, 0, n), 500, 1e-24)
    assert np.allclose(s.x, 3.0, atol=1e-10)
    # the 1/2 |x - x0|^2 term with x0 = 0 restores strong convexity
    funcs, x0, g3 = three_node_stall(), np.zeros((3, 1)), path_graph(3)
    s, tr = run(init_state(g3, funcs, x0), lambda n: tree_cycle(g3, 1, n), 2000, 1e-24)
    assert tr.status == "converged"
    assert np.allclose(s.x, oracle_dykstra(funcs, x0), atol=1e-9)


def test_invalid_cycle_raises():
    g = path_graph(3)
    bad = CycleSchedule(1, ((0, 1),), ((0, 1),), (Block(vertex=0, edges=((0, 1),)),))
    with pytest.raises(InvalidCycle):
        run(init_state(g, zeros(3), np.zeros((3, 1))), lambda n: bad, 1)


@given(st.integers(0, 10_000))
def test_monotone_blocks_and_identity(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n_max=6, d_max=2)
    s = init_state(inst.graph, inst.funcs, inst.x0)
    seen = []

    def hook(block, before, after, dva):
        seen.append((before, after, dva))

    s, tr = run(s, lambda n: tree_cycle(inst.graph, seed, n), 5, on_block=hook)
    for before, after, dva in seen:
        assert after >= before - 1e-12 * (1 + abs(before))
        assert after - before >= 0.5 * float(np.sum(dva ** 2)) - 1e-10
    assert s.identity_residual() < 1e-9
    v = s.v_h
    assert np.allclose(v, expand_edge_duals(s.edge_duals, s.n, s.dim))
    assert np.allclose(v.sum(axis=0), 0, atol=1e-9)
    assert gap_lower_bound(s) >= 0
