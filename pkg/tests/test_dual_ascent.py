import numpy as np
import pytest
from hypothesis import given, strategies as st

from dykstra_net.dual_ascent import (NoKKTPair, allocation_objective, ascend_subset,
                                     check_smooth_overlap, detect_stuck, init_allocation,
                                     lift_from_dykstra, lift_to_dykstra,
                                     lifted_allocation_objective, lifted_dykstra_objective,
                                     run_allocation, subset_consensus_x)
from dykstra_net.funcs import Quadratic
from dykstra_net.instances import three_node_stall, random_quadratic_allocation
from dykstra_net.oracles import oracle_allocation

PAIRS = [(0, 1), (1, 2)]


def stuck_state():
    return init_allocation(three_node_stall())


def test_ascend_pair_keeps_zero():
    s = ascend_subset(stuck_state(), (0, 1))
    assert np.all(s.y == 0)
    assert allocation_objective(s.funcs, s.y) == 0


def test_ascend_full_subset():
    s = ascend_subset(stuck_state(), (0, 1, 2))
    assert np.allclose(s.y.ravel(), [1, 0, -1], atol=1e-12)
    assert allocation_objective(s.funcs, s.y) == pytest.approx(-1.0, abs=1e-12)


def test_ascend_two_quadratics():
    s = ascend_subset(init_allocation([Quadratic(1, 0), Quadratic(1, 2)]), (0, 1))
    assert np.allclose(s.y.ravel(), [1, -1])
    assert subset_consensus_x(s, (0, 1)) == pytest.approx([1.0])


def test_subset_x_at_stuck_point():
    s = stuck_state()
    s = ascend_subset(ascend_subset(s, (0, 1)), (1, 2))
    assert subset_consensus_x(s, (0, 1)) == pytest.approx([-1.0])
    assert subset_consensus_x(s, (1, 2)) == pytest.approx([1.0])
    with pytest.raises(NoKKTPair):
        subset_consensus_x(s, (0, 2))


def test_detect_stuck_examples():
    r = detect_stuck(stuck_state(), PAIRS)
    assert r.flagged
    assert np.allclose(np.ravel(r.x_values), [-1, 1])
    opt = ascend_subset(stuck_state(), (0, 1, 2))
    assert not detect_stuck(opt, [(0, 1, 2)]).flagged
    funcs = (Quadratic(1, 0), Quadratic(2, 1), Quadratic(1, 3))
    x, y = oracle_allocation(funcs)
    r = detect_stuck(init_allocation(funcs, y), PAIRS)
    assert not r.flagged and r.spread < 1e-9


def test_smooth_overlap_examples():
    smooth = [f.conj_smooth for f in three_node_stall()]
    r = check_smooth_overlap(PAIRS, smooth)
    assert not r.ok and r.pair == ((0, 1), (1, 2))
    r = check_smooth_overlap([(0, 1), (1, 2), (2, 3)], [True] * 4)
    assert r.ok and len(r.chain) == 2
    assert not check_smooth_overlap([(0, 1), (2, 3)], [True] * 4).ok
    assert check_smooth_overlap([(0, 1, 2, 3)], [False] * 4).ok


def test_lifting_zero():
    z, ze = lift_to_dykstra(np.zeros((3, 1)), np.zeros((3, 1)))
    y0, y1 = lift_from_dykstra(z, ze)
    assert np.all(y0 == 0) and np.all(y1 == 0)


@given(st.integers(0, 10_000))
def test_lifting_objectives_agree(seed):
    rng = np.random.default_rng(seed)
    funcs = tuple(Quadratic(float(rng.uniform(0.5, 2)), rng.normal(size=2)) for _ in range(3))
    x0 = rng.normal(size=(3, 2))
    z = rng.normal(size=(3, 2))
    ze = rng.normal(size=(3, 2))
    ze -= ze.mean(axis=0)
    y0, y1 = lift_from_dykstra(z, ze)
    assert np.allclose(np.sum(y0, axis=0) + np.sum(y1, axis=0), 0, atol=1e-12)
    a = lifted_allocation_objective(funcs, x0, y0, y1)
    b = lifted_dykstra_objective(funcs, x0, z, ze)
    assert a == pytest.approx(b, abs=1e-12)
    z2, ze2 = lift_to_dykstra(y0, y1)
    assert np.allclose(z2, z, atol=1e-15) and np.allclose(ze2, ze, atol=1e-15)


def test_run_allocation_examples():
    s, tr = run_allocation(stuck_state(), PAIRS, 100)
    assert tr.status == "stuck" and np.all(s.y == 0)
    assert all(r.F == 0 for r in tr.rows)
    s, tr = run_allocation(stuck_state(), PAIRS + [(0, 1, 2)], 100)
    assert tr.status == "converged"
    assert allocation_objective(s.funcs, s.y) == pytest.approx(-1.0, abs=1e-12)
    funcs = (Quadratic(1, 0), Quadratic(2, 1), Quadratic(1, 3))
    s, tr = run_allocation(init_allocation(funcs), [(0, 1), (1, 2), (0, 2)], 5000, 1e-14)
    _, y = oracle_allocation(funcs)
    assert np.allclose(s.y, np.array(y), atol=1e-8)


@given(st.integers(0, 10_000))
def test_G_nonincreasing(seed):
    funcs, subsets = random_quadratic_allocation(np.random.default_rng(seed))
    s, tr = run_allocation(init_allocation(funcs), subsets, 200)
    F = tr.column("F")
    assert all(b >= a - 1e-12 * (1 + abs(a)) for a, b in zip(F, F[1:]))
