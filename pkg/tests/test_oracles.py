import numpy as np
import pytest
from hypothesis import given, strategies as st

from dykstra_net.dykstra import transform_weighted
from dykstra_net.funcs import (Affine, IndicatorBall, IndicatorBox, L1, Quadratic,
                               UnboundedInstance, Zero)
from dykstra_net.instances import three_node_stall, random_instance
from dykstra_net.oracles import fenchel_young_residual, oracle_allocation, oracle_dykstra


def test_oracle_dykstra_examples():
    x = oracle_dykstra([Zero(1)] * 5, [[1.0], [2.0], [3.0], [4.0], [5.0]])
    assert np.allclose(x, 3.0)
    assert np.allclose(oracle_dykstra(three_node_stall(), np.zeros((3, 1))), 0.0)
    w = transform_weighted([1.0, 3.0], [[0.0], [4.0]], [Zero(1), Zero(1)])
    assert np.allclose(w.map_back(oracle_dykstra(w.funcs, w.x0)), 3.0)


def test_oracle_allocation_examples():
    x, y = oracle_allocation(three_node_stall())
    assert x == pytest.approx([0.0]) and np.allclose(np.ravel(y), [1, 0, -1])
    x, y = oracle_allocation([Quadratic(1, 0), Quadratic(1, 2)])
    assert x == pytest.approx([1.0]) and np.allclose(np.ravel(y), [1, -1])
    x, y = oracle_allocation([Quadratic(2.0, [1.0, -3.0])])
    assert np.allclose(x, [1, -3]) and np.allclose(y[0], 0)


@given(st.integers(0, 10_000))
def test_quadratic_closed_form(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(1, 6)), int(rng.integers(1, 4))
    a = rng.uniform(0.2, 3, n)
    c = rng.normal(size=(n, d))
    x0 = rng.normal(size=(n, d))
    x = oracle_dykstra([Quadratic(float(ai), ci) for ai, ci in zip(a, c)], x0)
    expect = (x0.sum(axis=0) + (a[:, None] * c).sum(axis=0)) / (n + a.sum())
    assert np.allclose(x, expect, atol=1e-10)


@given(st.integers(0, 10_000))
def test_box_clip_closed_form(seed):
    rng = np.random.default_rng(seed)
    lo, hi = -rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)
    x0 = rng.normal(scale=3, size=(3, 2))
    x = oracle_dykstra([IndicatorBox(lo, hi), Zero(2), Zero(2)], x0)
    assert np.allclose(x[0], np.clip(x0.mean(axis=0), lo, hi), atol=1e-10)


def test_ball_nonseparable_path():
    # projection of the mean onto the unit disk
    x0 = np.array([[3.0, 4.0], [3.0, 4.0]])
    x = oracle_dykstra([IndicatorBall([0.0, 0.0], 1.0), Zero(2)], x0, tol=1e-12)
    assert np.allclose(x[0], [0.6, 0.8], atol=1e-6)


@given(st.integers(0, 10_000))
def test_allocation_self_check(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n_max=6, d_max=2, kinds=("quadratic", "box", "point", "l1"))
    x, y = oracle_allocation(inst.funcs)
    assert np.allclose(np.sum(y, axis=0), 0, atol=1e-9)
    for f, yi in zip(inst.funcs, y):
        assert abs(fenchel_young_residual(f, x, yi)) <= 1e-8


def test_unbounded_allocation():
    # 5x + |x| has no minimizer
    with pytest.raises(UnboundedInstance):
        oracle_allocation([L1(1.0, 1), Affine([5.0], 0.0)])
