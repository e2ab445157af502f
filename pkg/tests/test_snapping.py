import numpy as np
import pytest
from conftest import random_pointset
from hypothesis import given
from hypothesis import strategies as st

from stardisc.geometry import build_grids, evaluate_box
from stardisc.pointset import PointSet
from stardisc.sampling import round_to_grid
from stardisc.snapping import is_critical, snap_down, snap_up, snap_up_with_permutation

ONE = PointSet(np.array([[0.5, 0.5]]))


def test_snap_down_examples():
    np.testing.assert_array_equal(snap_down([0.8, 0.9], ONE), [0.5, 0.5])
    np.testing.assert_array_equal(snap_down([0.4, 0.9], ONE), [0.0, 0.0])


def test_snap_up_no_blocker():
    X = PointSet(np.array([[0.1, 0.1]]))
    np.testing.assert_array_equal(snap_up([0.5, 0.5], X, np.random.default_rng(0)), [1.0, 1.0])


def test_snap_up_single_point_both_permutations():
    np.testing.assert_array_equal(snap_up_with_permutation([0.5, 0.5], ONE, [0, 1]), [0.5, 1.0])
    np.testing.assert_array_equal(snap_up_with_permutation([0.5, 0.5], ONE, [1, 0]), [1.0, 0.5])
    rng = np.random.default_rng(3)
    N = 4000
    first = sum(snap_up([0.5, 0.5], ONE, rng)[0] == 0.5 for _ in range(N))
    assert abs(first / N - 0.5) < 4 * np.sqrt(0.25 / N)


def test_snap_up_rejects_bad_permutation():
    with pytest.raises(ValueError):
        snap_up_with_permutation([0.5, 0.5], ONE, [0, 0])


def test_is_critical_examples():
    assert is_critical([1.0, 1.0], ONE, "open")
    assert is_critical([0.5, 1.0], ONE, "open")
    assert not is_critical([0.5, 0.5], ONE, "open")
    assert is_critical([0.5, 0.5], ONE, "closed")
    assert not is_critical([0.5, 1.0], ONE, "closed")
    with pytest.raises(ValueError):
        is_critical([0.5, 0.5], ONE, "sideways")


def test_snap_up_replay():
    rng = np.random.default_rng(9)
    X = random_pointset(rng, 12, 5)
    y = rng.random(5)
    sigma = [3, 0, 4, 1, 2]
    a = snap_up_with_permutation(y, X, sigma)
    b = snap_up_with_permutation(y, X, sigma)
    np.testing.assert_array_equal(a, b)
    # a fresh generator with the same seed gives the same draw
    np.testing.assert_array_equal(snap_up(y, X, np.random.default_rng(4)), snap_up(y, X, np.random.default_rng(4)))


@given(st.integers(0, 2**32), st.integers(1, 10), st.integers(1, 5))
def test_snapping_lemma(seed, n, d):
    rng = np.random.default_rng(seed)
    X = random_pointset(rng, n, d, grid=6 if seed % 3 == 0 else None)
    r = round_to_grid(rng.random(d), build_grids(X))
    up = snap_up(r.up, X, rng)
    e0, e1 = evaluate_box(r.up, X), evaluate_box(up, X)
    assert is_critical(up, X, "open")
    assert e1.open_count == e0.open_count
    assert np.all(up >= r.up)
    assert e1.delta >= e0.delta
    dn = snap_down(r.down, X)
    f0, f1 = evaluate_box(r.down, X), evaluate_box(dn, X)
    assert f1.closed_count == f0.closed_count
    assert np.all(dn <= r.down)
    assert f1.delta_bar >= f0.delta_bar
    if f0.closed_count:
        assert is_critical(dn, X, "closed")


def test_single_pass_can_miss_criticality():
    # point 2 lowers face 1 to 0.75 and so knocks point 1 off face 2
    X = PointSet(np.array([[0.0, 0.75, 0.5], [0.375, 0.75, 0.25]]))
    y = [0.5, 0.125, 0.375]
    single = snap_up_with_permutation(y, X, [0, 2, 1], complete=False)
    np.testing.assert_array_equal(single, [1.0, 0.75, 0.5])
    assert not is_critical(single, X, "open")
    full = snap_up_with_permutation(y, X, [0, 2, 1])
    np.testing.assert_array_equal(full, [1.0, 0.75, 1.0])
    assert is_critical(full, X, "open")
    assert evaluate_box(full, X).open_count == evaluate_box(y, X).open_count == 0


@given(st.integers(0, 2**32), st.integers(1, 10), st.integers(1, 6))
def test_completion_dominates_single_pass(seed, n, d):
    rng = np.random.default_rng(seed)
    X = random_pointset(rng, n, d, grid=5)
    y = rng.random(d)
    sigma = rng.permutation(d)
    a = snap_up_with_permutation(y, X, sigma, complete=False)
    b = snap_up_with_permutation(y, X, sigma)
    assert np.all(b >= a)
    assert evaluate_box(a, X).open_count == evaluate_box(b, X).open_count
