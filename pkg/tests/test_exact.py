import numpy as np
import pytest
from conftest import brute_force, random_pointset
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stardisc.exact import BudgetExceededError, enumerate_critical, exact_1d, exact_star_discrepancy
from stardisc.geometry import evaluate_box
from stardisc.pointset import PointSet, generate_halton
from stardisc.snapping import is_critical


def test_1d_examples():
    assert exact_star_discrepancy(PointSet(np.array([[0.5]]))).value == 0.5
    assert exact_1d(PointSet(np.array([[0.5]]))) == 0.5
    X = PointSet(np.array([[0.25], [0.75]]))
    assert exact_star_discrepancy(X).value == 0.25 == exact_1d(X)


@pytest.mark.parametrize("n", [1, 2, 7, 50])
def test_centered_lattice(n):
    X = PointSet((np.arange(1, n + 1) / n - 1 / (2 * n)).reshape(-1, 1))
    assert exact_1d(X) == pytest.approx(1 / (2 * n), abs=1e-15)
    assert exact_star_discrepancy(X).value == pytest.approx(1 / (2 * n), abs=1e-15)


def test_exact_1d_rejects_d2():
    with pytest.raises(ValueError):
        exact_1d(PointSet(np.array([[0.1, 0.2]])))


def test_1d_random_against_closed_form():
    rng = np.random.default_rng(11)
    for _ in range(100):
        X = random_pointset(rng, int(rng.integers(1, 30)), 1)
        assert abs(exact_star_discrepancy(X).value - exact_1d(X)) <= 1e-12


def test_result_fields_consistent():
    X = generate_halton(20, 3)
    r = exact_star_discrepancy(X)
    assert r.value == max(r.delta_max, r.delta_bar_max)
    assert evaluate_box(r.delta_witness, X).delta == r.delta_max
    assert evaluate_box(r.delta_bar_witness, X).delta_bar == r.delta_bar_max
    assert evaluate_box(r.witness, X).delta_star == r.value
    assert r.side == ("closed" if r.delta_bar_max > r.delta_max else "open")


def test_budget_refusal():
    X = generate_halton(50, 5)
    with pytest.raises(BudgetExceededError) as exc:
        exact_star_discrepancy(X, budget=1000)
    assert exc.value.size == 51**5 and exc.value.budget == 1000
    with pytest.raises(BudgetExceededError):
        enumerate_critical(X, budget=1000)


small_sets = st.integers(1, 8).flatmap(
    lambda n: st.integers(1, 3).flatmap(
        lambda d: arrays(np.float64, (n, d), elements=st.integers(0, 15).map(lambda k: k / 16))
    )
)


@given(small_sets)
def test_against_brute_force(c):
    X = PointSet(c)
    r = exact_star_discrepancy(X)
    bd, bdb = brute_force(X)
    assert r.delta_max == bd and r.delta_bar_max == bdb


@given(small_sets, st.randoms(use_true_random=False))
def test_permutation_invariance(c, rnd):
    X = PointSet(c)
    v = exact_star_discrepancy(X).value
    rows = list(range(X.n))
    rnd.shuffle(rows)
    cols = list(range(X.d))
    rnd.shuffle(cols)
    assert exact_star_discrepancy(PointSet(c[rows][:, cols])).value == v


def test_critical_single_point():
    X = PointSet(np.array([[0.5, 0.5]]))
    # (0.5, 0.5) is not open-critical: the open surface {0.5} x [0, 0.5) misses the point
    np.testing.assert_array_equal(enumerate_critical(X, "open"), [[0.5, 1.0], [1.0, 0.5], [1.0, 1.0]])
    np.testing.assert_array_equal(enumerate_critical(X, "closed"), [[0.5, 0.5]])
    with pytest.raises(ValueError):
        enumerate_critical(X, "both")


@given(small_sets)
def test_critical_points_carry_the_maxima(c):
    X = PointSet(c)
    r = exact_star_discrepancy(X)
    crit = enumerate_critical(X, "open")
    assert any(np.all(y == 1.0) for y in crit)
    assert max(evaluate_box(y, X).delta for y in crit) == r.delta_max
    crit_c = enumerate_critical(X, "closed")
    assert max(evaluate_box(y, X).delta_bar for y in crit_c) == r.delta_bar_max
    for y in crit[:5]:
        assert is_critical(y, X, "open")
