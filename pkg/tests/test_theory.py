import itertools
import math

import numpy as np
import pytest
from conftest import random_pointset
from hypothesis import given
from hypothesis import strategies as st

from stardisc.exact import exact_star_discrepancy
from stardisc.geometry import build_grids
from stardisc.pointset import PointSet
from stardisc.snapping import is_critical
from stardisc.theory import (
    EpsilonSetQuery,
    argmax_weights_1d,
    b_k,
    expectation_1d,
    lambda_A_eps,
    lambda_A_eps_literal,
    lambda_series,
    lambda_upper_bound,
    mc_lambda_A_eps,
    mc_pi_A_eps,
    mc_prob_critical,
    pi_A_eps,
    pi_A_eps_literal,
    pi_bracket,
    pi_coordinate_mean,
    prob_critical_closed,
    prob_critical_open,
    required_samples,
    selftest,
    sharpness_instance,
    stirling2,
    verify_sampling_bound,
    weight_counterexample,
    weights,
)

rng0 = lambda s=0: np.random.Generator(np.random.PCG64(s))  # noqa: E731


# --------------------------------------------------------------------------
# A_eps measures


@pytest.mark.parametrize("V", [0.1, 0.5, 1.0])
def test_lambda_1d_is_eps(V):
    assert lambda_A_eps(EpsilonSetQuery(V, 0.1, 1)) == pytest.approx(0.1, rel=1e-14)


@pytest.mark.parametrize("d", [1, 2, 5])
def test_full_box_when_V_equals_eps(d):
    q = EpsilonSetQuery(0.3, 0.3, d)
    assert lambda_A_eps(q) == 0.3
    assert pi_A_eps(q) == 0.3**d


def test_pi_equals_lambda_in_1d():
    for V, e in [(0.9, 0.1), (0.4, 0.39), (1.0, 0.5)]:
        q = EpsilonSetQuery(V, e, 1)
        assert pi_A_eps(q) == pytest.approx(lambda_A_eps(q), rel=1e-14)


def test_query_validation():
    with pytest.raises(ValueError):
        EpsilonSetQuery(0.1, 0.2, 2)
    with pytest.raises(ValueError):
        EpsilonSetQuery(0.5, 0.0, 2)
    with pytest.raises(ValueError):
        EpsilonSetQuery(0.5, 0.1, 0)


@given(st.floats(0.01, 1.0), st.floats(0.01, 0.99), st.integers(1, 12))
def test_stable_form_matches_literal(V, frac, d):
    q = EpsilonSetQuery(V, V * frac, d)
    lam, pi = lambda_A_eps(q), pi_A_eps(q)
    # the literal forms cancel catastrophically, so compare on their error scale
    assert lam == pytest.approx(lambda_A_eps_literal(q), abs=1e-13 * V)
    assert pi == pytest.approx(pi_A_eps_literal(q), abs=1e-13 * V**d * 2**d)
    assert 0 < lam <= V and 0 < pi <= V**d


def test_against_incomplete_gamma():
    special = pytest.importorskip("scipy.special")
    for d in (2, 3, 7, 15):
        for V, e in [(0.5, 1e-4), (0.9, 0.3), (0.2, 0.19)]:
            q = EpsilonSetQuery(V, e, d)
            L = -math.log1p(-e / V)
            assert lambda_A_eps(q) == pytest.approx(V * special.gammainc(d, L), rel=1e-12)
            assert pi_A_eps(q) == pytest.approx(V**d * special.gammainc(d, d * L), rel=1e-12)


def test_mc_example_d3():
    q = EpsilonSetQuery(0.5, 0.1, 3)
    est = mc_lambda_A_eps(q, 1_000_000, rng0(1))
    assert est.agrees(lambda_A_eps(q))


def test_pi_bracket_and_corollary():
    for d in range(1, 9):
        for e in (0.01, 0.05, 0.1):
            for V in np.linspace(d * e, 1.0, 7):
                if V > 1.0:
                    continue
                q = EpsilonSetQuery(float(V), e, d)
                lo, hi = pi_bracket(e, d)
                assert lo <= pi_A_eps(q) <= hi
                assert lambda_A_eps(q) <= lambda_upper_bound(q)
                # sampling bounds, Lebesgue and pi^d variants
                assert pi_A_eps(q) >= e**d * (1 - 1e-12)
                assert lambda_A_eps(q) >= e**d / (math.factorial(d) * V ** (d - 1)) * (1 - 1e-12)


@pytest.mark.parametrize("d", [2, 3, 6])
def test_pi_increasing_in_volume(d):
    e = 0.05
    vals = [pi_A_eps(EpsilonSetQuery(float(V), e, d)) for V in np.linspace(e, 1.0, 40)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_required_samples():
    assert required_samples(0.5, 1, 0.5) == 1
    R = required_samples(0.1, 2, 0.01)
    assert (1 - 0.01) ** 0 > 0 and (1 - 0.1**2) ** R <= 0.01 < (1 - 0.1**2) ** (R - 1)
    assert required_samples(0.1, 3, 0.01, "lebesgue") > required_samples(0.1, 3, 0.01, "pi")
    with pytest.raises(ValueError):
        required_samples(0.1, 3, 0.01, "other")


# --------------------------------------------------------------------------
# b_k


@pytest.mark.parametrize("d", range(2, 9))
def test_b_k_first_terms(d):
    assert b_k(0, d) == pytest.approx(1.0, rel=1e-15)
    assert b_k(1, d) == pytest.approx(d * (d - 1) / (2 * (d + 1)), rel=1e-14)


def test_b_k_special_forms():
    for k in range(12):
        assert b_k(k, 2) == pytest.approx(2 / ((k + 1) * (k + 2)), rel=1e-14)
        h = sum(1 / (v + 1) for v in range(k + 1))
        assert b_k(k, 3) == pytest.approx(6 / ((k + 2) * (k + 3)) * h, rel=1e-14)


def test_b_k_bound():
    for d in range(2, 9):
        for k in range(11):
            assert b_k(k, d) <= d**k / 2 ** (k - 1)


def test_b_k_recurrence():
    for d in range(3, 8):
        for k in range(15):
            lhs = (k + d) * (k + d - 1) * b_k(k, d)
            rhs = d * sum((mu + d - 1) * b_k(mu, d - 1) for mu in range(k + 1))
            assert lhs == pytest.approx(rhs, rel=1e-12)


def test_b_k_power_series():
    # (-ln(1-x))^(d-1) / (d-1)! = (1/d!) sum_k (k+d) b_k(d) x^(k+d-1)
    K = 20
    log_series = np.array([0.0] + [1.0 / j for j in range(1, K + 10)])
    for d in range(2, 7):
        p = np.array([1.0])
        for _ in range(d - 1):
            p = np.convolve(p, log_series)[: K + 10]
        p /= math.factorial(d - 1)
        for k in range(K):
            assert p[k + d - 1] == pytest.approx((k + d) * b_k(k, d) / math.factorial(d), rel=1e-12)


def test_b_k_rejects():
    with pytest.raises(ValueError):
        b_k(0, 1)
    with pytest.raises(ValueError):
        b_k(-1, 3)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_series_converges(d):
    for V, e in [(0.5, 0.25), (0.8, 0.1), (0.3, 0.15)]:
        q = EpsilonSetQuery(V, e, d)
        assert lambda_series(q, 50) == pytest.approx(lambda_A_eps(q), rel=1e-8)


# --------------------------------------------------------------------------
# Stirling numbers and critical probabilities


def test_stirling():
    assert stirling2(3, 2) == 3
    assert stirling2(10, 3) == 9330
    for d in range(1, 15):
        assert stirling2(d, 1) == 1 and stirling2(d, d) == 1
        for k in range(2, d):
            assert stirling2(d, k) == k * stirling2(d - 1, k) + stirling2(d - 1, k - 1)
    # set partitions: sum_k S(d,k) k! / ... via surjections onto k labels
    for d in range(1, 8):
        assert sum(stirling2(d, k) * math.factorial(k) * math.comb(5, k) for k in range(1, min(d, 5) + 1)) == 5**d
    with pytest.raises(ValueError):
        stirling2(3, 4)


def test_prob_open_trivial():
    assert prob_critical_open((6, 6, 6), 5) == 1.0
    assert all(prob_critical_open((i,), 5) == 1.0 for i in range(1, 7))
    with pytest.raises(ValueError):
        prob_critical_open((7,), 5)


def test_prob_closed_trivial():
    assert all(prob_critical_closed((i,), 5) == 1.0 for i in range(1, 6))
    for d in (2, 3, 4):
        assert prob_critical_closed((1,) * d, 5) == pytest.approx(5.0 ** (1 - d), rel=1e-12)
    with pytest.raises(ValueError):
        prob_critical_closed((6, 1), 5)


def test_prob_range_and_large_n():
    for n in (3, 6):
        for d in (2, 3):
            for iota in itertools.product(range(1, n + 2), repeat=d):
                assert 0.0 <= prob_critical_open(iota, n) <= 1.0
                if max(iota) <= n:
                    assert 0.0 <= prob_critical_closed(iota, n) <= 1.0 + 1e-12
    assert 0 < prob_critical_open((9000, 9500, 10_000), 10_000) <= 1
    assert 0 < prob_critical_closed((9000, 9500, 10_000), 10_000) <= 1


def test_prob_open_exact_small_case():
    # n = 2, both coordinates at the top rank: critical iff the two argmaxes differ
    assert prob_critical_open((2, 2), 2) == pytest.approx(0.5)
    assert prob_critical_closed((2, 2), 2) == pytest.approx(1.0)


def test_prob_critical_open_mc_example():
    est = mc_prob_critical((3, 4), 5, "open", 100_000, rng0(2))
    assert est.agrees(prob_critical_open((3, 4), 5))


def test_prob_critical_closed_mc_example():
    est = mc_prob_critical((3, 3), 4, "closed", 100_000, rng0(3))
    assert est.agrees(prob_critical_closed((3, 3), 4))


def test_mc_kernel_matches_is_critical():
    # the compiled loop and the public predicate see the same grid point
    rng = rng0(4)
    n, d = 5, 3
    iota = (3, 6, 2)
    hits = 0
    for _ in range(3000):
        X = PointSet(rng.random((n, d)))
        y = [1.0 if i > n else np.sort(X.coords[:, j])[i - 1] for j, i in enumerate(iota)]
        hits += is_critical(y, X, "open")
    p = prob_critical_open(iota, n)
    assert abs(hits / 3000 - p) <= 4 * math.sqrt(p * (1 - p) / 3000)


def test_mc_prob_rejects_kind():
    with pytest.raises(ValueError):
        mc_prob_critical((1, 1), 3, "both", 10, rng0())


# --------------------------------------------------------------------------
# weights


def test_weights_1d_example():
    g = build_grids(PointSet(np.array([[0.25], [0.75]])))
    np.testing.assert_allclose(weights(g, "lower"), [0.5, 0.5])
    np.testing.assert_allclose(weights(g, "upper"), [0.5, 0.5])


def test_weights_rejects_kind():
    with pytest.raises(ValueError):
        weights(build_grids(PointSet(np.array([[0.5]]))), "middle")


@given(st.integers(0, 2**32), st.integers(1, 7), st.integers(1, 3))
def test_weights_positive_and_normalised(seed, n, d):
    X = random_pointset(rng0(seed), n, d, grid=9 if seed % 2 else None)
    g = build_grids(X)
    for kind in ("lower", "upper"):
        w = weights(g, kind)
        # a zero coordinate carries zero lower weight (the interval (0, 0] is empty)
        assert np.all(w >= 0)
        if kind == "upper" or not np.any(X.coords == 0.0):
            assert np.all(w > 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
    if d >= 2:
        assert weights(g, "lower").shape == tuple(len(b) for b in g.gamma_bar)
        assert weights(g, "upper").shape == tuple(len(b) - 1 for b in g.gamma_bar)


def test_weights_match_rounding_frequencies():
    # w_l(y) is the chance that a uniform corner rounds up to y
    from stardisc.sampling import round_to_grid

    rng = rng0(6)
    X = random_pointset(rng, 4, 2)
    g = build_grids(X)
    w = weights(g, "lower")
    N = 20000
    counts = np.zeros_like(w)
    for _ in range(N):
        up = round_to_grid(rng.random(2), g).up
        counts[tuple(int(np.searchsorted(g.gamma_bar[j], up[j])) for j in range(2))] += 1
    assert np.all(np.abs(counts / N - w) <= 4 * np.sqrt(w * (1 - w) / N) + 1e-12)


def test_weight_counterexample():
    X = weight_counterexample()
    r = exact_star_discrepancy(X)
    g = build_grids(X)
    np.testing.assert_array_equal(r.delta_witness, [0.72, 0.63])
    # unique maximizer
    vals = [(y0 * y1 - np.sum(np.all(X.coords < [y0, y1], axis=1)) / 5) for y0 in g.gamma_bar[0] for y1 in g.gamma_bar[1]]
    assert sum(v == r.delta_max for v in vals) == 1
    w = weights(g, "lower")[4, 2]
    assert w == pytest.approx(0.06 * 0.41) and w < 1 / 36


# --------------------------------------------------------------------------
# 1-D lemma


def test_expectation_single_point():
    X = PointSet(np.array([[0.37]]))
    assert expectation_1d(X, "w_l", "delta") == pytest.approx(0.37)
    assert expectation_1d(X, "uniform", "delta") == pytest.approx(0.37)


def test_expectation_rejects():
    with pytest.raises(ValueError):
        expectation_1d(PointSet(np.array([[0.1, 0.2]])))
    with pytest.raises(ValueError):
        expectation_1d(PointSet(np.array([[0.1]])), "heavy")
    with pytest.raises(ValueError):
        expectation_1d(PointSet(np.array([[0.1]])), "uniform", "gamma")


def test_lemma_1d_on_random_sets():
    rng = rng0(12)
    for _ in range(100):
        n = int(rng.integers(1, 40))
        X = PointSet(rng.random((n, 1)))
        assert expectation_1d(X, "w_l", "delta") >= expectation_1d(X, "uniform", "delta")
        assert expectation_1d(X, "w_u", "delta_bar") >= expectation_1d(X, "uniform", "delta_bar")
        wl, wu = argmax_weights_1d(X)
        assert wl >= 1 / n and wu >= 1 / n


# --------------------------------------------------------------------------
# sampling bounds


@pytest.mark.parametrize("variant", ["lebesgue", "poly"])
def test_sampling_bound_1d(variant):
    rng = rng0(20)
    X = PointSet(np.array([[0.05], [0.2], [0.3], [0.38], [0.9]]))  # delta-argmax 0.9, volume >= eps
    chk = verify_sampling_bound(X, 0.1, variant, 100_000, rng)
    assert chk.bound == pytest.approx(0.1)
    assert chk.passed


def test_sharpness_construction():
    for d in (2, 3):
        chk = verify_sampling_bound(sharpness_instance(0.5, 3, d), 0.5, "poly", 200_000, rng0(d))
        np.testing.assert_array_equal(chk.target, [0.5] + [1.0] * (d - 1))
        assert abs(chk.rate - 0.5**d) <= 4 * chk.stderr


def test_poly_beats_lebesgue_d3():
    rng = rng0(30)
    X = random_pointset(rng, 10, 3)
    lam = verify_sampling_bound(X, 0.05, "lebesgue", 200_000, rng)
    pi = verify_sampling_bound(X, 0.05, "poly", 200_000, rng)
    assert lam.passed and pi.passed
    assert pi.rate >= lam.rate - 4 * math.hypot(pi.stderr, lam.stderr)


def test_sampling_bound_rejects():
    X = PointSet(np.array([[0.9, 0.9]]))  # delta-argmax (0.9, 1) has volume 0.9
    with pytest.raises(ValueError):
        verify_sampling_bound(X, 0.95, "poly", 10, rng0())
    with pytest.raises(ValueError):
        verify_sampling_bound(X, 0.1, "other", 10, rng0())


def test_pi_coordinate_mean():
    for d in (1, 4):
        m = pi_coordinate_mean(d, 200_000, rng0(d))
        assert m.agrees(d / (d + 1))


def test_mc_pi_agrees():
    q = EpsilonSetQuery(0.6, 0.1, 4)
    assert mc_pi_A_eps(q, 400_000, rng0(5)).agrees(pi_A_eps(q))


def test_selftest_small():
    results = selftest(samples=20_000, seed=3)
    assert len(results) > 40
    assert all(r.passed for r in results), [r for r in results if not r.passed]
