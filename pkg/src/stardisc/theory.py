"""Closed forms from the analysis of pi^d sampling, grid weights and critical points.

Every formula has a Monte Carlo counterpart here, so the package can check
itself (``selftest``). All Monte Carlo routines take an explicit generator.

A_eps(z) = {x <= z : V_z - V_x <= eps} is the set of corners whose open box
loses at most eps of volume against [0, z); its Lebesgue and pi^d measures
bound the chance that one random sample lands within eps of the delta-max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .exact import exact_star_discrepancy
from .geometry import CoordinateGrids, build_grids
from .pointset import PointSet
from .snapping import critical_closed, critical_open

# --------------------------------------------------------------------------
# measure of A_eps(z)


@dataclass(frozen=True)
class EpsilonSetQuery:
    volume: float  # V_z
    eps: float
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must lie in (0, 1]")
        if not 0.0 < self.volume <= 1.0:
            raise ValueError("volume must lie in (0, 1]")
        if self.volume < self.eps:
            raise ValueError(f"closed forms need V_z >= eps, got V_z={self.volume}, eps={self.eps}")


def _exp_tail(x: float, d: int) -> float:
    """e^{-x} sum_{k >= d} x^k / k!, i.e. P(Poisson(x) >= d), without cancellation."""
    if x == 0.0:
        return 0.0 if d > 0 else 1.0
    if x > 50.0:
        head = sum(math.exp(k * math.log(x) - x - math.lgamma(k + 1)) for k in range(d))
        return 1.0 - head
    term = math.exp(d * math.log(x) - x - math.lgamma(d + 1))
    total = 0.0
    k = d
    while True:
        total += term
        k += 1
        term *= x / k
        if term < 1e-18 * total:
            return total


def _log_ratio(q: EpsilonSetQuery) -> float:
    """L = -ln(1 - eps / V_z)."""
    return -math.log1p(-q.eps / q.volume)


def lambda_A_eps(q: EpsilonSetQuery) -> float:
    """Lebesgue measure V_z - (V_z - eps) sum_{k<d} L^k / k!, with L = -ln(1 - eps/V_z).

    Evaluated as V_z P(Poisson(L) >= d), the same quantity without the
    cancellation of the two leading terms.
    """
    if q.volume == q.eps:
        return q.volume
    return q.volume * _exp_tail(_log_ratio(q), q.d)


def pi_A_eps(q: EpsilonSetQuery) -> float:
    """pi^d measure V_z^d - (V_z - eps)^d sum_{k<d} d^k L^k / k!, evaluated as V_z^d P(Poisson(dL) >= d)."""
    if q.volume == q.eps:
        return q.volume**q.d
    return q.volume**q.d * _exp_tail(q.d * _log_ratio(q), q.d)


def lambda_A_eps_literal(q: EpsilonSetQuery) -> float:
    """The textbook expression, term by term (loses digits for small eps / V_z)."""
    if q.volume == q.eps:
        return q.volume
    L = _log_ratio(q)
    return q.volume - (q.volume - q.eps) * sum(L**k / math.factorial(k) for k in range(q.d))


def pi_A_eps_literal(q: EpsilonSetQuery) -> float:
    if q.volume == q.eps:
        return q.volume**q.d
    L = _log_ratio(q)
    d = q.d
    return q.volume**d - (q.volume - q.eps) ** d * sum(d**k * L**k / math.factorial(k) for k in range(d))


def pi_bracket(eps: float, d: int) -> tuple[float, float]:
    """(e^-1 d^d/d! eps^d, 5/2 d^d/d! eps^d), valid for pi_A_eps whenever V_z >= d eps."""
    c = d**d / math.factorial(d) * eps**d
    return c / math.e, 2.5 * c


def lambda_upper_bound(q: EpsilonSetQuery) -> float:
    """5/(2 d!) eps^d / V_z^(d-1), valid when V_z >= d eps."""
    return 2.5 / math.factorial(q.d) * q.eps**q.d / q.volume ** (q.d - 1)


def b_k(k: int, d: int) -> float:
    """Coefficient of the series lambda(A_eps) = eps^d / (d! V^(d-1)) sum_k b_k(d) (eps/V)^k.

    b_k(d) = d! / ((k+d-1)(k+d)) sum_{k_1=0}^{k} .. sum_{k_{d-2}=0}^{k_{d-3}}
             prod_{j=1}^{d-2} 1 / (k_j + d - j - 1),
    evaluated innermost sum first as a running prefix sum.
    """
    if k < 0 or d < 2:
        raise ValueError("need k >= 0 and d >= 2")
    if d == 2:
        inner = 1.0
    else:
        # g[m] = sum over the nest from level j down, with the level-j index equal to m
        g = [1.0 / (m + 1) for m in range(k + 1)]  # level d-2
        for j in range(d - 3, 0, -1):
            acc = 0.0
            nxt = []
            for m in range(k + 1):
                acc += g[m]
                nxt.append(acc / (m + d - j - 1))
            g = nxt
        inner = math.fsum(g)
    return math.factorial(d) / ((k + d - 1) * (k + d)) * inner


def lambda_series(q: EpsilonSetQuery, terms: int) -> float:
    """Partial sum of the b_k expansion with ``terms`` terms (d >= 2, V_z > eps)."""
    d, V, e = q.d, q.volume, q.eps
    s = math.fsum(b_k(k, d) * (e / V) ** k for k in range(terms))
    return e**d / (math.factorial(d) * V ** (d - 1)) * s


def required_samples(eps: float, d: int, fail_prob: float, measure: str = "pi") -> int:
    """Number R of independent samples that puts delta^R within eps of the delta-max w.p. >= 1 - fail_prob.

    The single-sample hit probability is bounded below by eps^d (pi^d) or
    eps^d / d! (Lebesgue); R = ceil(|ln fail_prob| / |ln(1 - bound)|).
    """
    if measure not in ("pi", "lebesgue"):
        raise ValueError("measure must be 'pi' or 'lebesgue'")
    bound = eps**d if measure == "pi" else eps**d / math.factorial(d)
    return math.ceil(abs(math.log(fail_prob)) / abs(math.log1p(-bound)))


# --------------------------------------------------------------------------
# critical multi-indices


def stirling2(d: int, k: int) -> int:
    """Stirling number of the second kind, sum_j (-1)^j (k-j)^d / (j! (k-j)!), in exact integers."""
    if not 1 <= k <= d:
        raise ValueError("need 1 <= k <= d")
    total = sum((-1) ** j * math.comb(k, j) * (k - j) ** d for j in range(k + 1))
    return total // math.factorial(k)


def _log_falling_ratio(n: int, k: int) -> float:
    """ln((n-k)! / n!)."""
    return math.lgamma(n - k + 1) - math.lgamma(n + 1)


def prob_critical_open(iota: Sequence[int], n: int) -> float:
    """Chance that the 1-based multi-index iota in [n+1]^d is delta-critical for uniform random X.

    With k entries at most n: ((n-k)!/n!)^(k-1) prod_{j<=k} prod_{l=1}^{k-1} max(i_j - l, 0).
    """
    iota = [int(i) for i in iota]
    if any(not 1 <= i <= n + 1 for i in iota):
        raise ValueError(f"indices must lie in [1, {n + 1}]")
    low = [i for i in iota if i <= n]
    k = len(low)
    if k <= 1:
        return 1.0
    log_p = (k - 1) * _log_falling_ratio(n, k) if k <= n else 0.0
    for i in low:
        for ell in range(1, k):
            if i - ell <= 0:
                return 0.0
            log_p += math.log(i - ell)
    return math.exp(log_p)


def prob_critical_closed(iota: Sequence[int], n: int) -> float:
    """Chance that the 1-based multi-index iota in [n]^d is delta_bar-critical for uniform random X.

    sum_{k=1}^{d} S(d,k) ((n-k)!/n!)^(d-1) prod_j prod_{v=1}^{k-1} (i_j - v).
    """
    iota = [int(i) for i in iota]
    d = len(iota)
    if any(not 1 <= i <= n for i in iota):
        raise ValueError(f"indices must lie in [1, {n}]")
    total = 0.0
    for k in range(1, min(d, n) + 1):
        log_p = (d - 1) * _log_falling_ratio(n, k)
        zero = False
        for i in iota:
            for v in range(1, k):
                if i - v <= 0:
                    zero = True
                    break
                log_p += math.log(i - v)
            if zero:
                break
        if not zero:
            total += stirling2(d, k) * math.exp(log_p)
    return total


@njit(cache=True, nogil=True)
def _mc_critical(iota0, n, d, closed, samples, rng):
    X = np.empty((n, d))
    y = np.empty(d)
    hits = 0
    for _ in range(samples):
        for i in range(n):
            for j in range(d):
                X[i, j] = rng.random()
        for j in range(d):
            if iota0[j] >= n:
                y[j] = 1.0
            else:
                y[j] = np.sort(X[:, j])[iota0[j]]
        if closed:
            if critical_closed(X, y):
                hits += 1
        elif critical_open(X, y):
            hits += 1
    return hits


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    samples: int

    def agrees(self, target: float, sigmas: float = 4.0) -> bool:
        # a zero-variance estimate must match exactly
        return abs(self.value - target) <= sigmas * self.stderr + 1e-15


def _binomial(hits: int, samples: int, scale: float = 1.0) -> MonteCarloEstimate:
    p = hits / samples
    # a floor of one pseudo-hit keeps the band honest when p is 0 or 1
    var = max(p * (1 - p), 1.0 / samples)
    return MonteCarloEstimate(scale * p, scale * math.sqrt(var / samples), samples)


def mc_prob_critical(iota: Sequence[int], n: int, kind: str, samples: int,
                     rng: np.random.Generator) -> MonteCarloEstimate:
    """Frequency with which Phi(iota) is critical over uniform random n-point sets."""
    if kind not in ("open", "closed"):
        raise ValueError("kind must be 'open' or 'closed'")
    iota0 = np.array([int(i) - 1 for i in iota], dtype=np.int64)
    hits = _mc_critical(iota0, n, len(iota0), kind == "closed", samples, rng)
    return _binomial(int(hits), samples)


def mc_lambda_A_eps(q: EpsilonSetQuery, samples: int, rng: np.random.Generator,
                    batch: int = 200_000) -> MonteCarloEstimate:
    """Uniform points in the box [0, z] with z on the diagonal; lambda(A) = V_z * P(V_x >= V_z - eps)."""
    return _mc_A_eps(q, samples, rng, batch, poly=False)


def mc_pi_A_eps(q: EpsilonSetQuery, samples: int, rng: np.random.Generator,
                batch: int = 200_000) -> MonteCarloEstimate:
    """pi^d restricted to [0, z] has mass V_z^d and coordinates z_j u^(1/d)."""
    return _mc_A_eps(q, samples, rng, batch, poly=True)


def _mc_A_eps(q, samples, rng, batch, poly):
    d = q.d
    z = np.full(d, q.volume ** (1.0 / d))
    vz = float(np.prod(z))
    hits = 0
    left = samples
    while left:
        b = min(batch, left)
        u = rng.random((b, d))
        if poly:
            u = u ** (1.0 / d)
        vx = np.prod(u * z, axis=1)
        hits += int(np.count_nonzero(vz - vx <= q.eps))
        left -= b
    return _binomial(hits, samples, vz**d if poly else vz)


def pi_coordinate_mean(d: int, samples: int, rng: np.random.Generator) -> MonteCarloEstimate:
    """Sample mean of one pi^d coordinate; the exact mean is d / (d + 1)."""
    x = rng.random(samples) ** (1.0 / d)
    return MonteCarloEstimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(samples)), samples)


# --------------------------------------------------------------------------
# sampling bounds


@dataclass(frozen=True)
class SamplingCheck:
    rate: float
    stderr: float
    bound: float
    samples: int
    target: np.ndarray  # delta-argmax x*

    @property
    def passed(self) -> bool:
        return self.rate >= self.bound - 4.0 * self.stderr


def verify_sampling_bound(X: PointSet, eps: float, variant: str, samples: int,
                          rng: np.random.Generator, batch: int = 50_000) -> SamplingCheck:
    """Empirical P(delta(x*) - delta(r) <= eps) for r from lambda^d or pi^d.

    Compared against eps^d / d! (variant="lebesgue") or eps^d (variant="poly").
    """
    if variant not in ("lebesgue", "poly"):
        raise ValueError("variant must be 'lebesgue' or 'poly'")
    res = exact_star_discrepancy(X)
    xs = res.delta_witness
    dmax = res.delta_max
    if float(np.prod(xs)) < eps:
        raise ValueError("the delta-argmax has volume below eps")
    d = X.d
    hits = 0
    left = samples
    while left:
        b = min(batch, left)
        r = rng.random((b, d))
        if variant == "poly":
            r = r ** (1.0 / d)
        inside = np.all(X.coords[None, :, :] < r[:, None, :], axis=2)
        delta = np.prod(r, axis=1) - inside.sum(axis=1) / X.n
        hits += int(np.count_nonzero(dmax - delta <= eps))
        left -= b
    est = _binomial(hits, samples)
    bound = eps**d if variant == "poly" else eps**d / math.factorial(d)
    return SamplingCheck(est.value, est.stderr, bound, samples, xs)


def sharpness_instance(eps: float, n: int, d: int) -> PointSet:
    """All n points at (eps, 0, .., 0): the delta-max sits at (eps, 1, .., 1) and the pi^d hit rate is eps^d."""
    coords = np.zeros((n, d))
    coords[:, 0] = eps
    return PointSet(coords)


# --------------------------------------------------------------------------
# grid weights


def weights(grids: CoordinateGrids, kind: str = "lower") -> np.ndarray:
    """Probabilities that a uniform corner rounds up (``lower``) or down (``upper``) to each grid point.

    d >= 2: ``lower`` is indexed by Gamma_bar (shape nu_1 x .. x nu_d) with
    w_l(y) = prod_j (phi_j(i_j) - phi_j(i_j - 1)), phi_j(0) = 0; ``upper`` is
    indexed by Gamma (shape (nu_1-1) x ..) with the top interval wrapping to
    [0, phi_j(1)).

    d = 1: both live on Gamma with the circular convention x^0 = x^n - 1,
    x^(n+1) = x^1 + 1: w_l(x^i) = x^i - x^(i-1), w_u(x^i) = x^(i+1) - x^i.
    """
    if kind not in ("lower", "upper"):
        raise ValueError("kind must be 'lower' or 'upper'")
    if grids.d == 1:
        g = grids.gamma(0)
        if kind == "lower":
            prev = np.concatenate(([g[-1] - 1.0], g[:-1]))
            return g - prev
        nxt = np.concatenate((g[1:], [g[0] + 1.0]))
        return nxt - g
    factors = []
    for gb in grids.gamma_bar:
        if kind == "lower":
            factors.append(np.diff(np.concatenate(([0.0], gb))))
        else:
            g = gb[:-1]
            tilde = np.concatenate((g, [g[0] + 1.0]))
            factors.append(np.diff(tilde))
    w = factors[0]
    for f in factors[1:]:
        w = np.multiply.outer(w, f)
    return w


def expectation_1d(X: PointSet, weighting: str = "uniform", objective: str = "delta") -> float:
    """Exact expectation of delta or delta_bar over Gamma(X) under uniform, w_l or w_u weights."""
    if X.d != 1:
        raise ValueError("expectation_1d needs d = 1")
    if weighting not in ("uniform", "w_l", "w_u"):
        raise ValueError("weighting must be 'uniform', 'w_l' or 'w_u'")
    if objective not in ("delta", "delta_bar"):
        raise ValueError("objective must be 'delta' or 'delta_bar'")
    grids = build_grids(X)
    g = grids.gamma(0)
    x = np.sort(X.coords[:, 0])
    if objective == "delta":
        vals = g - np.searchsorted(x, g, side="left") / X.n
    else:
        vals = np.searchsorted(x, g, side="right") / X.n - g
    if weighting == "uniform":
        w = np.full(len(g), 1.0 / len(g))
    else:
        w = weights(grids, "lower" if weighting == "w_l" else "upper")
    return float(np.dot(w, vals))


def argmax_weights_1d(X: PointSet) -> tuple[float, float]:
    """(w_l(tau), w_u(tau_bar)) at the delta- and delta_bar-maximizers on Gamma(X)."""
    grids = build_grids(X)
    g = grids.gamma(0)
    x = np.sort(X.coords[:, 0])
    dl = g - np.searchsorted(x, g, side="left") / X.n
    db = np.searchsorted(x, g, side="right") / X.n - g
    return (float(weights(grids, "lower")[int(np.argmax(dl))]),
            float(weights(grids, "upper")[int(np.argmax(db))]))


def weight_counterexample() -> PointSet:
    """d = 2, n = 5: the unique delta-maximizer (0.72, 0.63) has w_l = 0.06 * 0.41 < 1/36.

    So the one-dimensional guarantee w_l(tau) >= 1/n has no analogue
    prod_j 1/|Gamma_bar_j| for d >= 2.
    """
    return PointSet(np.array([[0.37, 0.09], [0.66, 0.93], [0.21, 0.63], [0.30, 0.74], [0.72, 0.22]]))


# --------------------------------------------------------------------------
# self test


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def selftest(samples: int = 1_000_000, seed: int = 0) -> list[CheckResult]:
    """Run every closed form against its Monte Carlo or combinatorial oracle."""
    rng = np.random.Generator(np.random.PCG64(seed))
    out: list[CheckResult] = []

    def add(name, ok, detail):
        out.append(CheckResult(name, bool(ok), detail))

    for d in (2, 3, 5):
        for V in (0.3, 0.5, 0.9):
            for eps in (0.05, 0.1):
                q = EpsilonSetQuery(V, eps, d)
                lam, pi = lambda_A_eps(q), pi_A_eps(q)
                ml = mc_lambda_A_eps(q, samples, rng)
                mp = mc_pi_A_eps(q, samples, rng)
                add(f"lambda_A_eps d={d} V={V} eps={eps}", ml.agrees(lam),
                    f"{lam:.6g} vs MC {ml.value:.6g} +- {ml.stderr:.2g}")
                add(f"pi_A_eps d={d} V={V} eps={eps}", mp.agrees(pi),
                    f"{pi:.6g} vs MC {mp.value:.6g} +- {mp.stderr:.2g}")
                if V >= d * eps:
                    lo, hi = pi_bracket(eps, d)
                    add(f"pi bracket d={d} V={V} eps={eps}", lo <= pi <= hi,
                        f"{lo:.4g} <= {pi:.4g} <= {hi:.4g}")

    mc_crit = max(samples // 10, 1000)
    for n in (4, 5):
        for d in (2, 3):
            cases_open = [tuple([n - 1] * d), tuple([n] + [n - 2] * (d - 1)), tuple([n + 1] + [n] * (d - 1))]
            for iota in cases_open:
                p = prob_critical_open(iota, n)
                est = mc_prob_critical(iota, n, "open", mc_crit, rng)
                add(f"prob_critical_open n={n} iota={iota}", est.agrees(p),
                    f"{p:.5f} vs MC {est.value:.5f} +- {est.stderr:.2g}")
            for iota in [tuple([n - 1] * d), tuple([n] + [2] * (d - 1))]:
                p = prob_critical_closed(iota, n)
                est = mc_prob_critical(iota, n, "closed", mc_crit, rng)
                add(f"prob_critical_closed n={n} iota={iota}", est.agrees(p),
                    f"{p:.5f} vs MC {est.value:.5f} +- {est.stderr:.2g}")

    for d in (2, 3, 5, 8):
        m = pi_coordinate_mean(d, samples, rng)
        add(f"pi^d coordinate mean d={d}", m.agrees(d / (d + 1)),
            f"{d / (d + 1):.6f} vs MC {m.value:.6f} +- {m.stderr:.2g}")

    ok = all(b_k(k, d) <= d**k / 2 ** (k - 1) for d in range(2, 9) for k in range(11))
    add("b_k(d) <= d^k / 2^(k-1), k <= 10, d <= 8", ok, "")
    ok = all(stirling2(d, k) == k * stirling2(d - 1, k) + (stirling2(d - 1, k - 1) if k > 1 else 0)
             for d in range(2, 12) for k in range(1, d))
    add("Stirling recurrence d < 12", ok, "")

    X = weight_counterexample()
    res = exact_star_discrepancy(X)
    grids = build_grids(X)
    idx = tuple(int(np.searchsorted(grids.gamma_bar[j], res.delta_witness[j])) for j in range(2))
    w_tau = float(weights(grids, "lower")[idx])
    add("d=2 weight counterexample", w_tau < 1 / 36, f"w_l(tau) = {w_tau:.4f} < 1/36")

    for d in (2, 3, 4):
        eps = 0.5
        X = sharpness_instance(eps, 4, d)
        chk = verify_sampling_bound(X, eps, "poly", samples // 10, rng)
        agree = abs(chk.rate - eps**d) <= 4 * chk.stderr
        add(f"pi^d sampling bound sharp d={d}", chk.passed and agree,
            f"rate {chk.rate:.5f} vs eps^d {eps**d:.5f}")
    return out
