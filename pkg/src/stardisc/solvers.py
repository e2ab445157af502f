"""Threshold-accepting lower-bound heuristics for the star discrepancy.

Three variants share the same outer structure (threshold sequence from
random probe pairs, then a threshold-accepting walk over grid points):

* ``wf``: uniform sampling on the grid, discrete index windows, delta* of
  the visited point (the Winker-Fang baseline).
* ``basic``: pi^d sampling in continuous neighborhoods, rounding to y+, y-,
  y--, acceptance on the best rounded value.
* ``improved``: as ``basic`` but every rounded point is snapped to a critical
  one, neighborhoods shrink over the run, and delta / delta_bar are optimized
  in two separate walks whose maxima are combined.

All random draws come from the caller's ``np.random.Generator`` inside the
compiled kernels, so a trial is a pure function of (X, params, generator
state).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .geometry import build_grids, delta_closed, delta_open, delta_star, volume
from .pointset import PointSet
from .sampling import _choose_coords, _round, _sample_neighbor, _sample_pi
from .snapping import _snap_down, _snap_up

VARIANTS = ("wf", "basic", "improved")
WF_ALPHA = 0.995


@dataclass(frozen=True)
class ThresholdSequence:
    values: np.ndarray  # sorted increasing, all <= 0
    iterations_each: int

    def __len__(self) -> int:
        return len(self.values)

    @property
    def total_iterations(self) -> int:
        return len(self.values) * self.iterations_each


@dataclass(frozen=True)
class TAParams:
    """Run configuration. ``ell``/``mc`` are only used by wf and basic; None picks the defaults."""

    iterations: int
    variant: str = "improved"
    ell: int | None = None
    mc: int | None = None
    alpha: float = WF_ALPHA
    seed: int | None = None
    mc_rule: str = "literal"
    snap_completion: bool = True

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not 0.9 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0.9, 1]")
        if self.ell is not None and self.ell < 1:
            raise ValueError("ell must be >= 1")
        if self.mc is not None and self.mc < 1:
            raise ValueError("mc must be >= 1")
        _literal(self.mc_rule)


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one trial.

    ``value`` is delta*(witness) recomputed from scratch; ``search_value`` is
    the running maximum of the objective the walk itself tracked (delta or
    delta_bar of a snapped point, delta*_Gamma, ...), which never exceeds it.
    """

    value: float
    witness: np.ndarray
    variant: str
    seed: int | None
    iterations: int
    search_value: float
    thresholds: tuple[np.ndarray, ...] = ()
    evaluations: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# schedules


MC_RULES = ("prose", "literal")


@njit(cache=True, nogil=True)
def _schedule(t, I, n, d, literal=False):
    if I <= 0:
        ell = (n - 1) // 2
        mc = 2
    else:
        # exact integer form of floor((n-1)/2 (I-t)/I + t/I)
        ell = ((n - 1) * (I - t) + 2 * t) // (2 * I)
        if literal:
            mc = 2 + (t // I) * (d - 2)
        else:
            mc = 2 + (t * (d - 2)) // I
    if ell < 1:
        ell = 1
    if mc > d:
        mc = d
    if d == 1:
        mc = 1
    return ell, mc


def schedule(t: int, I: int, n: int, d: int, mc_rule: str = "prose") -> tuple[int, int]:
    """Shrinking neighborhood size ell and growing coordinate count mc at step t of I.

    ell = floor((n-1)/2 (I-t)/I + t/I), at least 1. With ``mc_rule="prose"``
    mc = 2 + floor((t/I)(d-2)) grows linearly; with ``"literal"``
    mc = 2 + floor(t/I)(d-2) stays at 2 until t = I.
    """
    if not 0 <= t <= I:
        raise ValueError("need 0 <= t <= I")
    ell, mc = _schedule(t, I, n, d, _literal(mc_rule))
    return int(ell), int(mc)


def _literal(mc_rule: str) -> bool:
    if mc_rule not in MC_RULES:
        raise ValueError(f"mc_rule must be one of {MC_RULES}, got {mc_rule!r}")
    return mc_rule == "literal"


def default_basic_params(n: int, d: int) -> tuple[int, int]:
    """(ell, mc) used by ``basic`` unless overridden."""
    ell = n // 8 if n >= 100 else n // 4
    return max(1, ell), min(2, d)


def default_wf_params(n: int, d: int) -> tuple[int, int]:
    """(ell, mc) of the baseline: k = 41 for n <= 500 else 301, mc = 3 for d <= 12 else 4."""
    k = 41 if n <= 500 else 301
    mc = 3 if d <= 12 else 4
    return (k - 1) // 2, min(mc, d)


# --------------------------------------------------------------------------
# baseline kernels


@njit(cache=True, nogil=True)
def _wf_uniform(packed, lengths, rng, idx, out):
    for j in range(idx.shape[0]):
        idx[j] = rng.integers(0, lengths[j])
        out[j] = packed[j, idx[j]]


@njit(cache=True, nogil=True)
def _wf_neighbor(packed, lengths, idx, ell, mc, rng, perm, nidx, out):
    d = idx.shape[0]
    for j in range(d):
        nidx[j] = idx[j]
    _choose_coords(d, mc, rng, perm)
    for i in range(mc):
        j = perm[i]
        lo = idx[j] - ell
        hi = idx[j] + ell
        if lo < 0:
            lo = 0
        if hi > lengths[j] - 1:
            hi = lengths[j] - 1
        nidx[j] = lo + rng.integers(0, hi - lo + 1)
    for j in range(d):
        out[j] = packed[j, nidx[j]]


@njit(cache=True, nogil=True)
def _wf_thresholds(coords, packed, lengths, m, ell, mc, rng):
    d = coords.shape[1]
    idx = np.empty(d, dtype=np.int64)
    nidx = np.empty(d, dtype=np.int64)
    perm = np.empty(d, dtype=np.int64)
    a = np.empty(d)
    b = np.empty(d)
    thr = np.empty(m)
    for t in range(m):
        _wf_uniform(packed, lengths, rng, idx, a)
        _wf_neighbor(packed, lengths, idx, ell, mc, rng, perm, nidx, b)
        thr[t] = -abs(delta_star(coords, a) - delta_star(coords, b))
    thr.sort()
    return thr


@njit(cache=True, nogil=True)
def _wf_run(coords, packed, lengths, thr, J, ell, mc, rng, witness):
    d = coords.shape[1]
    idx = np.empty(d, dtype=np.int64)
    nidx = np.empty(d, dtype=np.int64)
    perm = np.empty(d, dtype=np.int64)
    xc = np.empty(d)
    nb = np.empty(d)
    _wf_uniform(packed, lengths, rng, idx, xc)
    cur = delta_star(coords, xc)
    best = cur
    witness[:] = xc
    for i in range(thr.shape[0]):
        T = thr[i]
        for _ in range(J):
            _wf_neighbor(packed, lengths, idx, ell, mc, rng, perm, nidx, nb)
            v = delta_star(coords, nb)
            if v > best:
                best = v
                witness[:] = nb
            if v - cur >= T:
                cur = v
                idx[:] = nidx
    return best


# --------------------------------------------------------------------------
# basic kernels


@njit(cache=True, nogil=True)
def _basic_step(coords, packed, lengths, y, up, down, dd, choice):
    """delta*_Gamma(y); the best rounded point goes to ``choice`` (ties: y+, then y-)."""
    wrapped = _round(y, packed, lengths, up, down, dd)
    v = delta_open(coords, up)
    choice[:] = up
    w = delta_closed(coords, down)
    if w > v:
        v = w
        choice[:] = down
    if wrapped:
        w = delta_closed(coords, dd)
        if w > v:
            v = w
            choice[:] = dd
    return v


@njit(cache=True, nogil=True)
def _basic_thresholds(coords, packed, lengths, zpacked, zlengths, m, ell, mc, rng):
    d = coords.shape[1]
    z = np.empty(d)
    up = np.empty(d)
    down = np.empty(d)
    dd = np.empty(d)
    a = np.empty(d)
    b = np.empty(d)
    y = np.empty(d)
    perm = np.empty(d, dtype=np.int64)
    thr = np.empty(m)
    for t in range(m):
        _sample_pi(d, rng, z)
        _basic_step(coords, packed, lengths, z, up, down, dd, a)
        _sample_neighbor(a, zpacked, zlengths, ell, mc, rng, perm, y)
        _basic_step(coords, packed, lengths, y, up, down, dd, b)
        thr[t] = -abs(delta_star(coords, a) - delta_star(coords, b))
    thr.sort()
    return thr


@njit(cache=True, nogil=True)
def _basic_run(coords, packed, lengths, zpacked, zlengths, thr, J, ell, mc, rng, witness):
    d = coords.shape[1]
    z = np.empty(d)
    up = np.empty(d)
    down = np.empty(d)
    dd = np.empty(d)
    xc = np.empty(d)
    cand = np.empty(d)
    y = np.empty(d)
    perm = np.empty(d, dtype=np.int64)
    _sample_pi(d, rng, z)
    _basic_step(coords, packed, lengths, z, up, down, dd, xc)
    cur = delta_star(coords, xc)
    best = cur
    witness[:] = xc
    for i in range(thr.shape[0]):
        T = thr[i]
        for _ in range(J):
            _sample_neighbor(xc, zpacked, zlengths, ell, mc, rng, perm, y)
            v = _basic_step(coords, packed, lengths, y, up, down, dd, cand)
            if v > best:
                best = v
                witness[:] = cand
            if v - cur >= T:
                xc[:] = cand
                cur = delta_star(coords, xc)
                if cur > best:
                    best = cur
                    witness[:] = xc
    return best


# --------------------------------------------------------------------------
# improved kernels (mode 0: delta-version, mode 1: delta_bar-version)


@njit(cache=True, nogil=True)
def _improved_step(mode, coords, packed, lengths, y, up, down, dd, s1, s2, rng, perm,
                   counters, rounded, snapped, complete):
    """Snapped objective of y; the simply rounded source goes to ``rounded``."""
    n = coords.shape[0]
    wrapped = _round(y, packed, lengths, up, down, dd)
    if mode == 0:
        a = _snap_up(coords, up, rng, perm, s1, complete)
        counters[0] += 1
        rounded[:] = up
        snapped[:] = s1
        return volume(s1) - a / n
    c = _snap_down(coords, down, s1)
    counters[1] += 1
    v = c / n - volume(s1)
    rounded[:] = down
    snapped[:] = s1
    if wrapped:
        c = _snap_down(coords, dd, s2)
        counters[1] += 1
        w = c / n - volume(s2)
        if w > v:
            v = w
            rounded[:] = dd
            snapped[:] = s2
    return v


@njit(cache=True, nogil=True)
def _improved_thresholds(mode, coords, packed, lengths, zpacked, zlengths, m, rng, counters,
                         literal, complete):
    n, d = coords.shape
    z = np.empty(d)
    up = np.empty(d)
    down = np.empty(d)
    dd = np.empty(d)
    s1 = np.empty(d)
    s2 = np.empty(d)
    a = np.empty(d)
    b = np.empty(d)
    sn = np.empty(d)
    y = np.empty(d)
    perm = np.empty(d, dtype=np.int64)
    thr = np.empty(m)
    for t in range(1, m + 1):
        ell, mc = _schedule(t, m, n, d, literal)
        _sample_pi(d, rng, z)
        v0 = _improved_step(mode, coords, packed, lengths, z, up, down, dd, s1, s2, rng, perm,
                            counters, a, sn, complete)
        _sample_neighbor(a, zpacked, zlengths, ell, mc, rng, perm, y)
        v1 = _improved_step(mode, coords, packed, lengths, y, up, down, dd, s1, s2, rng, perm,
                            counters, b, sn, complete)
        thr[t - 1] = -abs(v1 - v0)
    thr.sort()
    return thr


@njit(cache=True, nogil=True)
def _improved_run(mode, coords, packed, lengths, zpacked, zlengths, thr, rng, witness, counters,
                  literal, complete):
    n, d = coords.shape
    m = thr.shape[0]
    z = np.empty(d)
    up = np.empty(d)
    down = np.empty(d)
    dd = np.empty(d)
    s1 = np.empty(d)
    s2 = np.empty(d)
    b = np.empty(d)
    sn = np.empty(d)
    y = np.empty(d)
    xc = np.empty(d)
    perm = np.empty(d, dtype=np.int64)
    _sample_pi(d, rng, z)
    cur = _improved_step(mode, coords, packed, lengths, z, up, down, dd, s1, s2, rng, perm,
                         counters, xc, witness, complete)
    best = cur
    total = m * m
    for i in range(m):
        T = thr[i]
        for tt in range(1, m + 1):
            ell, mc = _schedule(i * m + tt, total, n, d, literal)
            _sample_neighbor(xc, zpacked, zlengths, ell, mc, rng, perm, y)
            v = _improved_step(mode, coords, packed, lengths, y, up, down, dd, s1, s2, rng, perm,
                               counters, b, sn, complete)
            if v > best:
                best = v
                witness[:] = sn
            if v - cur >= T:
                xc[:] = b
                cur = v
    return best


# --------------------------------------------------------------------------
# public API


def _num_thresholds(I: int) -> int:
    return math.isqrt(I)


def wf_neighborhood(x, mc: int, ell: int, grids, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the discrete index window of half-width ell on mc random coordinates."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    d = grids.d
    idx = np.array([int(np.searchsorted(grids.gamma_bar[j], x[j])) for j in range(d)], dtype=np.int64)
    for j in range(d):
        if idx[j] >= grids.lengths[j] or grids.gamma_bar[j][idx[j]] != x[j]:
            raise ValueError("x must be a grid point")
    out = np.empty(d)
    _wf_neighbor(grids.packed, grids.lengths, idx, ell, min(mc, d), rng,
                 np.empty(d, dtype=np.int64), np.empty(d, dtype=np.int64), out)
    return out


def compute_thresholds(X: PointSet, I: int, params: TAParams, rng: np.random.Generator,
                       mode: int = 0) -> ThresholdSequence:
    """Threshold sequence for I iterations of ``params.variant``.

    ``mode`` selects the delta (0) or delta_bar (1) walk of ``improved``.
    """
    grids = build_grids(X)
    m = _num_thresholds(I)
    if params.variant == "wf":
        ell, mc = _wf_ell_mc(X, params)
        thr = _wf_thresholds(X.coords, grids.packed, grids.lengths, m, ell, mc, rng)
        keep = int(math.floor(params.alpha * m))
        J = int(math.floor(m / params.alpha)) if m else 0
        return ThresholdSequence(thr[m - keep:] if keep else thr[:0], J)
    if params.variant == "basic":
        ell, mc = _basic_ell_mc(X, params)
        thr = _basic_thresholds(X.coords, grids.packed, grids.lengths, grids.zpacked,
                                grids.zlengths, m, ell, mc, rng)
        return ThresholdSequence(thr, m)
    if mode not in (0, 1):
        raise ValueError("mode must be 0 (delta) or 1 (delta_bar)")
    counters = np.zeros(2, dtype=np.int64)
    thr = _improved_thresholds(mode, X.coords, grids.packed, grids.lengths, grids.zpacked,
                               grids.zlengths, m, rng, counters, _literal(params.mc_rule),
                               params.snap_completion)
    return ThresholdSequence(thr, m)


def _wf_ell_mc(X: PointSet, params: TAParams) -> tuple[int, int]:
    ell, mc = default_wf_params(X.n, X.d)
    if params.ell is not None:
        ell = params.ell
    if params.mc is not None:
        mc = params.mc
    return ell, min(mc, X.d)


def _basic_ell_mc(X: PointSet, params: TAParams) -> tuple[int, int]:
    ell, mc = default_basic_params(X.n, X.d)
    if params.ell is not None:
        ell = params.ell
    if params.mc is not None:
        mc = params.mc
    return ell, min(mc, X.d)


def _finish(X, witness, search_value, variant, seed, iterations, thresholds, evaluations):
    witness = np.array(witness)
    value = float(delta_star(X.coords, witness))
    return TrialResult(value, witness, variant, seed, iterations, float(search_value),
                       thresholds, evaluations)


def run_wf(X: PointSet, params: TAParams, rng: np.random.Generator) -> TrialResult:
    """Baseline threshold accepting on the grid with uniform neighbors."""
    grids = build_grids(X)
    ell, mc = _wf_ell_mc(X, params)
    m = _num_thresholds(params.iterations)
    thr = _wf_thresholds(X.coords, grids.packed, grids.lengths, m, ell, mc, rng)
    keep = int(math.floor(params.alpha * m))
    thr = thr[m - keep:] if keep else thr[:0]
    J = int(math.floor(m / params.alpha)) if m else 0
    witness = np.empty(X.d)
    best = _wf_run(X.coords, grids.packed, grids.lengths, thr, J, ell, mc, rng, witness)
    return _finish(X, witness, best, "wf", params.seed, len(thr) * J, (thr,), {})


def run_ta_basic(X: PointSet, I: int, rng: np.random.Generator, ell: int | None = None,
                 mc: int | None = None, seed: int | None = None) -> TrialResult:
    """pi^d sampling plus rounding; acceptance on delta*_Gamma of the sampled point."""
    params = TAParams(I, "basic", ell, mc, seed=seed)
    grids = build_grids(X)
    ell, mc = _basic_ell_mc(X, params)
    m = _num_thresholds(I)
    thr = _basic_thresholds(X.coords, grids.packed, grids.lengths, grids.zpacked, grids.zlengths,
                            m, ell, mc, rng)
    witness = np.empty(X.d)
    best = _basic_run(X.coords, grids.packed, grids.lengths, grids.zpacked, grids.zlengths,
                      thr, m, ell, mc, rng, witness)
    return _finish(X, witness, best, "basic", seed, m * m, (thr,), {})


def run_ta_improved(X: PointSet, I: int, rng: np.random.Generator, seed: int | None = None,
                    versions: tuple[int, ...] = (0, 1), mc_rule: str = "literal",
                    snap_completion: bool = True) -> TrialResult:
    """Snapping, shrinking neighborhoods and separate delta / delta_bar walks.

    Each walk runs floor(sqrt(I))^2 iterations with its own thresholds. The
    delta walk runs first, then the delta_bar walk, both drawing from ``rng``.
    ``evaluations`` reports per walk how many delta and delta_bar values it
    computed. ``mc_rule`` selects the coordinate-count schedule (see ``schedule``);
    ``snap_completion=False`` uses the single-pass snap up (see ``snapping``).
    """
    literal = _literal(mc_rule)
    complete = bool(snap_completion)
    grids = build_grids(X)
    m = _num_thresholds(I)
    best, wit, thrs, evals = -np.inf, None, [], {}
    for mode in versions:
        w = np.empty(X.d)
        counters = np.zeros(2, dtype=np.int64)
        args = (X.coords, grids.packed, grids.lengths, grids.zpacked, grids.zlengths)
        thr = _improved_thresholds(mode, *args, m, rng, counters, literal, complete)
        v = _improved_run(mode, *args, thr, rng, w, counters, literal, complete)
        name = "delta" if mode == 0 else "delta_bar"
        evals[name] = {"delta": int(counters[0]), "delta_bar": int(counters[1]), "best": float(v)}
        thrs.append(thr)
        best = max(best, v)
        if wit is None or delta_star(X.coords, w) > delta_star(X.coords, wit):
            wit = w
    return _finish(X, wit, best, "improved", seed, m * m, tuple(thrs), evals)


def run_trial(X: PointSet, params: TAParams, rng: np.random.Generator | None = None) -> TrialResult:
    """Dispatch on ``params.variant``; without ``rng`` a PCG64 stream is seeded from ``params.seed``."""
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(params.seed))
    if params.variant == "wf":
        return run_wf(X, params, rng)
    if params.variant == "basic":
        return run_ta_basic(X, params.iterations, rng, params.ell, params.mc, seed=params.seed)
    return run_ta_improved(X, params.iterations, rng, seed=params.seed, mc_rule=params.mc_rule,
                           snap_completion=params.snap_completion)
