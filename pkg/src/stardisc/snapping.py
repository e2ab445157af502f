"""Snapping grid points to critical test boxes, and the criticality predicates.

snap_down shrinks a closed box to the componentwise maximum of the points it
contains, so the count is unchanged and the volume can only drop. snap_up
grows an open box from (1, .., 1) until each blocking point sits on a face,
keeping exactly the points of [0, y); which face a point lands on is decided
by a random coordinate permutation.

The single pass over the points can leave a face unsupported: a later point
may lower coordinate l below an earlier blocker's x_l, pushing that blocker
off its face. A completion pass therefore raises each coordinate, in sigma
order, to the smallest x_j among points blocked by face j alone (or to 1).
Raising y_j only widens the other faces, so one pass makes every face
critical, and the open box still holds exactly the points of [0, y).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .pointset import PointSet

# --------------------------------------------------------------------------
# kernels


@njit(cache=True, nogil=True)
def _snap_down(coords, y, out):
    """Write the snapped point to ``out`` and return the closed count of [0, y]."""
    n, d = coords.shape
    for j in range(d):
        out[j] = 0.0
    c = 0
    for i in range(n):
        inside = True
        for j in range(d):
            if coords[i, j] > y[j]:
                inside = False
                break
        if inside:
            c += 1
            for j in range(d):
                if coords[i, j] > out[j]:
                    out[j] = coords[i, j]
    return c


@njit(cache=True, nogil=True)
def _random_permutation(d, rng, perm):
    for j in range(d):
        perm[j] = j
    for i in range(d - 1, 0, -1):
        r = rng.integers(0, i + 1)
        t = perm[i]
        perm[i] = perm[r]
        perm[r] = t


@njit(cache=True, nogil=True)
def _blockers(coords, i, out):
    """Number of faces blocking point i (capped at 2) and the last one found."""
    c = 0
    w = -1
    for l in range(coords.shape[1]):
        if coords[i, l] >= out[l]:
            c += 1
            w = l
            if c == 2:
                break
    return c, w


@njit(cache=True, nogil=True)
def _complete(coords, sigma, out, outside, m):
    """Completion over the m points ``outside[:m]`` that lie outside [0, y)."""
    n, d = coords.shape
    cnt = np.zeros(n, dtype=np.int64)
    face = np.empty(n, dtype=np.int64)
    # points blocked by a single face; a point enters at most once
    single = np.empty(m, dtype=np.int64)
    ns = 0
    for k in range(m):
        i = outside[k]
        c, w = _blockers(coords, i, out)
        cnt[i] = c
        face[i] = w
        if c == 1:
            single[ns] = i
            ns += 1
    for t in range(d):
        j = sigma[t]
        new = 1.0
        for k in range(ns):
            i = single[k]
            if cnt[i] == 1 and face[i] == j and coords[i, j] < new:
                new = coords[i, j]
        if new > out[j]:
            old = out[j]
            out[j] = new
            for k in range(m):
                i = outside[k]
                x = coords[i, j]
                if x >= old and x < new:
                    c, w = _blockers(coords, i, out)
                    if c == 1 and cnt[i] != 1:
                        single[ns] = i
                        ns += 1
                    cnt[i] = c
                    face[i] = w


@njit(cache=True, nogil=True)
def _setters_hold(coords, out, setter):
    """True iff every face below 1 still carries the point that set it (then out is critical)."""
    d = coords.shape[1]
    for j in range(d):
        if out[j] < 1.0:
            i = setter[j]
            for l in range(d):
                if l != j and coords[i, l] >= out[l]:
                    return False
    return True


@njit(cache=True, nogil=True)
def _snap_up_sigma(coords, y, sigma, out, complete):
    """Snap up with a fixed permutation; return the open count of [0, y)."""
    n, d = coords.shape
    for j in range(d):
        out[j] = 1.0
    a = 0
    outside = np.empty(n, dtype=np.int64)
    setter = np.empty(d, dtype=np.int64)
    m = 0
    for i in range(n):
        inside = True
        for j in range(d):
            if coords[i, j] >= y[j]:
                inside = False
                break
        if inside:
            a += 1
            continue
        outside[m] = i
        m += 1
        blocked = True
        for j in range(d):
            if coords[i, j] >= out[j]:
                blocked = False
                break
        if not blocked:
            continue
        for t in range(d):
            j = sigma[t]
            if coords[i, j] >= y[j]:
                out[j] = coords[i, j]
                setter[j] = i
                break
    if complete and not _setters_hold(coords, out, setter):
        _complete(coords, sigma, out, outside, m)
    return a


@njit(cache=True, nogil=True)
def _snap_up(coords, y, rng, perm, out, complete):
    _random_permutation(coords.shape[1], rng, perm)
    return _snap_up_sigma(coords, y, perm, out, complete)


@njit(cache=True, nogil=True)
def critical_open(coords, y):
    """Each surface {y_j} x prod_{l != j} [0, y_l) holds a point of X, or y_j = 1."""
    n, d = coords.shape
    hit = np.zeros(d, dtype=np.bool_)
    for j in range(d):
        if y[j] == 1.0:
            hit[j] = True
    for i in range(n):
        below = 0
        eq = -1
        for l in range(d):
            x = coords[i, l]
            if x < y[l]:
                below += 1
            elif x == y[l]:
                eq = l
        if below == d - 1 and eq >= 0:
            hit[eq] = True
    for j in range(d):
        if not hit[j]:
            return False
    return True


@njit(cache=True, nogil=True)
def critical_closed(coords, y):
    """Each surface {y_j} x prod_{l != j} [0, y_l] holds a point of X."""
    n, d = coords.shape
    hit = np.zeros(d, dtype=np.bool_)
    for i in range(n):
        inside = True
        for l in range(d):
            if coords[i, l] > y[l]:
                inside = False
                break
        if inside:
            for l in range(d):
                if coords[i, l] == y[l]:
                    hit[l] = True
    for j in range(d):
        if not hit[j]:
            return False
    return True


# --------------------------------------------------------------------------
# public API


def _corner(y, X: PointSet) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (X.d,):
        raise ValueError(f"corner must have shape ({X.d},)")
    return y


def snap_down(y, X: PointSet) -> np.ndarray:
    y = _corner(y, X)
    out = np.empty_like(y)
    _snap_down(X.coords, y, out)
    return out


def snap_up(y, X: PointSet, rng: np.random.Generator, complete: bool = True) -> np.ndarray:
    """Randomized snap up; a fresh permutation is drawn from ``rng`` on every call.

    ``complete=False`` stops after the single pass over the points, whose
    output need not be critical.
    """
    y = _corner(y, X)
    out = np.empty_like(y)
    perm = np.empty(X.d, dtype=np.int64)
    _snap_up(X.coords, y, rng, perm, out, complete)
    return out


def snap_up_with_permutation(y, X: PointSet, sigma, complete: bool = True) -> np.ndarray:
    """Deterministic snap up for a given permutation of 0..d-1."""
    y = _corner(y, X)
    sigma = np.asarray(sigma, dtype=np.int64)
    if sorted(sigma.tolist()) != list(range(X.d)):
        raise ValueError("sigma must be a permutation of 0..d-1")
    out = np.empty_like(y)
    _snap_up_sigma(X.coords, y, sigma, out, complete)
    return out


def is_critical(y, X: PointSet, kind: str = "open") -> bool:
    y = _corner(y, X)
    if kind == "open":
        return bool(critical_open(X.coords, y))
    if kind == "closed":
        return bool(critical_closed(X.coords, y))
    raise ValueError(f"kind must be 'open' or 'closed', got {kind!r}")
