"""Coordinate grids, box counts and the local discrepancy functions.

For a corner y in [0,1]^d:

    delta(y)     = V_y - A(y)/n       A = #points in the open box [0, y)
    delta_bar(y) = Abar(y)/n - V_y    Abar = #points in the closed box [0, y]

Every routine computes V_y as the left-to-right product 1.0 * y_1 * ... * y_d
and the fraction as ``count / n``, so values from different code paths
(exact enumeration, heuristics, brute force) are bit-identical for the same
corner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .pointset import PointSet


@dataclass(frozen=True)
class CoordinateGrids:
    """Per-dimension sorted grids.

    ``gamma_bar[j]`` is the sorted set of distinct j-th coordinates with 1
    appended; ``zero_ext[j]`` additionally contains 0. The packed arrays are
    the same data padded with 1.0 into rectangles for the compiled kernels.
    """

    gamma_bar: tuple[np.ndarray, ...]
    zero_ext: tuple[np.ndarray, ...]
    packed: np.ndarray
    lengths: np.ndarray
    zpacked: np.ndarray
    zlengths: np.ndarray

    @property
    def d(self) -> int:
        return len(self.gamma_bar)

    def gamma(self, j: int) -> np.ndarray:
        """Distinct point coordinates in dimension j (gamma_bar without the 1)."""
        return self.gamma_bar[j][:-1]

    def lattice_size(self, closed: bool = True) -> int:
        """|Gamma_bar(X)| (or |Gamma(X)| with closed=False) as an exact integer."""
        size = 1
        for g in self.gamma_bar:
            size *= len(g) if closed else len(g) - 1
        return size


def _pack(rows):
    width = max(len(r) for r in rows)
    out = np.ones((len(rows), width))
    for j, r in enumerate(rows):
        out[j, : len(r)] = r
    return out, np.array([len(r) for r in rows], dtype=np.int64)


def build_grids(X: PointSet) -> CoordinateGrids:
    gb, zx = [], []
    for j in range(X.d):
        g = np.unique(X.coords[:, j])
        g = np.append(g, 1.0)
        g.setflags(write=False)
        z = g if g[0] == 0.0 else np.concatenate(([0.0], g))
        z.setflags(write=False)
        gb.append(g)
        zx.append(z)
    packed, lengths = _pack(gb)
    zpacked, zlengths = _pack(zx)
    return CoordinateGrids(tuple(gb), tuple(zx), packed, lengths, zpacked, zlengths)


def grid_ranks(X: PointSet, grids: CoordinateGrids) -> np.ndarray:
    """ranks[i, j] = position of x^i_j inside gamma_bar[j]."""
    ranks = np.empty((X.n, X.d), dtype=np.int64)
    for j in range(X.d):
        ranks[:, j] = np.searchsorted(grids.gamma_bar[j], X.coords[:, j])
    return ranks


@dataclass(frozen=True)
class BoxEval:
    y: np.ndarray
    volume: float
    open_count: int
    closed_count: int
    n: int

    @property
    def delta(self) -> float:
        return self.volume - self.open_count / self.n

    @property
    def delta_bar(self) -> float:
        return self.closed_count / self.n - self.volume

    @property
    def delta_star(self) -> float:
        return max(self.delta, self.delta_bar)


# --------------------------------------------------------------------------
# compiled kernels shared by the rest of the package


@njit(cache=True, nogil=True)
def volume(y):
    v = 1.0
    for j in range(y.shape[0]):
        v *= y[j]
    return v


@njit(cache=True, nogil=True)
def count_open(coords, y):
    n, d = coords.shape
    c = 0
    for i in range(n):
        inside = True
        for j in range(d):
            if coords[i, j] >= y[j]:
                inside = False
                break
        if inside:
            c += 1
    return c


@njit(cache=True, nogil=True)
def count_closed(coords, y):
    n, d = coords.shape
    c = 0
    for i in range(n):
        inside = True
        for j in range(d):
            if coords[i, j] > y[j]:
                inside = False
                break
        if inside:
            c += 1
    return c


@njit(cache=True, nogil=True)
def delta_open(coords, y):
    return volume(y) - count_open(coords, y) / coords.shape[0]


@njit(cache=True, nogil=True)
def delta_closed(coords, y):
    return count_closed(coords, y) / coords.shape[0] - volume(y)


@njit(cache=True, nogil=True)
def delta_star(coords, y):
    a = delta_open(coords, y)
    b = delta_closed(coords, y)
    return a if a >= b else b


# --------------------------------------------------------------------------


def evaluate_box(y, X: PointSet) -> BoxEval:
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (X.d,):
        raise ValueError(f"corner must have shape ({X.d},), got {y.shape}")
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise ValueError("corner must lie in [0, 1]^d")
    return BoxEval(
        y=y,
        volume=volume(y),
        open_count=count_open(X.coords, y),
        closed_count=count_closed(X.coords, y),
        n=X.n,
    )
