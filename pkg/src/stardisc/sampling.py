"""pi^d sampling, continuous neighborhoods and rounding onto the grid.

The compiled kernels (underscore names) are what the solvers call; the public
functions are thin wrappers that consume the generator in exactly the same
order, so a wrapper pipeline and a solver step replay identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import CoordinateGrids

# --------------------------------------------------------------------------
# kernels


@njit(cache=True, nogil=True)
def _sample_pi(d, rng, out):
    inv = 1.0 / d
    for j in range(d):
        out[j] = rng.random() ** inv


@njit(cache=True, nogil=True)
def _psi_inverse(s, xi, eta, dexp):
    # the endpoints are grid values; the power round trip could miss them by an ulp
    if s <= 0.0:
        return xi
    if s >= 1.0:
        return eta
    a = xi**dexp
    y = ((eta**dexp - a) * s + a) ** (1.0 / dexp)
    if y < xi:
        y = xi
    if y > eta:
        y = eta
    return y


@njit(cache=True, nogil=True)
def _choose_coords(d, mc, rng, perm):
    """First mc entries of perm become a uniform mc-subset of 0..d-1."""
    for j in range(d):
        perm[j] = j
    for i in range(mc):
        r = i + rng.integers(0, d - i)
        t = perm[i]
        perm[i] = perm[r]
        perm[r] = t


@njit(cache=True, nogil=True)
def _window(x_j, zrow, zlen, ell):
    pos = np.searchsorted(zrow[:zlen], x_j)
    lo = pos - ell
    hi = pos + ell
    if lo < 0:
        lo = 0
    if hi > zlen - 1:
        hi = zlen - 1
    return zrow[lo], zrow[hi]


@njit(cache=True, nogil=True)
def _sample_neighbor(x, zpacked, zlengths, ell, mc, rng, perm, out):
    d = x.shape[0]
    for j in range(d):
        out[j] = x[j]
    _choose_coords(d, mc, rng, perm)
    for i in range(mc):
        j = perm[i]
        xi, eta = _window(x[j], zpacked[j], zlengths[j], ell)
        s = rng.random()
        if xi < eta:
            out[j] = _psi_inverse(s, xi, eta, float(d))


@njit(cache=True, nogil=True)
def _round(y, packed, lengths, up, down, downdown):
    """Fill y+, y-, y--; return True iff some y_j fell below min Gamma_bar_j."""
    wrapped = False
    for j in range(y.shape[0]):
        L = lengths[j]
        row = packed[j, :L]
        k = np.searchsorted(row, y[j])
        if k > L - 1:
            k = L - 1
        up[j] = row[k]
        if y[j] >= row[0]:
            r = np.searchsorted(row, y[j], side="right") - 1
            down[j] = row[r]
            downdown[j] = row[r]
        else:
            wrapped = True
            # max Gamma_j; the grid always holds at least one point coordinate
            down[j] = row[L - 2]
            downdown[j] = row[0]
    return wrapped


# --------------------------------------------------------------------------
# public API


def pi_transform(z):
    """Map uniform z in [0,1]^d to pi^d distributed (z_1^(1/d), .., z_d^(1/d))."""
    z = np.asarray(z, dtype=np.float64)
    return z ** (1.0 / z.shape[-1])


def sample_pi(d: int, rng: np.random.Generator) -> np.ndarray:
    """One point from the product measure with density d r^(d-1) per coordinate."""
    if d < 1:
        raise ValueError("d must be >= 1")
    out = np.empty(d)
    _sample_pi(d, rng, out)
    return out


def psi(r, xi, eta, d):
    """Psi(r) = (r^d - xi^d) / (eta^d - xi^d)."""
    return (r**d - xi**d) / (eta**d - xi**d)


def psi_inverse(s, xi, eta, d):
    """Inverse of ``psi``: ((eta^d - xi^d) s + xi^d)^(1/d), clamped into [xi, eta]."""
    return _psi_inverse(float(s), float(xi), float(eta), float(d))


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Continuous neighborhood of a grid point: intervals [xi_j, eta_j] on ``coords``."""

    center: np.ndarray
    coords: tuple[int, ...]
    xi: tuple[float, ...]
    eta: tuple[float, ...]
    ell: int

    @property
    def k(self) -> int:
        return 2 * self.ell + 1

    @property
    def mc(self) -> int:
        return len(self.coords)


def build_neighborhood(x, mc: int, ell: int, grids: CoordinateGrids, rng: np.random.Generator) -> NeighborhoodSpec:
    x = np.ascontiguousarray(x, dtype=np.float64)
    d = grids.d
    if x.shape != (d,):
        raise ValueError(f"center must have shape ({d},)")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if not 1 <= mc <= d:
        raise ValueError(f"mc must lie in [1, {d}]")
    perm = np.empty(d, dtype=np.int64)
    _choose_coords(d, mc, rng, perm)
    chosen = tuple(int(j) for j in perm[:mc])
    xs, es = [], []
    for j in chosen:
        lo, hi = _window(x[j], grids.zpacked[j], grids.zlengths[j], ell)
        xs.append(float(lo))
        es.append(float(hi))
    return NeighborhoodSpec(x.copy(), chosen, tuple(xs), tuple(es), ell)


def sample_neighbor(spec: NeighborhoodSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw y from the neighborhood; non-chosen coordinates are copied from the center."""
    y = spec.center.copy()
    d = float(len(y))
    for j, lo, hi in zip(spec.coords, spec.xi, spec.eta):
        s = rng.random()
        if lo < hi:
            y[j] = _psi_inverse(s, lo, hi, d)
    return y


@dataclass(frozen=True)
class RoundedTriple:
    up: np.ndarray
    down: np.ndarray
    downdown: np.ndarray
    wrapped: bool  # True iff down != downdown is possible (some y_j < min Gamma_bar_j)


def round_to_grid(y, grids: CoordinateGrids) -> RoundedTriple:
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (grids.d,):
        raise ValueError(f"point must have shape ({grids.d},)")
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise ValueError("point must lie in [0, 1]^d")
    up, down, dd = np.empty_like(y), np.empty_like(y), np.empty_like(y)
    wrapped = _round(y, grids.packed, grids.lengths, up, down, dd)
    return RoundedTriple(up, down, dd, bool(wrapped))
