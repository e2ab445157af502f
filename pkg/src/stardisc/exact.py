"""Exact star discrepancy by enumeration of the coordinate grid.

    d*(X) = max( max_{y in Gamma_bar} delta(y), max_{y in Gamma} delta_bar(y) )

The enumerator walks the index lattice depth first over dimensions 1..d-1,
keeping at each level the points still inside the open and the closed prefix
box. The last dimension is handled for all of its grid values at once by a
counting sweep over the surviving points, so a leaf costs O(1) amortised.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
from numba import njit

from .geometry import CoordinateGrids, build_grids, grid_ranks
from .pointset import PointSet
from .snapping import critical_closed, critical_open

DEFAULT_BUDGET = 10**9


class BudgetExceededError(RuntimeError):
    def __init__(self, size: int, budget: int):
        super().__init__(f"grid has {size} lattice nodes, budget is {budget}")
        self.size = size
        self.budget = budget


@dataclass(frozen=True)
class ExactResult:
    value: float
    witness: np.ndarray
    side: str  # "open" (delta attains the max) or "closed" (delta_bar does)
    delta_max: float
    delta_bar_max: float
    delta_witness: np.ndarray
    delta_bar_witness: np.ndarray


@njit(cache=True, nogil=True)
def _sweep(ranks, g, nu_last, last, n, open_list, n_open, closed_list, n_closed,
           vprefix, prefix_has_one, cnt_o, cnt_c, best, best_idx, prefix_idx):
    for k in range(nu_last):
        cnt_o[k] = 0
        cnt_c[k] = 0
    for t in range(n_open):
        cnt_o[ranks[open_list[t], last]] += 1
    for t in range(n_closed):
        cnt_c[ranks[closed_list[t], last]] += 1
    a = 0
    ab = 0
    for k in range(nu_last):
        v = vprefix * g[last, k]
        dl = v - a / n
        if dl > best[0]:
            best[0] = dl
            for j in range(last):
                best_idx[0, j] = prefix_idx[j]
            best_idx[0, last] = k
        a += cnt_o[k]
        ab += cnt_c[k]
        if not prefix_has_one and k < nu_last - 1:
            db = ab / n - v
            if db > best[1]:
                best[1] = db
                for j in range(last):
                    best_idx[1, j] = prefix_idx[j]
                best_idx[1, last] = k


@njit(cache=True, nogil=True)
def _enumerate(ranks, g, nu):
    n, d = ranks.shape
    last = d - 1
    best = np.full(2, -np.inf)
    best_idx = np.zeros((2, d), dtype=np.int64)
    maxnu = 0
    for j in range(d):
        if nu[j] > maxnu:
            maxnu = nu[j]
    cnt_o = np.zeros(maxnu, dtype=np.int64)
    cnt_c = np.zeros(maxnu, dtype=np.int64)
    open_lists = np.empty((d, n), dtype=np.int64)
    closed_lists = np.empty((d, n), dtype=np.int64)
    n_open = np.zeros(d, dtype=np.int64)
    n_closed = np.zeros(d, dtype=np.int64)
    for i in range(n):
        open_lists[0, i] = i
        closed_lists[0, i] = i
    n_open[0] = n
    n_closed[0] = n
    vol = np.ones(d)
    has_one = np.zeros(d, dtype=np.bool_)
    idx = np.zeros(d, dtype=np.int64)

    if d == 1:
        _sweep(ranks, g, nu[0], 0, n, open_lists[0], n, closed_lists[0], n,
               1.0, False, cnt_o, cnt_c, best, best_idx, idx)
        return best, best_idx

    level = 0
    idx[0] = -1
    while level >= 0:
        idx[level] += 1
        k = idx[level]
        if k >= nu[level]:
            level -= 1
            continue
        nxt = level + 1
        vol[nxt] = vol[level] * g[level, k]
        has_one[nxt] = has_one[level] or (k == nu[level] - 1)
        c = 0
        for t in range(n_open[level]):
            p = open_lists[level, t]
            if ranks[p, level] < k:
                open_lists[nxt, c] = p
                c += 1
        n_open[nxt] = c
        c = 0
        for t in range(n_closed[level]):
            p = closed_lists[level, t]
            if ranks[p, level] <= k:
                closed_lists[nxt, c] = p
                c += 1
        n_closed[nxt] = c
        if nxt == last:
            _sweep(ranks, g, nu[last], last, n, open_lists[nxt], n_open[nxt],
                   closed_lists[nxt], n_closed[nxt], vol[nxt], has_one[nxt],
                   cnt_o, cnt_c, best, best_idx, idx)
        else:
            level = nxt
            idx[level] = -1
    return best, best_idx


def _check_budget(grids: CoordinateGrids, budget: int) -> None:
    size = grids.lattice_size()
    if size > budget:
        raise BudgetExceededError(size, budget)


def exact_star_discrepancy(X: PointSet, budget: int = DEFAULT_BUDGET) -> ExactResult:
    """Exact star discrepancy; refuses grids with more than ``budget`` nodes."""
    grids = build_grids(X)
    _check_budget(grids, budget)
    ranks = grid_ranks(X, grids)
    best, best_idx = _enumerate(ranks, grids.packed, grids.lengths)
    w = [np.array([grids.gamma_bar[j][best_idx[s, j]] for j in range(X.d)]) for s in (0, 1)]
    d_max, db_max = float(best[0]), float(best[1])
    if db_max > d_max:
        return ExactResult(db_max, w[1], "closed", d_max, db_max, w[0], w[1])
    return ExactResult(d_max, w[0], "open", d_max, db_max, w[0], w[1])


def exact_1d(X: PointSet) -> float:
    """max_i max(i/n - x_(i), x_(i) - (i-1)/n) over the sorted coordinates."""
    if X.d != 1:
        raise ValueError(f"exact_1d needs d = 1, got d = {X.d}")
    x = np.sort(X.coords[:, 0])
    n = X.n
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


# --------------------------------------------------------------------------
# critical points


def enumerate_critical(X: PointSet, kind: str = "open", budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """All delta- (kind="open") or delta_bar-critical (kind="closed") points, shape (m, d).

    Rows come out in lexicographic grid order.
    """
    if kind not in ("open", "closed"):
        raise ValueError(f"kind must be 'open' or 'closed', got {kind!r}")
    grids = build_grids(X)
    _check_budget(grids, budget)
    test = critical_open if kind == "open" else critical_closed
    out = []
    for y in product(*grids.gamma_bar):
        ya = np.array(y)
        if test(X.coords, ya):
            out.append(ya)
    return np.array(out).reshape(-1, X.d)
