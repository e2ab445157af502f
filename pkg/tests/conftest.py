import itertools

import numpy as np
import pytest
from hypothesis import settings

from stardisc.pointset import PointSet

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line for an acceptance criterion."""

    def record(criterion: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def random_pointset(rng, n, d, grid=None):
    """Uniform points; with ``grid`` the coordinates are multiples of 1/grid (forces ties)."""
    if grid:
        return PointSet(rng.integers(0, grid, size=(n, d)) / grid)
    return PointSet(rng.random((n, d)))


def brute_force(X: PointSet):
    """Max delta over Gamma_bar and max delta_bar over Gamma, straight from the definitions.

    Counts use numpy broadcasting; no package kernels are involved.
    """
    c = X.coords
    gam = [np.unique(c[:, j]) for j in range(X.d)]
    bars = [np.append(g, 1.0) for g in gam]
    best_d = best_db = -np.inf
    for y in itertools.product(*bars):
        y = np.array(y)
        best_d = max(best_d, _vol(y) - np.count_nonzero(np.all(c < y, axis=1)) / X.n)
    for y in itertools.product(*gam):
        y = np.array(y)
        best_db = max(best_db, np.count_nonzero(np.all(c <= y, axis=1)) / X.n - _vol(y))
    return best_d, best_db


def _vol(y):
    v = 1.0
    for t in y:
        v *= t
    return v
