"""Repeated-trial experiments: seed derivation, best-of-k estimate, hit counts, CSV."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exact import DEFAULT_BUDGET, BudgetExceededError, exact_star_discrepancy
from .pointset import PointSet
from .solvers import TAParams, TrialResult, run_trial

# CLI tag -> solver variant
ALGORITHMS = {"wf": "wf", "ta-basic": "basic", "ta-improved": "improved"}
HIT_TOL = 1e-9
CSV_COLUMNS = ("instance", "algo", "seed", "trial", "iterations", "value", "witness")


def trial_seed(master: int, trial: int) -> int:
    """64-bit seed of trial ``trial``: first word of SeedSequence([master, trial]).

    Each trial depends only on its own index, so adding trials never changes
    earlier ones.
    """
    return int(np.random.SeedSequence([int(master), int(trial)]).generate_state(1, np.uint64)[0])


def trial_rng(master: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed(master, trial)))


def best_of_k_estimate(values: Sequence[float], k: int = 10) -> float:
    """Expected maximum of a uniformly random k-subset of ``values`` (no replacement).

    With v sorted ascending: sum_{i=k}^{m} v_(i) C(i-1, k-1) / C(m, k).
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    m = len(v)
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    total = math.comb(m, k)
    w = np.array([math.comb(i - 1, k - 1) / total for i in range(k, m + 1)])
    return float(np.dot(w, v[k - 1:]))


@dataclass(frozen=True)
class ExperimentReport:
    instance: str
    algorithm: str
    seed: int
    trials: int
    iterations: int
    values: tuple[float, ...]
    witnesses: tuple[np.ndarray, ...]
    best_of_10: float  # best-of-min(10, trials)
    seconds: tuple[float, ...]
    reference: float | None = None
    hits: int | None = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t, (v, x) in enumerate(zip(self.values, self.witnesses)):
            w.writerow([self.instance, self.algorithm, self.seed, t, self.iterations,
                        f"{v:.17g}", ";".join(f"{c:.17g}" for c in x)])
        return buf.getvalue()


def count_hits(values: Sequence[float], reference: float, tol: float = HIT_TOL) -> int:
    return int(sum(abs(v - reference) <= tol for v in values))


def exact_reference(X: PointSet, budget: int = DEFAULT_BUDGET) -> float | None:
    """Exact value, or None when the grid exceeds ``budget``."""
    try:
        return exact_star_discrepancy(X, budget).value
    except BudgetExceededError:
        return None


def run_experiment(X: PointSet, algorithm: str, trials: int, iterations: int, seed: int,
                   reference: float | str | None = None, label: str = "", workers: int = 1,
                   budget: int = DEFAULT_BUDGET, mc_rule: str = "literal") -> ExperimentReport:
    """Run ``trials`` independent trials; ``reference="exact"`` asks the exact solver for the hit target.

    A refused exact reference (grid over budget) leaves ``hits`` as None.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {sorted(ALGORITHMS)}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    variant = ALGORITHMS[algorithm]

    def one(t: int) -> tuple[TrialResult, float]:
        s = trial_seed(seed, t)
        params = TAParams(iterations=iterations, variant=variant, seed=s, mc_rule=mc_rule)
        t0 = time.perf_counter()
        res = run_trial(X, params)
        return res, time.perf_counter() - t0

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, range(trials)))
    else:
        out = [one(t) for t in range(trials)]

    values = tuple(r.value for r, _ in out)
    ref = exact_reference(X, budget) if reference == "exact" else reference
    hits = count_hits(values, ref) if ref is not None else None
    return ExperimentReport(
        instance=label, algorithm=algorithm, seed=int(seed), trials=trials, iterations=iterations,
        values=values, witnesses=tuple(r.witness for r, _ in out),
        best_of_10=best_of_k_estimate(values, min(10, trials)),
        seconds=tuple(s for _, s in out), reference=ref, hits=hits,
    )
