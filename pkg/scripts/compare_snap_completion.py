"""TA_improved with and without the snap-up completion pass: quality and time."""

import argparse
import sys
import time

import numpy as np

from stardisc.experiment import best_of_k_estimate, trial_seed
from stardisc.pointset import generate_faure, generate_halton, generate_sobol
from stardisc.solvers import TAParams, run_trial

INSTANCES = {
    "halton-5-50": lambda: generate_halton(50, 5),
    "faure-10-50": lambda: generate_faure(50, 10, skip_origin=True),
    "sobol-20-128": lambda: generate_sobol(128, 20),
}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=3)
    a = p.parse_args(argv)
    for name, make in INSTANCES.items():
        X = make()
        for complete in (True, False):
            t0 = time.perf_counter()
            vals = [run_trial(X, TAParams(a.iterations, seed=trial_seed(a.seed, t), snap_completion=complete)).value
                    for t in range(a.trials)]
            dt = (time.perf_counter() - t0) / a.trials
            print(f"{name:14s} completion={complete!s:5s} best-of-10 {best_of_k_estimate(vals, min(10, a.trials)):.4f}"
                  f"  max {np.max(vals):.4f}  {dt:.2f}s/trial", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
