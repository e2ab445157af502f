"""Compare the two coordinate-count schedules of TA_improved on one instance.

"literal" keeps mc = 2 until the final iteration; "prose" grows mc linearly to d.
"""

import argparse
import sys

from stardisc.experiment import run_experiment
from stardisc.pointset import generate_faure, generate_sobol


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--family", choices=("sobol", "faure"), default="sobol")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--d", type=int, default=20)
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=7)
    a = p.parse_args(argv)
    X = generate_sobol(a.n, a.d) if a.family == "sobol" else generate_faure(a.n, a.d)
    for rule in ("literal", "prose"):
        rep = run_experiment(X, "ta-improved", a.trials, a.iterations, a.seed, mc_rule=rule)
        print(f"{rule:8s} best-of-10 {rep.best_of_10:.4f}  mean {rep.mean:.4f}  max {max(rep.values):.4f}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
