"""Command-line front end.

    stardisc generate --family halton --n 50 --d 5 --out halton.txt
    stardisc exact halton.txt
    stardisc estimate halton.txt --algo ta-improved --iterations 100000 --trials 100 --seed 1
    stardisc theory selftest

Exit codes: 0 success, 1 invalid input, 2 budget refusal.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pointset as ps
from .exact import DEFAULT_BUDGET, BudgetExceededError, exact_star_discrepancy
from .experiment import ALGORITHMS, run_experiment
from .solvers import MC_RULES

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input, not argparse's default status 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _reference(text: str) -> float | str:
    if text == "exact":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("reference must be a number or 'exact'") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stardisc", description="Star discrepancy: exact values and lower bounds.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a point set")
    g.add_argument("--family", required=True, choices=("glp", "halton", "faure", "sobol"))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, help="dimension (glp: defaults to the vector length)")
    g.add_argument("--vector", type=_int_list, help="glp generating vector h1,h2,..")
    g.add_argument("--start", type=int, default=None,
                   help="first sequence index (halton: 1, faure: 1 drops the origin, sobol: 0)")
    g.add_argument("--directions", help="Joe-Kuo direction file (sobol; default: bundled table)")
    g.add_argument("--out", required=True)

    e = sub.add_parser("exact", help="exact star discrepancy")
    e.add_argument("file")
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max grid nodes")

    s = sub.add_parser("estimate", help="lower bounds from repeated heuristic trials")
    s.add_argument("file")
    s.add_argument("--algo", required=True, choices=sorted(ALGORITHMS))
    s.add_argument("--iterations", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--reference", type=_reference, help="hit target value, or 'exact'")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="grid budget for --reference exact")
    s.add_argument("--csv", help="per-trial CSV output")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--mc-rule", choices=MC_RULES, default="literal",
                   help="ta-improved coordinate schedule")

    t = sub.add_parser("theory", help="analysis checks")
    tsub = t.add_subparsers(dest="action", required=True, parser_class=_Parser)
    st = tsub.add_parser("selftest", help="closed forms against Monte Carlo")
    st.add_argument("--samples", type=int, default=1_000_000)
    st.add_argument("--seed", type=int, default=0)
    return p


def _generate(a) -> ps.PointSet:
    if a.n < 1:
        raise ValueError("--n must be >= 1")
    if a.family == "glp":
        if not a.vector:
            raise ValueError("glp needs --vector")
        if a.d is not None and a.d != len(a.vector):
            raise ValueError("--d disagrees with the length of --vector")
        return ps.generate_glp(a.n, a.vector)
    if a.d is None or a.d < 1:
        raise ValueError("--d must be >= 1")
    if a.family == "halton":
        return ps.generate_halton(a.n, a.d, start_index=1 if a.start is None else a.start)
    if a.family == "faure":
        start = 1 if a.start is None else a.start
        if start not in (0, 1):
            raise ValueError("faure supports --start 0 or 1")
        return ps.generate_faure(a.n, a.d, skip_origin=start == 1)
    table = ps.load_sobol_directions(a.directions)
    return ps.generate_sobol(a.n, a.d, table, skip=0 if a.start is None else a.start)


def _cmd_generate(a) -> int:
    X = _generate(a)
    ps.write_pointset(X, a.out, comment=f"{a.family} n={X.n} d={X.d}")
    print(f"wrote {X.n} points in dimension {X.d} to {a.out}")
    return EXIT_OK


def _cmd_exact(a) -> int:
    X = ps.read_pointset(a.file)
    try:
        r = exact_star_discrepancy(X, a.budget)
    except BudgetExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    print(f"value {r.value:.17g}")
    print(f"side {r.side}")
    print("witness " + " ".join(f"{c:.17g}" for c in r.witness))
    return EXIT_OK


def _cmd_estimate(a) -> int:
    if a.trials < 1 or a.iterations < 0 or a.workers < 1:
        raise ValueError("need --trials >= 1, --iterations >= 0, --workers >= 1")
    X = ps.read_pointset(a.file)
    rep = run_experiment(X, a.algo, a.trials, a.iterations, a.seed, reference=a.reference,
                         label=Path(a.file).stem, workers=a.workers, budget=a.budget,
                         mc_rule=a.mc_rule)
    print(f"instance {rep.instance}  algo {rep.algorithm}  trials {rep.trials}  iterations {rep.iterations}")
    print(f"best-of-{min(10, rep.trials)} {rep.best_of_10:.6f}  mean {rep.mean:.6f}  max {max(rep.values):.6f}")
    if rep.hits is not None:
        print(f"hits {rep.hits}/{rep.trials} (reference {rep.reference:.10g})")
    elif a.reference == "exact":
        print("hits unavailable: exact reference over budget")
    print(f"seconds/trial {sum(rep.seconds) / rep.trials:.3f}")
    if a.csv:
        Path(a.csv).write_text(rep.to_csv(), encoding="utf-8")
    return EXIT_OK


def _cmd_theory(a) -> int:
    from .theory import selftest

    if a.samples < 1000:
        raise ValueError("--samples must be >= 1000")
    results = selftest(a.samples, a.seed)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} passed")
    return EXIT_OK if failed == 0 else EXIT_INVALID


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cmd = {"generate": _cmd_generate, "exact": _cmd_exact,
           "estimate": _cmd_estimate, "theory": _cmd_theory}[args.command]
    try:
        return cmd(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
