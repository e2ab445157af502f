"""Write Joe-Kuo direction numbers (new-joe-kuo-6.21201) in their native text format.

SciPy ships the same table as an npz (primitive polynomials as bit patterns
plus initial direction numbers). This script converts it back to the
``d s a m_1 .. m_s`` layout read by ``stardisc.pointset.parse_sobol_directions``.

    python scripts/export_joe_kuo.py --dims 1000 --out src/stardisc/data/new-joe-kuo-6.1000.txt
"""

import argparse
import os

import numpy as np
import scipy.stats._qmc as qmc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, default=1000, help="highest dimension to export")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    data = np.load(os.path.join(os.path.dirname(qmc.__file__), "_sobol_direction_numbers.npz"))
    poly, vinit = data["poly"], data["vinit"]
    lines = ["d       s       a       m_i"]
    # row 0 of the npz is dimension 1 (van der Corput), which the text format omits
    for dim in range(2, args.dims + 1):
        p = int(poly[dim - 1])
        s = p.bit_length() - 1
        a = (p >> 1) & ((1 << (s - 1)) - 1) if s > 1 else 0
        m = [int(v) for v in vinit[dim - 1, :s]]
        lines.append(" ".join(str(v) for v in [dim, s, a, *m]))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
