"""Sweep K_{2r-1}(k[x]/x^e, (x)) over a parameter grid and print one line per point.

Each point is computed by the length formula, the enumeration oracle (when
|k|^{re} fits under the cap) and the graded factors; the script stops on the
first disagreement.

    python scripts/perfectoid_sweep.py --p 2 --field GF(4) --max-re 8
"""

import argparse

from wittk import kgroups
from wittk.cli import parse_field


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--field", default="GF(2)")
    ap.add_argument("--max-re", type=int, default=8)
    args = ap.parse_args()
    k = parse_field(args.field)
    for e in range(1, args.max_re + 1):
        for r in range(1, args.max_re // e + 1):
            odd, even = kgroups.k_perfectoid(args.p, e, r, k)
            routes = ",".join(odd.provenance)
            note = f"  [{'; '.join(odd.notes)}]" if odd.notes else ""
            print(f"e={e} r={r}  K_{2 * r - 1} = {odd.torsion}  K_{2 * r} = {even.torsion}  ({routes}){note}")


if __name__ == "__main__":
    main()
