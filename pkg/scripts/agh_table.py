"""Print the (ni)!(i!)^{n-2} / rank table next to its per-prime decomposition.

    python scripts/agh_table.py --n-max 6 --i-max 6
"""

import argparse

from wittk import kgroups


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-max", type=int, default=6)
    ap.add_argument("--i-max", type=int, default=6)
    args = ap.parse_args()
    for n in range(1, args.n_max + 1):
        for i in range(0, args.i_max + 1):
            res = kgroups.integral_agh(n, i)
            assert res.order == kgroups.agh_order(n, i)
            parts = " * ".join(f"{p}^{v}" for p, v in sorted(res.valuations.items())) or "1"
            print(f"n={n} i={i}  |K_{2 * i}| = {res.order} = {parts}  rank K_{2 * i + 1} = {res.rank}")


if __name__ == "__main__":
    main()
