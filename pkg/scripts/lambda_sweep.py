"""Residue family x dy - λ y dx over F_p, λ = 1..p-1, each lifted to level n in two ways.

For every λ the pair (a, b) is checked fiber-closed for both S-structures
(λ and λ + p), and the difference class is classified as zero, exact or
inconclusive. Prints one row per λ; parallel over λ with FOLCRIS_THREADS.

    python3 scripts/lambda_sweep.py --p 11 --n 2 --dim 4
"""

import argparse
import time

from folcris._parallel import pmap
from folcris.cli import run_problem
from folcris.gallery import residue_family


def one(args, lam):
    t = time.perf_counter()
    report, code = run_problem(residue_family(lam, args.p, args.n, args.dim == 4), recheck=args.recheck)
    res = report["result"]
    closed = all(r["fiber_closed"] for r in res["residues"])
    diff = res["differences"][0]
    rechecked = all(c["holds"] for c in report.get("recheck", [])) if args.recheck else None
    return lam, code, closed, diff["status"], diff["primitive"], rechecked, time.perf_counter() - t


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=int, default=11)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--dim", type=int, choices=(2, 4), default=4)
    ap.add_argument("--recheck", action="store_true")
    args = ap.parse_args()
    print(f"{'lambda':>6} {'exit':>4} {'closed':>6} {'difference':>12} {'secs':>6}  primitive")
    for lam, code, closed, status, prim, rechecked, secs in pmap(lambda l: one(args, l), range(1, args.p)):
        mark = "" if rechecked in (None, True) else "  RECHECK FAILED"
        print(f"{lam:>6} {code:>4} {str(closed):>6} {status:>12} {secs:6.2f}  {prim}{mark}")


if __name__ == "__main__":
    main()
