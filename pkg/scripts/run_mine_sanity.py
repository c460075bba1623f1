#!/usr/bin/env python3
"""Run the MINE estimator sanity suite on correlated Gaussians with known MI.

Usage: python scripts/run_mine_sanity.py [--n 2000] [--workers 4]
"""

import argparse
import os
import time

from geotax.mine.estimator import sanity_suite


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--workers", type=int, default=min(8, os.cpu_count() or 1))
    ap.add_argument("--seeds", type=str, default="320,420,520,620,720")
    args = ap.parse_args()
    seeds = tuple(int(s) for s in args.seeds.split(","))

    t0 = time.time()
    cases = sanity_suite(n=args.n, seeds=seeds, workers=args.workers)
    print(f"{'rho':>5} {'true MI':>9} {'estimate':>9} {'std':>7} {'tol':>6}  verdict")
    for c in cases:
        verdict = "PASS" if c.passed else "FAIL"
        print(f"{c.rho:5.1f} {c.true_mi:9.4f} {c.estimate:9.4f} "
              f"{c.std:7.4f} {c.tolerance:6.3f}  {verdict}")
    print(f"\nall passed: {all(c.passed for c in cases)}  "
          f"({time.time() - t0:.1f}s, {args.workers} workers)")


if __name__ == "__main__":
    main()
