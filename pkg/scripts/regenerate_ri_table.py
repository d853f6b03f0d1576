#!/usr/bin/env python3
"""Offline regeneration of the incomplete-matrix random-index table.

Sweeps the (matrix size, missing count) grid at full fidelity (one million
samples per cell by default) and prints a tab-separated table next to the
published values. This is deliberately not part of the test suite: a full
sweep takes hours on one machine. For a quick sanity pass use --samples 1e4.

    python3 scripts/regenerate_ri_table.py --samples 1000000 --seed 0
    python3 scripts/regenerate_ri_table.py --n 5 --samples 100000
"""

import argparse
import sys
import time

from pcmkit.inconsistency import RI_INCOMPLETE, simulate_ri


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--samples", type=float, default=1_000_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n", type=int, default=None,
                        help="restrict to one matrix size (default: 4..7 grid)")
    args = parser.parse_args()
    samples = int(args.samples)

    sizes = [args.n] if args.n else [4, 5, 6, 7]
    print("n\tm\tmean\tstdev\tpublished\tdelta\tseconds")
    for n in sizes:
        max_m = (n - 1) * (n - 2) // 2
        for m in range(0, max_m + 1):
            started = time.perf_counter()
            mean, stdev = simulate_ri(n, m, samples, seed=args.seed)
            elapsed = time.perf_counter() - started
            published = RI_INCOMPLETE.get((n, m), (None, None))[0]
            delta = "" if published is None else f"{mean - published:+.4f}"
            pub = "" if published is None else f"{published:.3f}"
            print(f"{n}\t{m}\t{mean:.6f}\t{stdev:.6f}\t{pub}\t{delta}\t{elapsed:.1f}",
                  flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
