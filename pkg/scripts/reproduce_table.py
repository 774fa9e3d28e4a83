"""Bounds table for N = 2..12 with empirical maxima, written as CSV.

    python3 scripts/reproduce_table.py --seed 1 --restarts 40 --out table.csv
"""
import argparse
import sys
import time

from onorm.ascent import AscentOptions
from onorm.bounds import bounds_report, reports_to_csv, reports_to_text
from onorm.haar import SamplerConfig


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--restarts", type=int, default=40)
    ap.add_argument("--max-n", type=int, default=12)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    reports = []
    for n in range(2, args.max_n + 1):
        t0 = time.perf_counter()
        opts = AscentOptions(restarts=args.restarts, sampler=SamplerConfig(args.seed, 1000 * n))
        reports.append(bounds_report(n, True, opts, args.threads))
        print(f"n={n:>2} done in {time.perf_counter() - t0:.1f} s", file=sys.stderr)

    print(reports_to_text(reports))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(reports_to_csv(reports))


if __name__ == "__main__":
    main()
