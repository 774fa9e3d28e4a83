"""Equivalence classes of converged 3x3 local maxima.

Runs many random restarts and groups the converged matrices by canonical
form. Prints each class with its size, objective and certificate spectrum.
Whether A's class is the only local maximum class in O(3) is not settled
by this; the script only reports what random restarts find.
"""
import argparse

import numpy as np

from onorm.ascent import AscentOptions, cluster_by_class, search_kn
from onorm.certify import A3, local_max_certificate
from onorm.haar import SamplerConfig
from onorm.matrix import equivalent, one_norm


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--restarts", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args(argv)

    _, results = search_kn(args.n, AscentOptions(restarts=args.restarts, sampler=SamplerConfig(args.seed)),
                           args.threads, return_all=True)
    unconverged = sum(not r.converged for r in results)
    clusters = cluster_by_class([r for r in results if r.converged])
    print(f"n = {args.n}: {len(results)} restarts, {unconverged} unconverged, {len(clusters)} classes")
    for canon, members in clusters:
        cert = local_max_certificate(canon)
        eig = ", ".join(f"{e:.6f}" for e in cert.eigenvalues)
        tag = "  (class of A)" if args.n == 3 and equivalent(canon, A3) else ""
        print(f"  size {len(members):>5}  norm {one_norm(canon):.9f}  {cert.verdict.value}  eig [{eig}]{tag}")
        print("    " + np.array2string(canon.entries, precision=6, suppress_small=True).replace("\n", "\n    "))


if __name__ == "__main__":
    main()
