"""``onorm`` command line interface.

Exit codes: 0 success, 1 computation failure (including a failed
``reproduce`` check), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .ascent import AscentOptions, optimize, search_kn
from .bounds import bounds_report, reports_to_csv, reports_to_text
from .certify import A3, local_max_certificate
from .haar import GENERATOR_NAME, SamplerConfig, resolve_threads
from .hadamard import detect_rescaled, row_defect, sylvester
from .matrix import OrthogonalMatrix, equivalent, format_matrix, read_matrix
from .moments import (
    average_one_norm, monte_carlo_moment, mc_mean, second_moment_lower_bound,
    spherical_integral,
)


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: Optional[int]
    tool_version: str = field(default_factory=lambda: f"onorm {__version__}; numpy {np.__version__}")
    generator: str = GENERATOR_NAME
    duration: float = 0.0
    outputs: list = field(default_factory=list)


def _seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(64)


def _write_json(path: Optional[str], manifest: RunManifest, result: dict) -> str:
    if path:
        manifest.outputs.append(str(path))
    payload = {"manifest": asdict(manifest), "result": result}
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
    if path:
        Path(path).write_text(text + "\n")
    return text


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func",)}


# -- subcommands --------------------------------------------------------------


def cmd_optimize(args) -> int:
    seed = _seed(args)
    t0 = time.perf_counter()
    opts = AscentOptions(p=args.p, max_sweeps=args.max_sweeps, gain_tol=args.gain_tol,
                         restarts=args.restarts, sampler=SamplerConfig(seed, args.stream))
    if args.start:
        start = OrthogonalMatrix.from_array(read_matrix(args.start), tol=1e-9)
        res = optimize(start, opts)
    else:
        res = search_kn(args.n, opts, args.threads)
    cert = local_max_certificate(res.matrix)
    result = {
        "n": res.matrix.n,
        "p": args.p,
        "objective": res.objective,
        "sweeps": res.sweeps_used,
        "restart_index": res.restart_index,
        "converged": res.converged,
        "seed": seed,
        "matrix": format_matrix(res.matrix),
        "certificate": cert.to_dict(),
    }
    manifest = RunManifest("optimize", _params(args), seed, duration=time.perf_counter() - t0)
    text = _write_json(args.out, manifest, result)
    if not args.out:
        print(text)
    else:
        print(f"objective {res.objective:.12f}  verdict {cert.verdict.value}  sweeps {res.sweeps_used}")
    return 0


def cmd_certify(args) -> int:
    u = read_matrix(args.inp)
    cert = local_max_certificate(u)
    print(f"verdict: {cert.verdict.value}")
    print(f"symmetry residual: {cert.symmetry_residual:.3e}")
    if cert.eigenvalues:
        print("eigenvalues: " + ", ".join(f"{e:.12g}" for e in cert.eigenvalues))
    if cert.warning:
        print(f"warning: {cert.warning}")
    if args.out:
        _write_json(args.out, RunManifest("certify", _params(args), None), cert.to_dict())
    return 0


def cmd_bounds(args) -> int:
    seed = _seed(args)
    t0 = time.perf_counter()
    opts = AscentOptions(restarts=args.restarts, sampler=SamplerConfig(seed))
    reports = [bounds_report(n, args.empirical, opts, args.threads) for n in args.n]
    if args.format == "json":
        manifest = RunManifest("bounds", _params(args), seed, duration=time.perf_counter() - t0)
        text = _write_json(args.out, manifest, {"reports": [r.to_dict() for r in reports]})
    elif args.format == "csv":
        text = reports_to_csv(reports)
    else:
        text = reports_to_text(reports)
    if args.out and args.format != "json":
        Path(args.out).write_text(text)
    if not args.out:
        print(text, end="" if text.endswith("\n") else "\n")
    return 0


def cmd_moment(args) -> int:
    seed = _seed(args)
    t0 = time.perf_counter()
    est = monte_carlo_moment(args.n, args.k, args.samples, SamplerConfig(seed), args.threads)
    manifest = RunManifest("moment", _params(args), seed, duration=time.perf_counter() - t0)
    result = est.to_dict()
    if args.k == 1:
        result["exact"] = float(average_one_norm(args.n))
    elif args.k == 2 and args.n >= 2:
        result["lower_bound"] = second_moment_lower_bound(args.n)
    text = _write_json(args.out, manifest, result)
    print(text if not args.out else f"mean {est.mean:.10g} +- {est.std_error:.3g}  K_N >= {est.kn_lower_bound:.8f}")
    return 0


def cmd_spherical(args) -> int:
    try:
        ks = [int(x) for x in args.ks.split(",") if x.strip()]
    except ValueError:
        print(f"bad --ks value {args.ks!r}", file=sys.stderr)
        return 2
    val = spherical_integral(args.n, ks)
    print(val)
    print(f"{float(val):.17g}")
    return 0


def cmd_hadamard(args) -> int:
    k = int(round(math.log2(args.order))) if args.order >= 1 else -1
    if k < 0 or 2**k != args.order:
        print(f"--order must be a power of two, got {args.order}", file=sys.stderr)
        return 2
    text = format_matrix(sylvester(k).entries)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


def cmd_detect(args) -> int:
    u = read_matrix(args.inp)
    verdict = detect_rescaled(u, args.tol)
    print("true" if verdict else "false")
    for i, row in enumerate(u.entries):
        d, _ = row_defect(row / np.linalg.norm(row))
        print(f"row {i}: defect {d:.6e}")
    return 0


# -- reproduce ------------------------------------------------------------------


def run_reproduce(seed: int, restarts: int = 100, bound_restarts: int = 20, samples: int = 200_000,
                  threads: Optional[int] = None) -> dict:
    """Recompute the headline numbers; return a JSON-ready dict with per-check verdicts.

    Monte Carlo checks use a 4 standard error band here so that the exit
    code is stable under arbitrary seeds.
    """
    checks = []

    def check(name, passed, **detail):
        checks.append({"name": name, "passed": bool(passed), **detail})

    k3 = search_kn(3, AscentOptions(restarts=restarts, sampler=SamplerConfig(seed)), threads)
    check("K3 = 5", abs(k3.objective - 5) <= 1e-6 and equivalent(k3.matrix, A3),
          value=k3.objective, restart=k3.restart_index)

    cert = local_max_certificate(A3)
    ok = cert.verdict.value == "LocalMax" and np.allclose(cert.eigenvalues, [1, 2, 2], atol=1e-9)
    check("certificate of A: eigenvalues 1, 2, 2", ok, eigenvalues=list(cert.eigenvalues))

    reports = []
    for n in range(3, 9):
        r = bounds_report(n, True, AscentOptions(restarts=bound_restarts, sampler=SamplerConfig(seed, 1000 * n)),
                          threads)
        reports.append(r.to_dict())
        ok = r.spherical_exact <= r.empirical_best + 1e-6 <= r.cauchy_schwarz + 2e-6
        if n in (4, 8):
            ok = ok and abs(r.empirical_best - r.cauchy_schwarz) <= 1e-6
        if n in (3, 6):
            ok = ok and r.empirical_best < r.improved_threshold
        check(f"bounds ordering n={n}", ok, empirical_best=r.empirical_best)

    for n, ks in [(2, [1]), (3, [1]), (2, [1, 1]), (4, [1, 1, 2]), (5, [3])]:
        exact = float(spherical_integral(n, ks))
        cols = list(range(len(ks)))
        kv = np.array(ks)
        mean, se = mc_mean(lambda x: np.prod(np.abs(x[:, cols]) ** kv, axis=1), n, samples,
                           SamplerConfig(seed, 10_000 + 10 * n + len(ks)), threads, domain="sphere")
        check(f"spherical n={n} ks={ks}", abs(mean - exact) <= 4 * se, exact=exact, mc=mean, se=se)

    est = monte_carlo_moment(3, 2, samples, SamplerConfig(seed, 20_000), threads)
    lb = second_moment_lower_bound(3)
    check("I2 >= lower bound at n=3", est.mean >= lb - 4 * est.std_error, mc=est.mean, se=est.std_error,
          lower_bound=lb)

    ratio = float(average_one_norm(100)) / 1000.0
    check("average 1-norm ratio at n=100 near sqrt(2/pi)", 0.790 <= ratio <= 0.805, ratio=ratio,
          constant=math.sqrt(2 / math.pi))

    return {
        "seed": seed,
        "k3": k3.objective,
        "a_eigenvalues": list(cert.eigenvalues),
        "sqrt_2_over_pi": math.sqrt(2 / math.pi),
        "bounds": reports,
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
    }


def reproduce_summary(result: dict) -> str:
    lines = [
        f"K3 = {result['k3']:.6f}",
        "eigenvalues of S A^t: " + ", ".join(f"{e:.6g}" for e in result["a_eigenvalues"]),
        f"spherical row constant sqrt(2/pi) = {result['sqrt_2_over_pi']:.6f}",
        "",
        f"{'N':>3} {'N*sqrt(N)':>11} {'threshold':>11} {'elementary':>11} {'spherical':>11} {'0.797 N^1.5':>11} {'empirical':>11}",
    ]
    for r in result["bounds"]:
        lines.append(f"{r['n']:>3} {r['cauchy_schwarz']:>11.6f} {r['improved_threshold']:>11.6f} "
                     f"{r['elementary']:>11.6f} {r['spherical_exact']:>11.6f} "
                     f"{r['spherical_asymptotic']:>11.6f} {r['empirical_best']:>11.6f}")
    lines.append("")
    for c in result["checks"]:
        lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}")
    return "\n".join(lines) + "\n"


def cmd_reproduce(args) -> int:
    seed = _seed(args)
    t0 = time.perf_counter()
    result = run_reproduce(seed, args.restarts, args.bound_restarts, args.samples, args.threads)
    manifest = RunManifest("reproduce", _params(args), seed, duration=time.perf_counter() - t0)
    _write_json(args.out, manifest, result)
    print(reproduce_summary(result), end="")
    failed = [c["name"] for c in result["checks"] if not c["passed"]]
    if failed:
        print(f"first failing check: {failed[0]}", file=sys.stderr)
        return 1
    return 0


# -- parser -----------------------------------------------------------------------


def _csv_ints(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part.strip():
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onorm", description="Extremal entrywise norms on O(N).")
    parser.add_argument("--version", action="version", version=f"onorm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        if seed:
            p.add_argument("--seed", type=int, default=None, help="64-bit seed (random if omitted, always recorded)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: $ONORM_THREADS or CPU count)")

    p = sub.add_parser("optimize", help="local maximization of the p-norm by Givens sweeps")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--streams", "--stream", dest="stream", type=int, default=0, help="first sampler stream id")
    p.add_argument("--max-sweeps", type=int, default=None)
    p.add_argument("--gain-tol", type=float, default=1e-12)
    p.add_argument("--start", default=None, help="starting matrix file (text format)")
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("certify", help="critical point and local maximum certificate")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("bounds", help="bounds on K_N")
    p.add_argument("--n", type=_csv_ints, required=True, help="N, a list 3,4,5 or a range 3-8")
    p.add_argument("--empirical", action="store_true")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("moment", help="Monte Carlo moment of the 1-norm")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("spherical", help="exact spherical integral E|x_1^k_1 ... x_p^k_p|")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ks", required=True, help="comma separated exponents, e.g. 1,1,2")
    p.set_defaults(func=cmd_spherical)

    p = sub.add_parser("hadamard", help="Sylvester Hadamard matrix")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_hadamard)

    p = sub.add_parser("detect", help="is the matrix a rescaled Hadamard matrix?")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("reproduce", help="recompute the headline numbers and checks")
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--bound-restarts", type=int, default=20)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is not None:
        args.threads = resolve_threads(args.threads)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"onorm {args.command}: {exc}", file=sys.stderr)
        return 1


cmd_dispatch = main


if __name__ == "__main__":
    sys.exit(main())
