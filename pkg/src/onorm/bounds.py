"""Bounds on K_N, the supremum of the 1-norm over O(N), side by side with an
empirical lower bound from the optimizer."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Optional

from .ascent import AscentOptions, search_kn
from .moments import asymptotic_average, average_one_norm

CSV_COLUMNS = (
    "n", "cauchy_schwarz", "improved_threshold", "elementary", "elementary_refined",
    "spherical_exact", "spherical_asymptotic", "empirical_best", "threshold_needs_even_n",
)

HC_NOTE = (
    "cauchy_schwarz: K_N = N*sqrt(N) holds iff a Hadamard matrix of order N exists. "
    "improved_threshold: for even N, K_N >= N*sqrt(N) - 1/(N*sqrt(N)) already forces a Hadamard "
    "matrix of order N; printed for odd N as well, where that implication is not established. "
    "elementary, elementary_refined: lower bounds valid if the Hadamard conjecture holds. "
    "spherical_exact, spherical_asymptotic: unconditional (Haar average of the 1-norm; "
    "asymptotic constant sqrt(2/pi) = 0.797..). "
    "empirical_best: best local maximum found numerically, a lower bound on K_N, not its value."
)


@dataclass(frozen=True)
class BoundsReport:
    n: int
    cauchy_schwarz: float
    improved_threshold: float
    elementary: float
    elementary_refined: Optional[float]
    spherical_exact: float
    spherical_asymptotic: float
    empirical_best: Optional[float] = None
    threshold_needs_even_n: bool = False
    hc_note: str = HC_NOTE

    def to_dict(self) -> dict:
        return asdict(self)

    def to_row(self) -> dict:
        d = self.to_dict()
        return {c: d[c] for c in CSV_COLUMNS}


def bound_cauchy_schwarz(n: int) -> float:
    return n * math.sqrt(n)


def bound_improved_threshold(n: int) -> float:
    return n * math.sqrt(n) - 1.0 / (n * math.sqrt(n))


def bound_elementary(n: int) -> tuple[float, Optional[float]]:
    """``(N - 4.5) sqrt(N)`` and, for ``N >= 4``, ``(N - 3) sqrt(N - 3) + 5``.

    The first is negative (vacuous) for ``N < 5``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    basic = (n - 4.5) * math.sqrt(n)
    refined = (n - 3) * math.sqrt(n - 3) + 5 if n >= 4 else None
    return basic, refined


def bounds_report(n: int, with_empirical: bool = False, opts: AscentOptions = AscentOptions(restarts=20),
                  threads: Optional[int] = None) -> BoundsReport:
    if n < 2:
        raise ValueError("bounds_report needs n >= 2")
    basic, refined = bound_elementary(n)
    empirical = search_kn(n, opts, threads).objective if with_empirical else None
    return BoundsReport(
        n=n,
        cauchy_schwarz=bound_cauchy_schwarz(n),
        improved_threshold=bound_improved_threshold(n),
        elementary=basic,
        elementary_refined=refined,
        spherical_exact=float(average_one_norm(n)),
        spherical_asymptotic=asymptotic_average(n),
        empirical_best=empirical,
        threshold_needs_even_n=n % 2 == 1,
    )


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow({k: ("" if v is None else v) for k, v in r.to_row().items()})
    return buf.getvalue()


def reports_to_text(reports) -> str:
    lines = []
    for r in reports:
        lines.append(f"N = {r.n}")
        lines.append(f"  Cauchy-Schwarz          K_N <= {r.cauchy_schwarz:.6f}")
        caveat = "  (N odd: not known to imply HC)" if r.threshold_needs_even_n else ""
        lines.append(f"  improved threshold      {r.improved_threshold:.6f}{caveat}")
        lines.append(f"  elementary (HC)         K_N >= {r.elementary:.6f}" + ("  (vacuous)" if r.elementary <= 0 else ""))
        if r.elementary_refined is not None:
            lines.append(f"  elementary refined (HC) K_N >= {r.elementary_refined:.6f}")
        lines.append(f"  spherical average       K_N >= {r.spherical_exact:.6f}")
        lines.append(f"  sqrt(2/pi) N sqrt(N)          {r.spherical_asymptotic:.6f}")
        if r.empirical_best is not None:
            lines.append(f"  empirical best          K_N >= {r.empirical_best:.6f}")
    return "\n".join(lines) + "\n"
