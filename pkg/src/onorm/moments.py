"""Exact spherical integrals, Haar averages of the 1-norm, and Monte Carlo
estimates of its moments.

Double factorial convention
---------------------------
Everything in this module uses the *shifted* double factorial

    m!! = (m - 1)(m - 3)(m - 5) ...

ending at 2 when m is odd and at 1 when m is even, so ``5!! = 8`` and
``4!! = 3``. This is the standard double factorial of ``m - 1``. Only the
shifted convention is exposed, through :func:`double_factorial`.

With it, for ``x`` uniform on the unit sphere of R^N and exponents
``k_1, ..., k_p`` (``p <= N``),

    E|x_1^k_1 ... x_p^k_p| = (2/pi)^Sigma (N-1)!! k_1!! ... k_p!! / (N + sum k - 1)!!

where ``odds`` counts the odd exponents and ``Sigma = odds // 2`` for odd N,
``(odds + 1) // 2`` for even N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .haar import SamplerConfig, ordered_map, sample_haar_batch, sample_sphere_batch

SHARD_SIZE = 50_000
MAX_TERM_ORDER = 4
TWO_OVER_PI = 2.0 / math.pi


def double_factorial(m: int) -> int:
    """Shifted double factorial ``(m-1)(m-3)...``; empty product is 1."""
    if m < 0:
        raise ValueError("double_factorial needs m >= 0")
    return math.prod(range(m - 1, 0, -2))


@dataclass(frozen=True)
class ExponentVector:
    n: int
    ks: tuple

    def __post_init__(self):
        ks = tuple(int(k) for k in self.ks)
        if not ks:
            raise ValueError("exponent list must be nonempty")
        if any(k < 0 for k in ks):
            raise ValueError("exponents must be nonnegative")
        if self.n < 1 or len(ks) > self.n:
            raise ValueError(f"need 1 <= len(ks) <= n, got {len(ks)} exponents for n = {self.n}")
        object.__setattr__(self, "ks", ks)

    @property
    def odds(self) -> int:
        return sum(k % 2 for k in self.ks)


@dataclass(frozen=True)
class ExactValue:
    """``rational * (2/pi)**pi_exponent``."""

    rational: Fraction
    pi_exponent: int = 0

    def __float__(self) -> float:
        return float(self.rational) * TWO_OVER_PI**self.pi_exponent

    def __mul__(self, other):
        if isinstance(other, ExactValue):
            return ExactValue(self.rational * other.rational, self.pi_exponent + other.pi_exponent)
        if isinstance(other, (int, Fraction)):
            return ExactValue(self.rational * other, self.pi_exponent)
        return NotImplemented

    __rmul__ = __mul__

    def __str__(self) -> str:
        if self.pi_exponent == 0:
            return str(self.rational)
        return f"{self.rational} * (2/pi)^{self.pi_exponent}"


def sigma_exponent(n: int, ks: Sequence[int]) -> int:
    """Power of 2/pi in the spherical integral, by the parity rule.

    The compact form ``(n + odds + 1) // 2 - (n + 1) // 2`` is evaluated too
    and must agree.
    """
    v = ExponentVector(n, tuple(ks))
    sigma = v.odds // 2 if n % 2 else (v.odds + 1) // 2
    compact = sigma_compact(n, v.odds)
    if sigma != compact:
        raise AssertionError(f"parity rule {sigma} != compact form {compact} at n={n}, odds={v.odds}")
    return sigma


def sigma_compact(n: int, odds: int) -> int:
    return (n + odds + 1) // 2 - (n + 1) // 2


def spherical_integral(n: int, ks: Sequence[int]) -> ExactValue:
    """Exact ``E|x_1^k_1 ... x_p^k_p|`` for ``x`` uniform on S^(n-1)."""
    v = ExponentVector(n, tuple(ks))
    num = double_factorial(n - 1) * math.prod(double_factorial(k) for k in v.ks)
    den = double_factorial(n + sum(v.ks) - 1)
    return ExactValue(Fraction(num, den), sigma_exponent(n, v.ks))


def average_one_norm(n: int) -> ExactValue:
    """Haar average of the 1-norm on O(n): ``n^2 E|x_1|`` on S^(n-1)."""
    if n < 1:
        raise ValueError("n must be positive")
    return n * n * spherical_integral(n, [1])


def asymptotic_average(n: int) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    return math.sqrt(TWO_OVER_PI) * n * math.sqrt(n)


def weingarten_11_22(n: int) -> Fraction:
    """Haar integral of ``U_11^2 U_22^2`` over O(n)."""
    if n < 2:
        raise ValueError("weingarten_11_22 needs n >= 2")
    return Fraction(n + 1, (n - 1) * n * (n + 2))


def second_moment_lower_bound(n: int) -> float:
    """Lower bound for E||U||_1^2 from the diagonal, same-row and generic terms.

    The same-row and repeated-entry terms are exact sphere integrals; the
    generic term ``|U_11 U_22|`` is bounded below by ``U_11^2 U_22^2``.
    """
    if n < 2:
        raise ValueError("second_moment_lower_bound needs n >= 2")
    same_entry = float(spherical_integral(n, [2]))
    same_row = float(spherical_integral(n, [1, 1]))
    return n * n * same_entry + 2 * n * n * (n - 1) * same_row + n * n * (n - 1) ** 2 * float(weingarten_11_22(n))


# -- Monte Carlo --------------------------------------------------------------


@dataclass(frozen=True)
class MomentEstimate:
    n: int
    k: int
    mean: float
    std_error: float
    samples: int
    seed: int
    kn_lower_bound: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class _Partial:
    count: int
    mean: float
    m2: float

    @classmethod
    def of(cls, x: np.ndarray) -> "_Partial":
        mean = float(x.mean())
        return cls(len(x), mean, float(((x - mean) ** 2).sum()))

    def merge(self, other: "_Partial") -> "_Partial":
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return _Partial(count, mean, m2)


def _shards(samples: int) -> list[tuple[int, int]]:
    return [(s, min(SHARD_SIZE, samples - s * SHARD_SIZE)) for s in range(-(-samples // SHARD_SIZE))]


def mc_mean(statistic: Callable[[np.ndarray], np.ndarray], n: int, samples: int, cfg: SamplerConfig,
            threads: Optional[int] = None, domain: str = "haar") -> tuple[float, float]:
    """Mean and standard error of ``statistic`` over Haar (or sphere) samples.

    Samples are drawn in shards of ``SHARD_SIZE``; shard ``s`` uses stream
    ``cfg.stream(s)``. Shard statistics are merged in shard order, so the
    result is the same for any thread count.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    draw = {"haar": sample_haar_batch, "sphere": sample_sphere_batch}[domain]

    def shard(item):
        s, size = item
        return _Partial.of(np.asarray(statistic(draw(n, size, cfg.stream(s))), dtype=float))

    parts = ordered_map(shard, _shards(samples), threads)
    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    var = total.m2 / (total.count - 1)
    return total.mean, math.sqrt(var / total.count)


def monte_carlo_moment(n: int, k: int, samples: int, cfg: SamplerConfig,
                       threads: Optional[int] = None) -> MomentEstimate:
    """Monte Carlo estimate of ``E ||U||_1^k`` under Haar measure on O(n).

    Since Haar measure is a probability measure, ``mean ** (1/k)`` is a lower
    bound for the supremum of the 1-norm (up to sampling error).
    """
    if samples < 100:
        raise ValueError("monte_carlo_moment needs at least 100 samples")
    if k < 1:
        raise ValueError("k must be positive")
    mean, se = mc_mean(lambda u: np.abs(u).sum(axis=(1, 2)) ** k, n, samples, cfg, threads)
    return MomentEstimate(n, k, mean, se, samples, cfg.seed, mean ** (1.0 / k))


def moment_term(n: int, rows: Sequence[int], cols: Sequence[int], samples: int, cfg: SamplerConfig,
                threads: Optional[int] = None) -> MomentEstimate:
    """Monte Carlo estimate of ``E|U[i_1, j_1] ... U[i_k, j_k]|`` (0-based indices).

    Only orders ``k <= 4`` are supported; the general expansion of the k-th
    moment into such terms is not implemented here.
    """
    k = len(rows)
    if len(cols) != k or k == 0:
        raise ValueError("rows and cols must be nonempty and of equal length")
    if k > MAX_TERM_ORDER:
        raise ValueError(f"expansion terms are supported up to order {MAX_TERM_ORDER}, got {k}; "
                         "higher orders of the moment expansion are out of scope")
    if any(not 0 <= i < n for i in list(rows) + list(cols)):
        raise IndexError("index out of range")
    r, c = np.asarray(rows), np.asarray(cols)
    mean, se = mc_mean(lambda u: np.abs(np.prod(u[:, r, c], axis=1)), n, samples, cfg, threads)
    return MomentEstimate(n, k, mean, se, samples, cfg.seed, mean ** (1.0 / k))
