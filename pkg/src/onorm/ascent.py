"""Local optimization of the entrywise p-norm over O(N) by Givens rotations.

A sweep visits every pair of rows and then every pair of columns, and for
each pair applies the plane rotation that is best along that one-parameter
curve. For p = 1 the line search is exact. Write the two selected rows as
``a`` and ``b`` and let ``(a_k, b_k) = r_k (cos phi_k, sin phi_k)``. The
rotated pair then contributes ``sum_k r_k (|cos(t - phi_k)| + |sin(t - phi_k)|)``,
which has period pi/2 and breakpoints at ``t = phi_k mod pi/2``. Between two
consecutive breakpoints the sum equals ``A cos t + B sin t``, so its maximum is
at an endpoint or at ``atan2(B, A)``.

Maximization is used for p < 2 and minimization for p > 2. Both push towards
matrices with entries of equal magnitude. At p = 2 the objective is
constant on O(N), so p = 2 is rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .haar import SamplerConfig, ordered_map, sample_haar
from .matrix import (
    OrthogonalMatrix, SquareMatrix, ZeroEntry, canonicalize, nearest_orthogonal,
    one_norm, orth_residual, p_norm, sign_pattern,
)

QUARTER = math.pi / 2
REORTH_EVERY = 100
REORTH_MAX_CHANGE = 1e-10
_EPS_GAIN = 8 * np.finfo(float).eps
_GRID_PER_INTERVAL = 8


@dataclass(frozen=True)
class AscentOptions:
    p: float = 1.0
    max_sweeps: Optional[int] = None  # None: 10 * n**2
    gain_tol: float = 1e-12
    restarts: int = 1
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    polish: bool = True

    def __post_init__(self):
        if not (self.p >= 1 and math.isfinite(self.p)):
            raise ValueError("p must be a finite real >= 1")
        if self.p == 2:
            raise ValueError("the p-norm is constant on O(N) at p = 2")
        if not self.gain_tol > 0:
            raise ValueError("gain_tol must be positive")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise ValueError("max_sweeps must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be nonnegative")

    def sweeps_for(self, n: int) -> int:
        return self.max_sweeps if self.max_sweeps is not None else 10 * n * n


@dataclass(frozen=True)
class AscentResult:
    matrix: OrthogonalMatrix
    objective: float
    sweeps_used: int
    restart_index: int
    converged: bool
    history: tuple = ()


def _check_pair(n: int, i: int, j: int) -> None:
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"pair ({i}, {j}) out of range for n = {n}")
    if i == j:
        raise ValueError("rotation needs two distinct indices")


def _maximizing(p: float) -> bool:
    return p < 2


def _pair_power_sum(a: np.ndarray, b: np.ndarray, t, p: float) -> np.ndarray:
    """sum_k |c a_k + s b_k|^p + |-s a_k + c b_k|^p for each angle in ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c, s = np.cos(t)[:, None], np.sin(t)[:, None]
    x = np.abs(c * a + s * b)
    y = np.abs(-s * a + c * b)
    if p == 1:
        return (x + y).sum(axis=1)
    return (x**p + y**p).sum(axis=1)


def _breakpoints(a: np.ndarray, b: np.ndarray):
    r = np.hypot(a, b)
    keep = r > 0
    r, phi = r[keep], np.mod(np.arctan2(b[keep], a[keep]), QUARTER)
    order = np.argsort(phi, kind="stable")
    return r[order], phi[order]


def _candidates_p1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    r, phi = _breakpoints(a, b)
    if len(r) == 0:
        return np.zeros(1)
    # on [phi_m, phi_{m+1}] columns k <= m contribute r_k sqrt2 cos(t - phi_k - pi/4)
    # and columns k > m contribute r_k sqrt2 cos(t - phi_k + pi/4)
    plus = r * np.exp(1j * (phi + math.pi / 4))
    minus = r * np.exp(1j * (phi - math.pi / 4))
    z = np.cumsum(plus) + (minus.sum() - np.cumsum(minus))
    lo = phi
    hi = np.append(phi[1:], phi[0] + QUARTER)
    crit = lo + np.mod(np.angle(z) - lo, 2 * math.pi)
    inside = crit <= hi
    return np.concatenate([[0.0], phi, crit[inside]])


def _candidates_general(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    r, phi = _breakpoints(a, b)
    if len(r) == 0:
        return np.zeros(1)
    sign = -1.0 if _maximizing(p) else 1.0
    lo = phi
    hi = np.append(phi[1:], phi[0] + QUARTER)
    cands = [np.zeros(1), phi]
    for l, h in zip(lo, hi):
        if h - l <= 1e-15:
            continue
        grid = np.linspace(l, h, _GRID_PER_INTERVAL + 2)
        vals = sign * _pair_power_sum(a, b, grid, p)
        k = int(np.argmin(vals))
        left, right = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        res = minimize_scalar(
            lambda t: sign * _pair_power_sum(a, b, t, p)[0],
            bounds=(left, right), method="bounded", options={"xatol": 1e-13},
        )
        cands.append(np.array([grid[k], res.x]))
    return np.concatenate(cands)


def _best_rotation(a: np.ndarray, b: np.ndarray, p: float, rest: float) -> tuple[float, float]:
    """Best angle for rows ``a``, ``b``; ``rest`` is the power sum of all other rows."""
    cands = _candidates_p1(a, b) if p == 1 else _candidates_general(a, b, p)
    cands = np.mod(cands, QUARTER)
    cands[0] = 0.0
    vals = _pair_power_sum(a, b, cands, p)
    totals = rest + vals
    norms = totals if p == 1 else np.maximum(totals, 0.0) ** (1.0 / p)
    improvement = norms - norms[0] if _maximizing(p) else norms[0] - norms
    best = float(improvement.max())
    if best <= _EPS_GAIN * max(norms[0], 1.0):
        return 0.0, 0.0
    # smallest angle among the (numerically) equal best values
    ties = np.flatnonzero(improvement >= best - _EPS_GAIN * norms[0])
    k = ties[np.argmin(cands[ties])]
    return float(cands[k]), float(improvement[k])


def _power_sum(x: np.ndarray, p: float) -> float:
    ax = np.abs(x)
    return float(ax.sum() if p == 1 else (ax**p).sum())


def _rotate_rows(x: np.ndarray, i: int, j: int, t: float) -> None:
    c, s = math.cos(t), math.sin(t)
    a, b = x[i].copy(), x[j].copy()
    x[i] = c * a + s * b
    x[j] = -s * a + c * b


def _oriented(u, axis: int) -> np.ndarray:
    x = np.array(u, dtype=float)
    if axis not in (0, 1):
        raise ValueError("axis must be 0 (rows) or 1 (columns)")
    return x if axis == 0 else x.T


def pair_objective(u, i: int, j: int, t: float, p: float = 1.0, axis: int = 0) -> float:
    """p-norm of ``u`` after rotating rows (``axis=0``) or columns ``i, j`` by ``t``.

    Row ``i`` becomes ``cos t * u_i + sin t * u_j`` and row ``j`` becomes
    ``-sin t * u_i + cos t * u_j``.
    """
    x = _oriented(u, axis)
    _check_pair(x.shape[0], i, j)
    _rotate_rows(x, i, j, t)
    return p_norm(x, p)


def best_pair_rotation(u, i: int, j: int, p: float = 1.0, axis: int = 0) -> tuple[float, float]:
    """Return ``(t_star, gain)`` for the rotation of the pair ``i, j``.

    ``t_star`` lies in ``[0, pi/2)`` (the pair objective has period pi/2) and
    is the smallest optimal angle. ``gain`` is the improvement of the p-norm,
    an increase for p < 2 and a decrease for p > 2, so it is never negative.
    When no angle improves on ``t = 0`` the result is ``(0.0, 0.0)``.
    """
    if p == 2:
        raise ValueError("the p-norm is constant on O(N) at p = 2")
    x = _oriented(u, axis)
    _check_pair(x.shape[0], i, j)
    rest = _power_sum(x, p) - _power_sum(x[[i, j]], p)
    return _best_rotation(x[i], x[j], p, rest)


def _sweep_inplace(x: np.ndarray, p: float) -> float:
    n = x.shape[0]
    total = 0.0
    for view in (x, x.T):
        for i in range(n):
            for j in range(i + 1, n):
                rest = _power_sum(view, p) - _power_sum(view[[i, j]], p)
                t, gain = _best_rotation(view[i], view[j], p, rest)
                if gain > 0:
                    _rotate_rows(view, i, j, t)
                    total += gain
    return total


def sweep(u, p: float = 1.0) -> tuple[OrthogonalMatrix, float]:
    """One pass of best pair rotations over all row pairs, then all column pairs."""
    if p == 2:
        raise ValueError("the p-norm is constant on O(N) at p = 2")
    x = np.array(u, dtype=float)
    gain = _sweep_inplace(x, p)
    return OrthogonalMatrix.from_array(x, tol=1e-9), gain


def optimize(u0, opts: AscentOptions = AscentOptions(), restart_index: int = 0) -> AscentResult:
    x = np.array(u0, dtype=float)
    n = x.shape[0]
    p = opts.p
    history = [p_norm(x, p)]
    converged = False
    sweeps = 0
    for sweeps in range(1, opts.sweeps_for(n) + 1):
        gain = _sweep_inplace(x, p)
        if sweeps % REORTH_EVERY == 0:
            before = p_norm(x, p)
            x = nearest_orthogonal(x)
            if abs(p_norm(x, p) - before) > REORTH_MAX_CHANGE:
                raise RuntimeError("re-orthonormalization moved the objective by more than 1e-10")
        history.append(p_norm(x, p))
        if gain < opts.gain_tol:
            converged = True
            break
    if n == 1:
        converged = True
    if orth_residual(x) > 1e-9:
        x = nearest_orthogonal(x)
    if opts.polish and p == 1 and converged:
        x = polish_local_max(x)
    mat = OrthogonalMatrix(SquareMatrix(x), orth_residual(x))
    return AscentResult(mat, p_norm(x, p), sweeps, restart_index, converged, tuple(history))


def polish_local_max(x: np.ndarray, max_move: float = 1e-6) -> np.ndarray:
    """Snap a converged 1-norm maximizer to the polar factor of its sign matrix.

    At a local maximizer ``S U^t = P`` is symmetric positive definite, so
    ``S = P U`` and ``U`` is the orthogonal polar factor of ``S``. The snap
    is kept only if it preserves the sign pattern, moves no entry by more
    than ``max_move`` and does not lower the norm beyond rounding.
    """
    try:
        s = np.asarray(sign_pattern(x), dtype=float)
    except ZeroEntry:
        return x
    v = nearest_orthogonal(s)
    if (np.array_equal(np.sign(v), s) and np.max(np.abs(v - x)) <= max_move
            and one_norm(v) >= one_norm(x) - 1e-12):
        return v
    return x


def _better(a: AscentResult, b: AscentResult, p: float) -> bool:
    if a.objective == b.objective:
        return a.restart_index < b.restart_index
    return a.objective > b.objective if _maximizing(p) else a.objective < b.objective


def search_kn(n: int, opts: AscentOptions = AscentOptions(restarts=10), threads: Optional[int] = None,
              return_all: bool = False):
    """Best of ``opts.restarts`` ascents from Haar-random starts.

    Restart ``r`` starts from ``sample_haar(n, opts.sampler.stream(r))``. The
    winner is the largest objective (smallest for p > 2), lowest restart
    index on ties, so the result does not depend on ``threads``. At p = 1
    the winning objective is a lower bound for the supremum of the 1-norm
    on O(n).
    """
    if opts.restarts < 1:
        raise ValueError("search needs at least one restart")

    def run(r: int) -> AscentResult:
        return optimize(sample_haar(n, opts.sampler.stream(r)), opts, restart_index=r)

    results = ordered_map(run, list(range(opts.restarts)), threads)
    best = results[0]
    for res in results[1:]:
        if _better(res, best, opts.p):
            best = res
    return (best, results) if return_all else best


def cluster_by_class(results, tol: float = 1e-6) -> list[tuple[OrthogonalMatrix, list[int]]]:
    """Group converged matrices by equivalence class via their canonical forms.

    Returns ``(canonical representative, member indices)`` pairs ordered by
    first appearance. Matrices with near-zero entries are skipped.
    """
    clusters: list[tuple[OrthogonalMatrix, list[int]]] = []
    for idx, res in enumerate(results):
        m = res.matrix if isinstance(res, AscentResult) else res
        try:
            c = canonicalize(m)
        except (ValueError, RuntimeError):
            continue
        for rep, members in clusters:
            if np.max(np.abs(rep.entries - c.entries)) <= tol:
                members.append(idx)
                break
        else:
            clusters.append((c, [idx]))
    return clusters
