"""First- and second-order tests for local maximizers of the 1-norm on O(N).

With ``S = sgn(U)`` (no zero entries), ``U`` is a critical point of the
1-norm restricted to O(N) exactly when ``S U^t`` is symmetric, and a local
maximizer exactly when ``S U^t`` is moreover positive definite. A matrix
with a zero entry is never a local maximizer: some plane rotation of two
rows strictly increases the norm.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .matrix import (
    TOL_ZERO, OrthogonalMatrix, SquareMatrix, ZeroEntry, orth_residual,
    sign_pattern,
)

SYM_TOL = 1e-8
EIG_TOL = 1e-10

#: The 3x3 maximizer of the 1-norm, with ||A||_1 = 5.
A3 = np.array([[1.0, 2.0, 2.0], [2.0, 1.0, -2.0], [-2.0, 2.0, -1.0]]) / 3.0


class Verdict(str, enum.Enum):
    LOCAL_MAX = "LocalMax"
    CRITICAL_NOT_MAX = "CriticalNotMax"
    NOT_CRITICAL = "NotCritical"
    HAS_ZERO_ENTRY = "HasZeroEntry"


@dataclass(frozen=True)
class Certificate:
    verdict: Verdict
    symmetry_residual: float
    min_eigenvalue: float
    eigenvalues: tuple = ()
    product: np.ndarray | None = None  # S U^t
    warning: str = ""

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "symmetry_residual": self.symmetry_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "eigenvalues": list(self.eigenvalues),
            "warning": self.warning,
        }


def local_max_certificate(u, tol_zero: float = TOL_ZERO, sym_tol: float = SYM_TOL,
                          eig_tol: float = EIG_TOL) -> Certificate:
    """Classify ``u`` by the symmetry and positivity of ``S U^t``.

    Eigenvalues are those of the symmetric part ``(S U^t + U S^t) / 2`` and
    are reported in ascending order. A spectrum that is nonnegative but not
    above ``eig_tol`` is reported as ``CriticalNotMax`` with a warning, since
    a semidefinite Hessian does not decide the question.
    """
    a = np.asarray(u, dtype=float)
    try:
        s = np.asarray(sign_pattern(a, tol_zero), dtype=float)
    except ZeroEntry as exc:
        return Certificate(Verdict.HAS_ZERO_ENTRY, math.nan, math.nan, warning=str(exc))
    m = s @ a.T
    m.setflags(write=False)
    sym_res = float(np.max(np.abs(m - m.T)))
    if sym_res > sym_tol:
        return Certificate(Verdict.NOT_CRITICAL, sym_res, math.nan, product=m)
    eig = np.linalg.eigvalsh((m + m.T) / 2)
    lo = float(eig[0])
    warning = ""
    if lo > eig_tol:
        verdict = Verdict.LOCAL_MAX
    else:
        verdict = Verdict.CRITICAL_NOT_MAX
        if lo >= -eig_tol:
            warning = "S U^t is only semidefinite within eig_tol; inconclusive"
    return Certificate(verdict, sym_res, lo, tuple(float(x) for x in eig), m, warning)


def critical_point_check(u, tol_zero: float = TOL_ZERO, sym_tol: float = SYM_TOL) -> Certificate:
    return local_max_certificate(u, tol_zero, sym_tol)


def tensor_product(u, v) -> OrthogonalMatrix:
    """Kronecker product with row index ``(i, a) -> i * m + a`` (0-based)."""
    w = np.kron(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return OrthogonalMatrix(SquareMatrix(w), orth_residual(w))


@dataclass(frozen=True)
class Quaternion:
    x: float
    y: float
    z: float
    t: float

    def __post_init__(self):
        norm2 = self.x**2 + self.y**2 + self.z**2 + self.t**2
        if abs(norm2 - 1.0) > 1e-12:
            raise ValueError(f"quaternion is not unit: |q|^2 = {norm2!r}")

    @classmethod
    def normalized(cls, x, y, z, t) -> "Quaternion":
        r = math.sqrt(x * x + y * y + z * z + t * t)
        return cls(x / r, y / r, z / r, t / r)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.t])


def _rodrigues_array(q: np.ndarray) -> np.ndarray:
    x, y, z, t = np.moveaxis(np.asarray(q, dtype=float), -1, 0)
    return np.stack([
        np.stack([x*x + y*y - z*z - t*t, 2*(y*z - x*t), 2*(x*z + y*t)], -1),
        np.stack([2*(x*t + y*z), x*x + z*z - y*y - t*t, 2*(z*t - x*y)], -1),
        np.stack([2*(y*t - x*z), 2*(x*y + z*t), x*x + t*t - y*y - z*z], -1),
    ], -2)


def euler_rodrigues(q: Quaternion) -> OrthogonalMatrix:
    u = _rodrigues_array(q.as_array())
    return OrthogonalMatrix(SquareMatrix(u), orth_residual(u))


def _norm_of_quaternions(q: np.ndarray) -> np.ndarray:
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    return np.abs(_rodrigues_array(q)).sum(axis=(-2, -1))


def k3_refine(q0: Quaternion, xatol: float = 1e-12) -> tuple[float, Quaternion]:
    """Nelder-Mead polish of the 3x3 1-norm around ``q0``."""
    res = minimize(lambda v: -_norm_of_quaternions(v), q0.as_array(), method="Nelder-Mead",
                   options={"xatol": xatol, "fatol": 1e-15, "maxiter": 20000})
    q = Quaternion.normalized(*res.x)
    best = float(_norm_of_quaternions(q.as_array()))
    start = float(_norm_of_quaternions(q0.as_array()))
    if start >= best:
        return start, q0
    return best, q


def k3_grid_scan(resolution: int) -> tuple[float, Quaternion]:
    """Largest 1-norm of SO(3) over a quasi-uniform grid of S^3.

    The grid is the radial projection of the boundary of the cube [-1, 1]^4:
    on each of its 8 facets the three free coordinates run over
    ``resolution`` equally spaced values.
    """
    if resolution < 10:
        raise ValueError("resolution must be at least 10")
    axis = np.linspace(-1.0, 1.0, resolution)
    free = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), -1).reshape(-1, 3)
    grid_max, grid_arg = -math.inf, None
    # facets are independent; reduce by max
    for k in range(4):
        for sign in (1.0, -1.0):
            pts = np.insert(free, k, sign, axis=1)
            vals = _norm_of_quaternions(pts)
            i = int(np.argmax(vals))
            if vals[i] > grid_max:
                grid_max, grid_arg = float(vals[i]), pts[i]
    return grid_max, Quaternion.normalized(*grid_arg)


def k3_grid_verify(resolution: int = 50) -> tuple[float, Quaternion]:
    """Grid scan of the 3x3 1-norm followed by a local refinement of the best cell."""
    grid_max, q = k3_grid_scan(resolution)
    return k3_refine(q)


def certificate_eigen_products(u, v) -> np.ndarray:
    """All pairwise products of the certificate spectra of ``u`` and ``v``, sorted."""
    eu = local_max_certificate(u).eigenvalues
    ev = local_max_certificate(v).eigenvalues
    return np.sort(np.multiply.outer(eu, ev).ravel())
