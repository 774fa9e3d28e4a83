"""Hadamard matrices: Sylvester construction, Kronecker products, tests and
detection of rescaled Hadamard matrices inside O(N)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_SYLVESTER_K = 20


class InconsistentDetection(RuntimeError):
    """Entry magnitudes look Hadamard but the rounded sign matrix is not."""


@dataclass(frozen=True)
class HadamardMatrix:
    entries: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.entries)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("Hadamard matrix must be square")
        if not np.all((h == 1) | (h == -1)):
            raise ValueError("Hadamard entries must be +1 or -1")
        h = h.astype(np.int64)
        n = h.shape[0]
        if not (n in (1, 2) or n % 4 == 0):
            raise ValueError(f"no Hadamard matrix of order {n} exists")
        if not np.array_equal(h @ h.T, n * np.eye(n, dtype=np.int64)):
            raise ValueError("rows are not pairwise orthogonal")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def rescaled(self) -> np.ndarray:
        """H / sqrt(n), an orthogonal matrix."""
        return self.entries / math.sqrt(self.n)


def sylvester(k: int) -> HadamardMatrix:
    if not 0 <= k <= MAX_SYLVESTER_K:
        raise ValueError(f"k must be in [0, {MAX_SYLVESTER_K}]")
    h = np.ones((1, 1), dtype=np.int64)
    for _ in range(k):
        h = np.block([[h, h], [h, -h]])
    return HadamardMatrix(h)


def kronecker(h1: HadamardMatrix, h2: HadamardMatrix) -> HadamardMatrix:
    return HadamardMatrix(np.kron(h1.entries, h2.entries))


def is_hadamard(m, tol: float = 1e-9) -> bool:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    n = a.shape[0]
    if not np.all(np.abs(np.abs(a) - 1.0) <= tol):
        return False
    return bool(np.max(np.abs(a @ a.T - n * np.eye(n))) <= tol)


def detect_rescaled(u, tol: float = 1e-8) -> bool:
    """True iff every ``|u_ij|`` is within ``tol`` of ``1/sqrt(n)``.

    On success ``sqrt(n) * u`` rounded to signs must be Hadamard; if it is
    not, ``tol`` was too loose and :class:`InconsistentDetection` is raised.
    """
    a = np.asarray(u, dtype=float)
    n = a.shape[0]
    if not np.all(np.abs(np.abs(a) - 1.0 / math.sqrt(n)) <= tol):
        return False
    signs = np.where(a >= 0, 1, -1)
    if not np.array_equal(signs @ signs.T, n * np.eye(n, dtype=int)):
        raise InconsistentDetection(f"magnitudes match 1/sqrt({n}) within {tol} but signs are not Hadamard")
    return True


def row_defect(u) -> tuple[float, np.ndarray]:
    """Squared distance from a unit vector to its sign vector ``sgn(u)/sqrt(N)``.

    Zeros get sign +1. The 1-norm of ``u`` equals
    ``sqrt(N) * (1 - defect / 2)`` whatever sign is used at zeros.
    """
    v = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError("row_defect needs a unit vector")
    h = np.where(v >= 0, 1.0, -1.0) / math.sqrt(len(v))
    return float(np.sum((v - h) ** 2)), h
