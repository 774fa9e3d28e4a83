"""Square and orthogonal matrix values, entrywise norms and the signed
permutation equivalence on O(N).

Matrices are immutable: constructors copy their input and mark the stored
array read-only, and every operation returns a new value.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

TOL_ORTH = 1e-10
TOL_ZERO = 1e-8
# decimals kept in canonical sort keys
CANON_DECIMALS = 9
# above this many candidate orderings, canonicalize falls back to the
# iterative sign-fix/sort heuristic
CANON_MAX_CANDIDATES = 20000


class ZeroEntry(ValueError):
    """An entry is too close to zero to have a well-defined sign."""

    def __init__(self, i: int, j: int, value: float):
        super().__init__(f"entry ({i}, {j}) = {value!r} is within tolerance of zero")
        self.i = i
        self.j = j
        self.value = value


class NoConvergence(RuntimeError):
    pass


class NotOrthogonal(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SquareMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "entries", _frozen(a))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True)
class OrthogonalMatrix:
    """An element of O(N) together with its measured orthogonality residual.

    Use :meth:`from_array` to build one; it refuses matrices whose residual
    ``max|U U^t - I|`` exceeds ``tol`` unless ``reorthonormalize`` is set,
    in which case the nearest orthogonal matrix (polar factor) is used.
    """

    matrix: SquareMatrix
    orth_residual: float

    @classmethod
    def from_array(cls, a, tol: float = TOL_ORTH, reorthonormalize: bool = False) -> "OrthogonalMatrix":
        m = a.matrix if isinstance(a, OrthogonalMatrix) else SquareMatrix(np.asarray(a, dtype=float))
        u = m.entries
        if reorthonormalize:
            u = nearest_orthogonal(u)
            m = SquareMatrix(u)
        res = orth_residual(u)
        col_res = float(np.max(np.abs(u.T @ u - np.eye(m.n))))
        if res > tol or col_res > tol:
            raise NotOrthogonal(f"orthogonality residual {max(res, col_res):.3e} exceeds {tol:.1e}")
        return cls(m, res)

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.entries

    @property
    def n(self) -> int:
        return self.matrix.n

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def T(self) -> "OrthogonalMatrix":
        return OrthogonalMatrix.from_array(self.entries.T)


@dataclass(frozen=True)
class SignPattern:
    signs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("sign pattern must be square")
        if not np.all((s == 1) | (s == -1)):
            raise ValueError("sign pattern entries must be +1 or -1")
        s = s.astype(np.int8)
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    @property
    def n(self) -> int:
        return self.signs.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.signs if dtype is None else self.signs.astype(dtype)


@dataclass(frozen=True)
class EquivalenceMove:
    """Signed permutation of rows and columns.

    ``apply_move`` maps ``U`` to ``V`` with
    ``V[i, j] = row_signs[i] * col_signs[j] * U[row_perm[i], col_perm[j]]``.
    Permutations are 0-based.
    """

    row_perm: tuple
    col_perm: tuple
    row_signs: tuple
    col_signs: tuple

    def __post_init__(self):
        n = len(self.row_perm)
        for name in ("col_perm", "row_signs", "col_signs"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")
        for perm in (self.row_perm, self.col_perm):
            if sorted(perm) != list(range(n)):
                raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
        for signs in (self.row_signs, self.col_signs):
            if any(s not in (1, -1) for s in signs):
                raise ValueError("signs must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.row_perm)

    @classmethod
    def identity(cls, n: int) -> "EquivalenceMove":
        r = tuple(range(n))
        return cls(r, r, (1,) * n, (1,) * n)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "EquivalenceMove":
        return cls(
            tuple(int(i) for i in rng.permutation(n)),
            tuple(int(i) for i in rng.permutation(n)),
            tuple(int(s) for s in rng.choice([-1, 1], n)),
            tuple(int(s) for s in rng.choice([-1, 1], n)),
        )


MatrixLike = Union[SquareMatrix, OrthogonalMatrix, np.ndarray]


def orth_residual(u) -> float:
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(u @ u.T - np.eye(u.shape[0]))))


def nearest_orthogonal(u) -> np.ndarray:
    """Polar factor of ``u``, the closest orthogonal matrix in Frobenius norm."""
    w, _, vt = np.linalg.svd(np.asarray(u, dtype=float))
    return w @ vt


def one_norm(u: MatrixLike) -> float:
    return float(np.abs(np.asarray(u, dtype=float)).sum())


def p_norm(u: MatrixLike, p: float) -> float:
    """Entrywise p-norm ``(sum |u_ij|^p)^(1/p)`` for ``1 <= p < inf``."""
    if not (p >= 1 and math.isfinite(p)):
        raise ValueError(f"p must be a finite real >= 1, got {p}")
    a = np.abs(np.asarray(u, dtype=float))
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(np.sqrt((a * a).sum()))
    # scale by the max entry so large p does not underflow
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * ((a / m) ** p).sum() ** (1.0 / p))


def sign_pattern(u: MatrixLike, tol_zero: float = TOL_ZERO) -> SignPattern:
    if tol_zero <= 0:
        raise ValueError("tol_zero must be positive")
    a = np.asarray(u, dtype=float)
    small = np.abs(a) <= tol_zero
    if small.any():
        i, j = (int(k) for k in np.argwhere(small)[0])
        raise ZeroEntry(i, j, float(a[i, j]))
    return SignPattern(np.where(a > 0, 1, -1))


def apply_move(u: OrthogonalMatrix, move: EquivalenceMove) -> OrthogonalMatrix:
    a = np.asarray(u, dtype=float)
    if move.n != a.shape[0]:
        raise ValueError(f"move of size {move.n} applied to {a.shape[0]}x{a.shape[0]} matrix")
    v = a[np.ix_(move.row_perm, move.col_perm)]
    v = np.asarray(move.row_signs, dtype=float)[:, None] * v * np.asarray(move.col_signs, dtype=float)[None, :]
    return OrthogonalMatrix(SquareMatrix(v), orth_residual(v))


# -- canonical representatives ---------------------------------------------


def _relabel(signatures: list) -> list[int]:
    order = sorted(set(signatures))
    index = {s: k for k, s in enumerate(order)}
    return [index[s] for s in signatures]


def _refine_colors(absr: np.ndarray) -> tuple[list[int], list[int]]:
    """Colour refinement of the weighted bipartite row/column graph.

    Colours depend only on rounded absolute values, so they are invariant
    under signed permutations.
    """
    n = absr.shape[0]
    rows = _relabel([tuple(sorted(absr[i])) for i in range(n)])
    cols = _relabel([tuple(sorted(absr[:, j])) for j in range(n)])
    while True:
        new_rows = _relabel([
            (rows[i], tuple(sorted(zip(cols, absr[i])))) for i in range(n)
        ])
        new_cols = _relabel([
            (cols[j], tuple(sorted(zip(rows, absr[:, j])))) for j in range(n)
        ])
        stable = len(set(new_rows)) == len(set(rows)) and len(set(new_cols)) == len(set(cols))
        rows, cols = new_rows, new_cols
        if stable:
            return rows, cols


def _class_orderings(colors: list[int]) -> list[tuple]:
    groups = [[i for i, c in enumerate(colors) if c == k] for k in sorted(set(colors))]
    out = []
    for combo in itertools.product(*(itertools.permutations(g) for g in groups)):
        out.append(tuple(itertools.chain.from_iterable(combo)))
    return out


def _normalize_signs(x: np.ndarray) -> np.ndarray:
    # first row positive via column flips, then first column positive via row flips
    x = x * np.sign(x[..., :1, :])
    return x * np.sign(x[..., :, :1])


def _count_orderings(colors: list[int]) -> int:
    return math.prod(math.factorial(colors.count(c)) for c in set(colors))


def _canonical_exhaustive(a: np.ndarray, row_colors, col_colors) -> np.ndarray:
    rps = np.array(_class_orderings(row_colors))
    cps = np.array(_class_orderings(col_colors))
    n = a.shape[0]
    cands = a[rps[:, None, :, None], cps[None, :, None, :]].reshape(-1, n, n)
    cands = _normalize_signs(cands)
    keys = np.round(cands.reshape(len(cands), -1), CANON_DECIMALS)
    # lexicographic maximum, lowest enumeration index on ties
    order = np.lexsort(keys.T[::-1])
    best_key = keys[order[-1]]
    first = int(np.flatnonzero(np.all(keys == best_key, axis=1))[0])
    return cands[first]


def _canonical_iterative(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    x = a.copy()
    for _ in range(max(n * n, 1)):
        prev = x
        lead = np.argmax(np.abs(x), axis=1)
        x = x * np.sign(x[np.arange(n), lead])[:, None]
        lead = np.argmax(np.abs(x), axis=0)
        x = x * np.sign(x[lead, np.arange(n)])[None, :]
        keys = np.round(x, CANON_DECIMALS)
        rows = sorted(range(n), key=lambda i: tuple(keys[i]))
        x = x[rows]
        keys = np.round(x, CANON_DECIMALS)
        cols = sorted(range(n), key=lambda j: tuple(keys[:, j]))
        x = x[:, cols]
        if np.array_equal(x, prev):
            return x
    raise NoConvergence(f"canonical form not reached in {n * n} sweeps")


def canonicalize(u: OrthogonalMatrix, tol_zero: float = TOL_ZERO) -> OrthogonalMatrix:
    """Deterministic representative of the signed-permutation class of ``u``.

    Rows and columns are first split into classes by colour refinement of
    the absolute-value pattern. When the number of orderings compatible with
    those classes is at most ``CANON_MAX_CANDIDATES``, every compatible
    ordering is sign-normalized (first row and first column positive) and the
    lexicographically largest, after rounding to ``CANON_DECIMALS`` digits,
    is returned; this is exact on equivalence classes up to rounding ties.
    Otherwise an iterative heuristic alternates sign fixing by each row's
    and column's largest entry with lexicographic row and column sorts.
    """
    a = np.asarray(u, dtype=float)
    sign_pattern(a, tol_zero)
    absr = np.round(np.abs(a), CANON_DECIMALS)
    row_colors, col_colors = _refine_colors(absr)
    if _count_orderings(row_colors) * _count_orderings(col_colors) <= CANON_MAX_CANDIDATES:
        c = _canonical_exhaustive(a, row_colors, col_colors)
    else:
        c = _canonical_iterative(a)
    return OrthogonalMatrix(SquareMatrix(c), orth_residual(c))


def equivalent(u: OrthogonalMatrix, v: OrthogonalMatrix, tol: float = 1e-8, tol_zero: float = TOL_ZERO) -> bool:
    a, b = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    ca = canonicalize(u, tol_zero).entries
    cb = canonicalize(v, tol_zero).entries
    return bool(np.max(np.abs(ca - cb)) <= tol)


# -- text format -------------------------------------------------------------


def format_matrix(u: MatrixLike) -> str:
    a = np.asarray(u, dtype=float)
    lines = [str(a.shape[0])]
    lines += [" ".join(format(float(x), ".17g") for x in row) for row in a]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> SquareMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    n = int(lines[0])
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} rows after the size line, got {len(lines) - 1}")
    rows = [[float(x) for x in ln.split()] for ln in lines[1:]]
    if any(len(r) != n for r in rows):
        raise ValueError(f"every row must hold {n} numbers")
    return SquareMatrix(np.array(rows))


def read_matrix(path: Union[str, Path]) -> SquareMatrix:
    return parse_matrix(Path(path).read_text())


def write_matrix(path: Union[str, Path], u: MatrixLike) -> None:
    Path(path).write_text(format_matrix(u))
