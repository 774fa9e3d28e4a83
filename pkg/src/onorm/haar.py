"""Seeded sampling from the Haar measure on O(N) and the uniform measure on
the sphere S^(N-1).

Every ``(seed, stream_id)`` pair maps to an independent numpy ``PCG64``
bit generator seeded by ``SeedSequence(seed, spawn_key=(stream_id,))``. The
spawn-key mechanism gives non-overlapping streams without coordination
between workers, and a fixed pair reproduces the same samples bit for bit on
one platform and numpy release.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, TypeVar

import numpy as np

from .matrix import OrthogonalMatrix, SquareMatrix, orth_residual

GENERATOR_NAME = "numpy.random.PCG64 via SeedSequence(seed, spawn_key=(stream_id,))"

T = TypeVar("T")


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    def stream(self, offset: int) -> "SamplerConfig":
        """Config for the worker stream ``stream_id + offset``."""
        return SamplerConfig(self.seed, self.stream_id + offset)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


def haar_from_gaussian(g: np.ndarray) -> np.ndarray:
    """Map a (stack of) Gaussian matrices to Haar-distributed orthogonal ones.

    Q from the QR factorization is multiplied column-wise by the signs of
    diag(R). Skipping this correction leaves a distribution biased towards
    the particular sign convention of the LAPACK routine.
    """
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    return q * d[..., None, :]


def sample_haar_batch(n: int, count: int, cfg: SamplerConfig) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    g = cfg.generator().standard_normal((count, n, n))
    return haar_from_gaussian(g)


def sample_haar(n: int, cfg: SamplerConfig) -> OrthogonalMatrix:
    u = sample_haar_batch(n, 1, cfg)[0]
    return OrthogonalMatrix(SquareMatrix(u), orth_residual(u))


def sample_sphere_batch(n: int, count: int, cfg: SamplerConfig) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    g = cfg.generator().standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_sphere(n: int, cfg: SamplerConfig) -> np.ndarray:
    return sample_sphere_batch(n, 1, cfg)[0]


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get("ONORM_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def ordered_map(fn: Callable[..., T], items: Sequence, threads: Optional[int] = None) -> list[T]:
    """``[fn(x) for x in items]``, possibly on a thread pool; order is kept."""
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))
