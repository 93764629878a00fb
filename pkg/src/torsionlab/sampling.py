"""Deterministic low-discrepancy sampling with seeded digit scrambling.

Generalized Halton points: coordinate i uses the i-th prime base with a
seed-selected digit permutation (0 stays fixed so finite expansions stay
finite; seed 0 gives the plain Halton sequence).  Points are reproducible
bit-for-bit given (dim, seed, offset), and shard merges below sum in shard
order, so reports do not depend on the executor.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

_PRIMES = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
    71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113,
]


def _digit_permutation(base: int, seed: int) -> np.ndarray:
    if seed == 0:
        return np.arange(base)
    rs = np.random.RandomState((seed * 1000003 + base) % (2**32))
    perm = np.arange(1, base)
    rs.shuffle(perm)
    return np.concatenate([[0], perm])


def halton(dim: int, count: int, seed: int = 0, offset: int = 0) -> np.ndarray:
    """(count, dim) scrambled-Halton points in [0, 1)^dim."""
    if dim > len(_PRIMES):
        raise ValueError(f"dimension {dim} beyond the prime table")
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.int64)
    out = np.empty((count, dim))
    for i in range(dim):
        b = _PRIMES[i]
        perm = _digit_permutation(b, seed)
        x = np.zeros(count)
        denom = 1.0
        n = idx.copy()
        while n.max() > 0:
            n, digit = np.divmod(n, b)
            denom *= b
            x += perm[digit] / denom
        out[:, i] = x
    return out


def scale_to_box(u: np.ndarray, lo, hi) -> np.ndarray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo + u * (hi - lo)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("TORSIONLAB_THREADS", "1")))
    except ValueError:
        return 1


def qmc_mean(
    f: Callable[[np.ndarray], np.ndarray],
    dim: int,
    n_samples: int,
    seed: int = 0,
    shard_size: int = 65536,
) -> tuple[float, float, int]:
    """Mean of f over [0,1)^dim with a conservative MC-style standard error.

    Sharded deterministically: shard k evaluates points [k*shard_size, ...)
    of the scrambled sequence and partial sums are combined in shard order,
    so the result is identical for any thread count.
    """
    n_samples = int(n_samples)
    shards = [
        (k, min(shard_size, n_samples - k * shard_size))
        for k in range((n_samples + shard_size - 1) // shard_size)
    ]

    def run(shard):
        k, m = shard
        pts = halton(dim, m, seed=seed, offset=k * shard_size)
        vals = np.asarray(f(pts), dtype=float)
        return float(vals.sum()), float((vals * vals).sum()), m

    workers = thread_count()
    if workers > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, shards))
    else:
        parts = [run(s) for s in shards]
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0)
    stderr = (var / n) ** 0.5
    return mean, stderr, n
