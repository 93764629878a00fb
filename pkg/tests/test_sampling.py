"""Low-discrepancy sampler: determinism, sharding invariance, uniformity."""

import os
from unittest import mock

import numpy as np
import pytest

from torsionlab.sampling import halton, qmc_mean, scale_to_box


class TestHalton:
    def test_deterministic(self):
        a = halton(3, 500, seed=7)
        b = halton(3, 500, seed=7)
        assert np.array_equal(a, b)

    def test_seed_changes_points(self):
        assert not np.array_equal(halton(2, 100, seed=1), halton(2, 100, seed=2))

    def test_offset_continues_sequence(self):
        whole = halton(2, 300, seed=3)
        parts = np.vstack([halton(2, 100, seed=3, offset=k * 100) for k in range(3)])
        assert np.array_equal(whole, parts)

    def test_range_and_uniformity(self):
        pts = halton(4, 8000, seed=5)
        assert pts.min() >= 0 and pts.max() < 1
        assert np.allclose(pts.mean(axis=0), 0.5, atol=0.01)

    def test_low_discrepancy_beats_noise(self):
        # mean of u over 10^4 scrambled-Halton points is far tighter than the
        # 1/sqrt(n) Monte Carlo deviation
        pts = halton(1, 10000, seed=9)
        assert abs(pts.mean() - 0.5) < 0.001


class TestQmcMean:
    def test_exact_constant(self):
        m, se, n = qmc_mean(lambda p: np.ones(len(p)), 3, 10000, seed=1)
        assert m == 1.0 and se == 0.0 and n == 10000

    def test_product_moment(self):
        m, _, _ = qmc_mean(lambda p: p[:, 0] * p[:, 1], 2, 60000, seed=2)
        assert abs(m - 0.25) < 1e-3

    def test_shard_size_only_reorders_rounding(self):
        # same point set either way; only float summation order differs
        f = lambda p: np.sin(p[:, 0]) + p[:, 1] ** 2
        a = qmc_mean(f, 2, 30000, seed=4, shard_size=1 << 16)
        b = qmc_mean(f, 2, 30000, seed=4, shard_size=999)
        assert a[0] == pytest.approx(b[0], rel=1e-12)

    def test_thread_count_does_not_change_result(self):
        f = lambda p: p[:, 0] ** 3
        with mock.patch.dict(os.environ, {"TORSIONLAB_THREADS": "1"}):
            a = qmc_mean(f, 1, 50000, seed=6, shard_size=4096)
        with mock.patch.dict(os.environ, {"TORSIONLAB_THREADS": "8"}):
            b = qmc_mean(f, 1, 50000, seed=6, shard_size=4096)
        assert a == b

    def test_stderr_shrinks_with_budget(self):
        f = lambda p: (p[:, 0] > 0.371).astype(float)
        _, se1, _ = qmc_mean(f, 1, 10000, seed=8)
        _, se2, _ = qmc_mean(f, 1, 40000, seed=8)
        assert se2 < se1 / 1.8  # at least the MC sqrt-rate


def test_scale_to_box():
    u = np.array([[0.0, 0.5], [1.0, 0.25]])
    out = scale_to_box(u, [-1, 0], [1, 4])
    assert np.allclose(out, [[-1, 2], [1, 1]])
