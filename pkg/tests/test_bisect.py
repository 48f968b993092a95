"""Bisection solver: the threshold map, interval behavior, and convergence."""

import math

import numpy as np
import pytest

from entmax import (
    softmax,
    BisectConfig,
    ConfigurationError,
    InvalidInputError,
    entmax15_exact,
    entmax15_exact_batch,
    entmax_bisect,
    entmax_bisect_batch,
    p_of_tau,
    sparsemax,
    sparsemax_batch,
)

TAU_Z10 = (1.0 - math.sqrt(7.0)) / 4.0


class TestPOfTau:
    def test_quadratic_weights(self):
        scaled = np.array([0.5, 0.0])
        got = p_of_tau(scaled, TAU_Z10, 1.5)
        np.testing.assert_allclose(got, (scaled - TAU_Z10) ** 2, atol=1e-15)
        np.testing.assert_allclose(got, [0.8307, 0.1693], atol=1e-4)

    def test_tau_at_max_zeroes_everything(self):
        np.testing.assert_array_equal(p_of_tau([1.0, 0.0], 1.0, 1.5), [0.0, 0.0])

    def test_exponent_one(self):
        np.testing.assert_array_equal(p_of_tau([1.0, 0.0], 0.0, 2.0), [1.0, 0.0])

    def test_alpha_one_rejected(self):
        with pytest.raises(ConfigurationError):
            p_of_tau([1.0, 0.0], 0.0, 1.0)

    def test_underflow_to_zero_near_alpha_one(self):
        # exponent 1/(alpha-1) = 1e4: small gaps flush to exact zero
        got = p_of_tau(np.array([0.0, -0.5]), -1.0, 1.0 + 1e-4)
        assert got[0] == 1.0
        assert got[1] == 0.0


class TestBisectConfig:
    def test_defaults(self):
        cfg = BisectConfig()
        assert cfg.max_iters == 50
        assert cfg.normalize

    def test_rejects_zero_iters(self):
        with pytest.raises(ConfigurationError):
            BisectConfig(max_iters=0)


class TestEntmaxBisect:
    def test_uniform_on_zero_scores(self):
        for d in (2, 5, 32, 257):
            sol = entmax_bisect(np.zeros(d), 1.5)
            np.testing.assert_allclose(sol.p, np.full(d, 1.0 / d), atol=1e-8)
            assert abs(sol.p.sum() - 1.0) <= 1e-12

    def test_quadratic_case(self):
        sol = entmax_bisect([1.0, 0.0], 1.5)
        np.testing.assert_allclose(sol.p, entmax15_exact([1.0, 0.0]).p, atol=1e-6)
        assert sol.tau == pytest.approx(TAU_Z10, abs=1e-9)

    def test_sparsemax_saturation(self):
        sol = entmax_bisect([2.0, 0.0], 2.0)
        np.testing.assert_allclose(sol.p, [1.0, 0.0], atol=1e-8)
        assert sol.support_size == 1

    def test_alpha_at_or_below_one_rejected(self):
        with pytest.raises(ConfigurationError):
            entmax_bisect([1.0, 0.0], 1.0)
        with pytest.raises(ConfigurationError):
            entmax_bisect([1.0, 0.0], 0.9)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            entmax_bisect([np.nan, 0.0], 1.5)

    def test_interval_brackets_unit_mass(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            d = int(rng.integers(2, 513))
            alpha = float(rng.uniform(1.05, 3.0))
            z = rng.normal(0.0, 2.0, d)
            scaled = (alpha - 1.0) * (z - z.max())
            tau_min = scaled.max() - 1.0
            tau_max = scaled.max() - math.exp((1.0 - alpha) * math.log(d))
            assert p_of_tau(scaled, tau_min, alpha).sum() >= 1.0
            assert p_of_tau(scaled, tau_max, alpha).sum() <= 1.0

    def test_each_iteration_halves_the_interval(self):
        z = np.array([0.3, -0.2, 1.1, 0.0])
        taus = [entmax_bisect(z, 1.5, BisectConfig(max_iters=t)).tau for t in range(1, 14)]
        gaps = np.abs(np.diff(taus))
        ratios = gaps[1:] / gaps[:-1]
        np.testing.assert_allclose(ratios, 0.5, rtol=1e-9)

    def test_converges_to_exact_solvers(self):
        rng = np.random.default_rng(42)
        for d in (2, 16, 128):
            Z = rng.normal(0.0, 2.0, (500, d))
            approx15, _, _ = entmax_bisect_batch(Z, 1.5, 50)
            exact15, _, _ = entmax15_exact_batch(Z)
            assert np.abs(approx15 - exact15).max() <= 1e-6
            approx2, _, _ = entmax_bisect_batch(Z, 2.0, 50)
            exact2, _, _ = sparsemax_batch(Z)
            assert np.abs(approx2 - exact2).max() <= 1e-6

    def test_output_sums_to_one_exactly_after_normalization(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            z = rng.normal(0.0, 3.0, int(rng.integers(2, 64)))
            alpha = float(rng.uniform(1.01, 4.0))
            sol = entmax_bisect(z, alpha)
            assert abs(sol.p.sum() - 1.0) <= 1e-12
            assert (sol.p >= 0.0).all()

    def test_truncated_run_is_still_a_distribution(self):
        sol = entmax_bisect([1.0, 0.3, -0.5], 1.5, BisectConfig(max_iters=3))
        assert abs(sol.p.sum() - 1.0) <= 1e-12

    def test_normalize_flag_off_returns_raw_weights(self):
        z = np.array([1.0, 0.3, -0.5])
        raw = entmax_bisect(z, 1.5, BisectConfig(max_iters=5, normalize=False))
        np.testing.assert_allclose(raw.p, np.maximum(0.5 * z - raw.tau, 0.0) ** 2, atol=1e-12)
        assert raw.p.sum() != pytest.approx(1.0, abs=1e-6)

    def test_alpha_close_to_one(self):
        # exponent 1/(alpha-1) = 1e4: entries far below the threshold
        # underflow to exact zero, near-ties stay near-uniform
        sol = entmax_bisect([1.0, 0.999999, -800.0], 1.0 + 1e-4)
        assert abs(sol.p.sum() - 1.0) <= 1e-12
        assert sol.p[2] == 0.0
        np.testing.assert_allclose(sol.p[:2], [0.5, 0.5], atol=1e-3)

    def test_approaches_softmax_as_alpha_drops_to_one(self):
        z = [1.0, 0.0, -1.0]
        sol = entmax_bisect(z, 1.0 + 1e-6)
        np.testing.assert_allclose(sol.p, softmax(z), atol=1e-4)

    def test_shift_invariance(self):
        rng = np.random.default_rng(21)
        z = rng.normal(0.0, 2.0, 24)
        base = entmax_bisect(z, 1.7).p
        for c in (-50.0, -1.0, 3.0, 100.0):
            np.testing.assert_allclose(entmax_bisect(z + c, 1.7).p, base, atol=1e-9)

    def test_reported_tau_matches_thresholded_form(self):
        rng = np.random.default_rng(22)
        for alpha in (1.2, 1.5, 2.0, 2.9):
            z = rng.normal(0.0, 2.0, 16)
            sol = entmax_bisect(z, alpha)
            rebuilt = np.maximum((alpha - 1.0) * z - sol.tau, 0.0) ** (1.0 / (alpha - 1.0))
            np.testing.assert_allclose(sol.p, rebuilt / rebuilt.sum(), atol=1e-9)

    def test_per_row_alpha_batch(self):
        rng = np.random.default_rng(23)
        Z = rng.normal(0.0, 2.0, (8, 12))
        alphas = rng.uniform(1.1, 3.0, 8)
        P, tau, rho = entmax_bisect_batch(Z, alphas, 50)
        for i in range(8):
            sol = entmax_bisect(Z[i], float(alphas[i]))
            np.testing.assert_array_equal(P[i], sol.p)
            assert tau[i] == sol.tau
            assert rho[i] == sol.support_size

    def test_batch_rows_match_single_calls_bitwise(self):
        rng = np.random.default_rng(24)
        Z = rng.normal(0.0, 2.0, (16, 10))
        P, tau, rho = entmax_bisect_batch(Z, 1.5, 50)
        for i in range(16):
            sol = entmax_bisect(Z[i], 1.5)
            np.testing.assert_array_equal(P[i], sol.p)
            assert tau[i] == sol.tau
