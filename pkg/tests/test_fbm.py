import math
import time

import numpy as np
import pytest

from helpers import naive_convolve
from roughmc.fbm import (
    SCHEMES,
    cholesky_factor,
    cholesky_simulate,
    convolve_paths,
    fbm_covariance,
    fgn_autocovariance,
    fgn_covariance_matrix,
    hybrid_simulate,
    hybrid_weights,
    kernel,
    optimal_bk,
    rdonsker_kernel_samples,
    rdonsker_simulate,
    rescale_by_self_similarity,
    simulate,
)
from roughmc.rng import GridSpec, SeedSpec, hybrid_sigma, path_normals


class TestAutocovariance:
    def test_lag_zero_is_one(self):
        for hurst in (0.05, 0.3, 0.5, 0.9):
            assert fgn_autocovariance(0, hurst) == pytest.approx(1.0)

    def test_brownian_increments_independent(self):
        assert fgn_autocovariance(1, 0.5) == pytest.approx(0.0, abs=1e-15)

    def test_rough_lag_one_frozen(self):
        # 0.5 * (2^0.3 - 2) evaluated at high precision.
        assert fgn_autocovariance(1, 0.15) == pytest.approx(
            -0.3844277933275419, abs=1e-12
        )

    def test_rejects_negative_lag(self):
        with pytest.raises(ValueError):
            fgn_autocovariance(-1, 0.3)


class TestFbmCovariance:
    def test_variance_at_one(self):
        for hurst in (0.05, 0.25, 0.75):
            assert fbm_covariance(1.0, 1.0, hurst) == pytest.approx(1.0)

    def test_brownian_is_min(self):
        assert fbm_covariance(1.0, 2.0, 0.5) == pytest.approx(1.0)

    def test_cancellation_case(self):
        assert fbm_covariance(1.0, 0.5, 0.25) == pytest.approx(0.5)

    def test_matches_cumsum_of_fgn_covariances(self):
        # r(t_i, t_j) must equal the summed autocovariances of unit-lag noise
        # rescaled to the grid, tying both formulas together.
        hurst, n = 0.3, 8
        cov = fgn_covariance_matrix(n, hurst)
        scale = float(n) ** (-2 * hurst)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                summed = cov[:i, :j].sum() * scale
                assert summed == pytest.approx(
                    fbm_covariance(i / n, j / n, hurst), rel=1e-12
                )


class TestOptimalBk:
    def test_frozen_value(self):
        # Closed form at k=2, H=0.07, evaluated at high precision.
        assert optimal_bk(2, 0.07) == pytest.approx(1.4591263460127543, rel=1e-12)

    def test_bracketed_by_cell(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            hurst = rng.uniform(0.01, 0.99)
            if abs(hurst - 0.5) < 1e-3:
                continue
            k = int(rng.integers(2, 10_000))
            b = optimal_bk(k, hurst)
            assert k - 1 <= b <= k

    def test_weight_tends_to_one_near_brownian(self):
        n = 64
        for hurst in (0.4999, 0.5001):
            w = (optimal_bk(np.arange(2, n + 1), hurst) / n) ** (hurst - 0.5)
            np.testing.assert_allclose(w, 1.0, atol=2e-3)

    def test_rejects_degenerate_arguments(self):
        with pytest.raises(ValueError):
            optimal_bk(2, 0.5)
        with pytest.raises(ValueError):
            optimal_bk(1, 0.3)


class TestConvolution:
    @pytest.mark.parametrize("n", [1, 2, 3, 5, 16, 257])
    def test_fft_equals_naive(self, n):
        rng = np.random.default_rng(n)
        kernel_vec = rng.standard_normal(n + 1)
        kernel_vec[0] = 0.0
        inc = rng.standard_normal((4, n))
        np.testing.assert_allclose(
            convolve_paths(kernel_vec, inc),
            naive_convolve(kernel_vec, inc),
            atol=1e-12,
        )


class TestCholesky:
    def test_factor_reconstructs_covariance(self):
        hurst, n = 0.15, 256
        factor = cholesky_factor(n, hurst)
        recon = factor @ factor.T
        err = np.abs(recon - fgn_covariance_matrix(n, hurst)).max()
        assert err < 1e-10

    def test_brownian_paths_are_wiener_cumsums(self):
        batch = cholesky_simulate(GridSpec(1.0, 64), 0.5, 16, SeedSpec(0, 0))
        np.testing.assert_allclose(
            batch.paths[:, 1:], np.cumsum(batch.wiener_increments, axis=1),
            atol=1e-14,
        )

    def test_rough_paths_cumsum_scaled_noise(self):
        # Path increments are unit-lag fGn rescaled by n^-H.
        hurst, n = 0.2, 32
        batch = cholesky_simulate(GridSpec(1.0, n), hurst, 8, SeedSpec(4, 0))
        inc = np.diff(batch.paths, axis=1)
        z = batch.wiener_increments * math.sqrt(n)
        factor = cholesky_factor(n, hurst)
        np.testing.assert_allclose(inc, (z @ factor.T) * n**-hurst, atol=1e-12)

    def test_empirical_covariance_on_subgrid(self):
        hurst, n, p = 0.15, 252, 20_000
        batch = cholesky_simulate(GridSpec(1.0, n), hurst, p, SeedSpec(12, 0))
        idx = [50, 100, 150, 200, 252]
        y = batch.paths[:, idx]
        emp = (y.T @ y) / p
        for a, ia in enumerate(idx):
            for b, ib in enumerate(idx):
                exact = fbm_covariance(ia / n, ib / n, hurst)
                se = math.sqrt(
                    (fbm_covariance(ia / n, ia / n, hurst)
                     * fbm_covariance(ib / n, ib / n, hurst) + exact**2) / p
                )
                assert abs(emp[a, b] - exact) < 5.0 * se


class TestHybrid:
    def test_brownian_shortcut(self):
        batch = hybrid_simulate(GridSpec(1.0, 64), 0.5, 40_000, SeedSpec(8, 0))
        np.testing.assert_allclose(
            batch.paths[:, 1:], np.cumsum(batch.wiener_increments, axis=1),
            atol=1e-14,
        )
        var = batch.paths[:, -1].var(ddof=1)
        se = math.sqrt(2.0 / 40_000)
        assert abs(var - 1.0) < 5.0 * se

    def test_matches_naive_reconstruction(self):
        # Rebuild the scheme from scratch: split each stream into the two
        # normal blocks, apply the 2x2 Cholesky factor of the step
        # covariance, and run the O(n^2) convolution oracle.
        hurst, n, p = 0.1, 256, 4
        seed = SeedSpec(21, 0)
        batch = hybrid_simulate(GridSpec(1.0, n), hurst, p, seed)
        sigma = hybrid_sigma(GridSpec(1.0, n), hurst)
        z = path_normals(seed, p, 2 * n)
        a = math.sqrt(sigma.var1)
        b = sigma.cov / a
        c = math.sqrt(sigma.var2 - b * b)
        dw = a * z[:, :n]
        recent = b * z[:, :n] + c * z[:, n:]
        np.testing.assert_array_equal(batch.wiener_increments, dw)
        expected = math.sqrt(2.0 * hurst) * (
            recent + naive_convolve(hybrid_weights(n, hurst), dw)
        )
        np.testing.assert_allclose(batch.paths[:, 1:], expected, atol=1e-10)

    def test_first_step_variance_exact(self):
        # Var[Y_{t_1}] = t_1^(2H): only the exact kernel integral contributes.
        hurst, n, p = 0.07, 128, 60_000
        batch = hybrid_simulate(GridSpec(1.0, n), hurst, p, SeedSpec(33, 0))
        target = (1.0 / n) ** (2 * hurst)
        var = batch.paths[:, 1].var(ddof=1)
        assert abs(var - target) < 5.0 * target * math.sqrt(2.0 / p)


class TestRdonsker:
    def test_brownian_shortcut_is_exact_cumsum(self):
        batch = rdonsker_simulate(GridSpec(1.0, 32), 0.5, 8, SeedSpec(2, 0))
        np.testing.assert_allclose(
            batch.paths[:, 1:], np.cumsum(batch.wiener_increments, axis=1),
            atol=1e-14,
        )

    def test_kernel_samples_preserve_cell_energy(self):
        # Summed squared samples telescope so every grid variance is exact.
        hurst, n = 0.05, 512
        g = rdonsker_kernel_samples(n, hurst)
        for i in (1, 7, 100, n):
            var = (g[1 : i + 1] ** 2).sum() / n
            assert var == pytest.approx((i / n) ** (2 * hurst), rel=1e-12)

    def test_samples_sit_inside_their_cells(self):
        hurst, n = 0.12, 64
        g = rdonsker_kernel_samples(n, hurst)
        for k in range(1, n + 1):
            lo = kernel(k / n, hurst)
            hi = np.inf if k == 1 else kernel((k - 1) / n, hurst)
            assert lo <= g[k] <= hi

    def test_matches_naive_convolution_path(self):
        hurst, n = 0.3, 200
        batch = rdonsker_simulate(GridSpec(1.0, n), hurst, 4, SeedSpec(5, 0))
        expected = naive_convolve(
            rdonsker_kernel_samples(n, hurst), batch.wiener_increments
        )
        np.testing.assert_allclose(batch.paths[:, 1:], expected, atol=1e-10)


@pytest.mark.parametrize("scheme", SCHEMES)
class TestSchemeInvariants:
    def test_paths_start_at_zero(self, scheme):
        batch = simulate(scheme, GridSpec(1.0, 64), 0.2, 32, SeedSpec(1, 0))
        assert np.all(batch.paths[:, 0] == 0.0)

    def test_moment_laws_and_driving_noise(self, scheme):
        hurst, p = 0.25, 20_000
        grid = GridSpec(1.3, 256)
        batch = simulate(scheme, grid, hurst, p, SeedSpec(10, 0))
        t_end = grid.horizon
        target_var = t_end ** (2 * hurst)
        end = batch.paths[:, -1]
        assert abs(end.mean()) < 5.0 * end.std(ddof=1) / math.sqrt(p)
        assert abs(end.var(ddof=1) - target_var) < 5.0 * target_var * math.sqrt(2.0 / p)
        # increments of the driving Wiener process have variance dt
        dw = batch.wiener_increments
        assert abs(dw.var() - grid.dt) < 5.0 * grid.dt * math.sqrt(2.0 / dw.size)
        # positive kernel makes the fBm co-move with its driver
        w_end = dw.sum(axis=1)
        assert np.corrcoef(end, w_end)[0, 1] > 0.0

    def test_batch_split_reproducibility(self, scheme):
        grid, hurst = GridSpec(1.0, 32), 0.35
        seed = SeedSpec(77, 0)
        whole = simulate(scheme, grid, hurst, 6, seed)
        head = simulate(scheme, grid, hurst, 2, seed)
        tail = simulate(scheme, grid, hurst, 4, seed.shifted(2))
        np.testing.assert_array_equal(
            whole.paths, np.vstack([head.paths, tail.paths])
        )

    def test_rejects_bad_arguments(self, scheme):
        with pytest.raises(ValueError):
            simulate(scheme, GridSpec(1.0, 8), 1.2, 4, SeedSpec(0, 0))
        with pytest.raises(ValueError):
            simulate(scheme, GridSpec(1.0, 8), 0.3, 0, SeedSpec(0, 0))


class TestRescale:
    def test_identity_on_unit_horizon(self):
        batch = hybrid_simulate(GridSpec(1.0, 16), 0.2, 4, SeedSpec(6, 0))
        assert rescale_by_self_similarity(batch, 1.0) is batch

    def test_brownian_doubling(self):
        batch = rdonsker_simulate(GridSpec(1.0, 16), 0.5, 4, SeedSpec(6, 0))
        scaled = rescale_by_self_similarity(batch, 4.0)
        np.testing.assert_allclose(scaled.paths, 2.0 * batch.paths)
        np.testing.assert_allclose(
            scaled.wiener_increments, 2.0 * batch.wiener_increments
        )
        assert scaled.grid.horizon == 4.0

    def test_end_variance_scales_by_self_similarity(self):
        hurst, p, horizon = 0.2, 20_000, 2.5
        batch = simulate("hybrid", GridSpec(horizon, 128), hurst, p, SeedSpec(14, 0))
        target = horizon ** (2 * hurst)
        var = batch.paths[:, -1].var(ddof=1)
        assert abs(var - target) < 5.0 * target * math.sqrt(2.0 / p)

    def test_rejects_bad_horizon_or_source(self):
        batch = hybrid_simulate(GridSpec(1.0, 16), 0.2, 4, SeedSpec(6, 0))
        with pytest.raises(ValueError):
            rescale_by_self_similarity(batch, 0.0)
        scaled = rescale_by_self_similarity(batch, 2.0)
        with pytest.raises(ValueError):
            rescale_by_self_similarity(scaled, 3.0)


def test_cross_scheme_moment_agreement():
    # All three samplers must hit the exact absolute moments q = 0..6 at the
    # end value within five exact standard errors, which bounds any pair of
    # schemes to the same Monte-Carlo noise band.
    from roughmc.diagnostics import sample_abs_moment, theoretical_abs_moment

    hurst, n, p = 0.15, 252, 10_000
    for scheme in SCHEMES:
        batch = simulate(scheme, GridSpec(1.0, n), hurst, p, SeedSpec(19, 0))
        for q in range(7):
            exact = theoretical_abs_moment(q, 1.0, hurst)
            var_q = theoretical_abs_moment(2 * q, 1.0, hurst) - exact**2
            tol = 5.0 * math.sqrt(var_q / p) if q else 1e-15
            err = abs(sample_abs_moment(batch, q, n) - exact)
            assert err < max(tol, 1e-15), (scheme, q, err, tol)


def test_unknown_scheme_rejected():
    with pytest.raises(ValueError):
        simulate("spectral", GridSpec(1.0, 8), 0.3, 4, SeedSpec(0, 0))


def test_cost_increases_with_resolution():
    # Coarse sanity check of the cost model; widely separated sizes keep the
    # comparison robust to scheduler noise.
    p = 300
    for scheme, small, big in (
        ("cholesky", 128, 1024),
        ("hybrid", 128, 2048),
        ("rdonsker", 128, 2048),
    ):
        times = {}
        for n in (small, big):
            best = math.inf
            for _ in range(3):
                t0 = time.perf_counter()
                simulate(scheme, GridSpec(1.0, n), 0.1, p, SeedSpec(3, 0))
                best = min(best, time.perf_counter() - t0)
            times[n] = best
        assert times[big] > times[small]
