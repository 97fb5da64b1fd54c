import math

import numpy as np
import pytest
from scipy.integrate import quad

from fracheston import (
    EXACT_TRANSITION,
    FULL_TRUNCATION,
    GridMismatchError,
    McConfig,
    OutOfRangeError,
    TimeGrid,
    VariancePath,
    cov_V_stationary,
    fourier_call_price,
    integrated_frac_variance,
    mc_call_price,
    mc_call_price_euler,
    mc_call_prices,
    mean_Vd,
    mean_Vd_mc,
    simulate_cir_path,
    validate_params,
)
from fracheston.simulation import _block_rng, _simulate_block

P = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, 0.2)


def _terminal_values(p, t, n_paths, steps, seed, scheme):
    grid = TimeGrid.uniform(t, steps)
    out = np.empty(n_paths)
    last = grid.nodes.size - 1

    def consume(k, v):
        if k == last:
            out[:] = v

    _simulate_block(p, grid, _block_rng(seed, 0), n_paths, scheme, consume)
    return out


class TestCirSimulation:
    def test_degenerate_constant_path(self):
        p = validate_params(0.0, 0.04, 0.0, 0.04, 0.01, 0.2)
        grid = TimeGrid.uniform(1.0, 16)
        path = simulate_cir_path(p, grid, _block_rng(1, 0))
        assert np.all(path.values == p.v0)

    def test_values_nonnegative_and_start_at_v0(self):
        # run without the Feller condition so truncation actually bites
        p = validate_params(1.0, 0.01, 0.5, 0.02, 0.0, 0.0)
        grid = TimeGrid.uniform(2.0, 400)
        path = simulate_cir_path(p, grid, _block_rng(3, 0))
        assert path.values[0] == p.v0
        assert np.all(path.values >= 0.0)

    @pytest.mark.parametrize("scheme", [FULL_TRUNCATION, EXACT_TRANSITION])
    def test_terminal_mean_matches_cir_mean(self, scheme):
        t, n = 1.0, 20000
        vals = _terminal_values(P, t, n, 200, seed=11, scheme=scheme)
        expect = P.theta + (P.v0 - P.theta) * math.exp(-P.kappa * t)
        se = vals.std(ddof=1) / math.sqrt(n)
        assert abs(vals.mean() - expect) <= 3.0 * se

    def test_schemes_agree(self):
        t, n = 1.0, 20000
        a = _terminal_values(P, t, n, 200, seed=17, scheme=FULL_TRUNCATION)
        b = _terminal_values(P, t, n, 200, seed=18, scheme=EXACT_TRANSITION)
        se = math.hypot(a.std(ddof=1) / math.sqrt(n), b.std(ddof=1) / math.sqrt(n))
        assert abs(a.mean() - b.mean()) <= 3.0 * se


class TestIntegratedFracVariance:
    def test_constant_path_exact(self):
        grid = TimeGrid.uniform(2.0, 7)
        v0, eta, d = 0.04, 0.01, 0.3
        path = VariancePath(grid, np.full(len(grid), v0))
        expect = eta * 2.0 + v0 * 2.0 ** (d + 1.0) / math.gamma(d + 2.0)
        assert integrated_frac_variance(path, d, eta, 2.0) == pytest.approx(expect, rel=1e-15)

    def test_d0_reduces_to_left_riemann(self):
        grid = TimeGrid.uniform(1.0, 4)
        vals = np.array([0.04, 0.05, 0.03, 0.06, 0.02])
        path = VariancePath(grid, vals)
        left_riemann = float(np.sum(vals[:-1] * 0.25))
        assert integrated_frac_variance(path, 0.0, 0.01, 1.0) == pytest.approx(
            0.01 + left_riemann, rel=1e-15
        )

    @pytest.mark.parametrize("d", [-0.3, 0.2])
    def test_linear_path_first_order_convergence(self, d):
        # V(s) = a + b s against the kernel has the closed form
        # a t^(d+1)/Gamma(d+2) + b t^(d+2)/Gamma(d+3)
        a, b, t = 0.03, 0.02, 1.5
        exact = a * t ** (d + 1.0) / math.gamma(d + 2.0) + b * t ** (d + 2.0) / math.gamma(d + 3.0)
        errs = []
        for n in (64, 128, 256):
            grid = TimeGrid.uniform(t, n)
            path = VariancePath(grid, a + b * grid.nodes)
            errs.append(abs(integrated_frac_variance(path, d, 0.0, t) - exact))
        assert errs[1] <= 0.6 * errs[0] and errs[2] <= 0.6 * errs[1]

    def test_floor_at_eta_t(self):
        grid = TimeGrid.uniform(1.0, 32)
        rng = _block_rng(5, 0)
        path = simulate_cir_path(P, grid, rng)
        assert integrated_frac_variance(path, P.d, P.eta, 1.0) >= P.eta * 1.0

    def test_grid_mismatch(self):
        grid = TimeGrid.uniform(1.0, 4)
        path = VariancePath(grid, np.full(5, 0.04))
        with pytest.raises(GridMismatchError):
            integrated_frac_variance(path, 0.2, 0.01, 2.0)


class TestMcCallPrice:
    def test_degenerate_zero_se_and_exact_mean(self):
        p = validate_params(0.0, 0.04, 0.0, 0.04, 0.01, 0.3)
        t, x = 1.0, 0.1
        est = mc_call_price(p, x, t, McConfig(4096, 32, seed=1))
        total_var = p.eta * t + p.v0 * t ** (p.d + 1.0) / math.gamma(p.d + 2.0)
        from fracheston import bs_call_price

        assert est.std_error <= 1e-12
        assert est.mean == pytest.approx(bs_call_price(x, t, math.sqrt(total_var / t)), rel=1e-12)

    def test_matches_fourier(self):
        t, x = 1.0, 0.0
        est = mc_call_price(P, x, t, McConfig(40000, 200, seed=2, scheme=EXACT_TRANSITION))
        ref = fourier_call_price(P, x, t)
        assert abs(est.mean - ref) <= 3.0 * est.std_error

    def test_matches_fourier_at_d0_flat_heston(self):
        # d=0, eta=0 is plain uncorrelated Heston: the same engine at d=0
        # against an independent Monte Carlo route
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.0, 0.0)
        est = mc_call_price(p, 0.1, 1.0, McConfig(40000, 200, seed=21, scheme=EXACT_TRANSITION))
        ref = fourier_call_price(p, 0.1, 1.0)
        assert abs(est.mean - ref) <= 3.0 * est.std_error

    def test_same_seed_bitwise_identical(self):
        cfg = McConfig(10000, 50, seed=42)
        a = mc_call_price(P, 0.0, 1.0, cfg)
        b = mc_call_price(P, 0.0, 1.0, cfg)
        assert a == b

    def test_worker_count_invariance(self):
        cfg = McConfig(30000, 50, seed=43)
        a = mc_call_price(P, 0.0, 1.0, cfg, n_workers=1)
        b = mc_call_price(P, 0.0, 1.0, cfg, n_workers=8)
        assert a.mean == b.mean and a.std_error == b.std_error

    def test_multi_strike_consistent_with_single(self):
        cfg = McConfig(10000, 50, seed=44)
        multi = mc_call_prices(P, [-0.1, 0.1], 1.0, cfg)
        assert multi[0] == mc_call_price(P, -0.1, 1.0, cfg)
        assert multi[1] == mc_call_price(P, 0.1, 1.0, cfg)

    def test_convergence_in_steps(self):
        # doubling resolution shrinks the bias against Fourier, within noise
        ref = fourier_call_price(P, 0.0, 1.0, quad_tol=1e-10)
        gaps = []
        ses = []
        for steps in (25, 50, 100):
            est = mc_call_price(P, 0.0, 1.0, McConfig(60000, steps, seed=7, scheme=FULL_TRUNCATION))
            gaps.append(abs(est.mean - ref))
            ses.append(est.std_error)
        assert gaps[1] <= gaps[0] + 2.0 * math.hypot(ses[0], ses[1])
        assert gaps[2] <= gaps[1] + 2.0 * math.hypot(ses[1], ses[2])


class TestMixingEstimator:
    def test_agrees_with_naive_euler_and_reduces_variance(self):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.0, 0.0)
        cfg = McConfig(40000, 100, seed=5)
        mixing = mc_call_price(p, 0.0, 1.0, cfg)
        naive = mc_call_price_euler(p, 0.0, 1.0, McConfig(40000, 100, seed=6))
        assert abs(mixing.mean - naive.mean) <= 3.0 * math.hypot(
            mixing.std_error, naive.std_error
        )
        assert mixing.std_error < naive.std_error

    def test_naive_requires_d0(self):
        with pytest.raises(OutOfRangeError):
            mc_call_price_euler(P, 0.0, 1.0, McConfig(100, 10, seed=1))


class TestMeanVdMc:
    def test_matches_analytic_positive_d(self):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, 0.3)
        t = 1.0
        est = mean_Vd_mc(p, t, McConfig(40000, 400, seed=9, scheme=EXACT_TRANSITION))
        assert abs(est.mean - mean_Vd(p, t)) <= 3.0 * est.std_error + 2e-4

    def test_matches_time_average_negative_d(self):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, -0.2)
        t = 1.0
        est = mean_Vd_mc(p, t, McConfig(40000, 400, seed=10, scheme=EXACT_TRANSITION))
        ref = quad(lambda s: mean_Vd(p, s), 0.0, t)[0] / t
        assert abs(est.mean - ref) <= 3.0 * est.std_error + 2e-4

    def test_d0_is_eta_plus_cir_mean(self):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, 0.0)
        t = 1.0
        est = mean_Vd_mc(p, t, McConfig(40000, 200, seed=11, scheme=EXACT_TRANSITION))
        expect = p.eta + p.theta + (p.v0 - p.theta) * math.exp(-p.kappa * t)
        assert abs(est.mean - expect) <= 3.0 * est.std_error


class TestCovStationary:
    def test_at_zero_lag(self):
        assert cov_V_stationary(P, 0.0) == pytest.approx(
            P.xi**2 * P.theta / (2.0 * P.kappa), rel=1e-15
        )

    def test_decreasing_in_lag(self):
        vals = [cov_V_stationary(P, h) for h in (0.0, 0.5, 1.0, 2.0)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_kappa0_rejected(self):
        p = validate_params(0.0, 0.04, 0.2, 0.04, 0.01, 0.2)
        with pytest.raises(OutOfRangeError):
            cov_V_stationary(p, 1.0)


class TestMcConfig:
    def test_validation(self):
        with pytest.raises(OutOfRangeError):
            McConfig(1, 10, seed=0)
        with pytest.raises(OutOfRangeError):
            McConfig(100, 0, seed=0)
        with pytest.raises(OutOfRangeError):
            McConfig(100, 10, seed=0, scheme="euler")
