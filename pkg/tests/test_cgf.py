import math

import numpy as np
import pytest
from scipy.integrate import quad

from fracheston import (
    CgfQuery,
    OutOfRangeError,
    PoleProximityError,
    bounds_psi,
    cgf,
    characteristic_fn,
    heston_tan_mgf,
    mean_Vd,
    moment_domain_estimate,
    riccati_solve,
    series_B_kappa0,
    series_coefficients,
    small_time_expansion,
    validate_params,
)
from fracheston.asymptotics import large_time_cgf_limit, small_time_cgf_limit

P_STD = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, 0.2)
P_TAN = validate_params(0.0, 0.04, 0.5, 0.04, 0.0, 0.0)  # kappa=0, d=0, eta=0


class TestRiccatiSolve:
    @pytest.mark.parametrize("u", [0.0, 1.0])
    def test_zero_forcing_gives_zero_solution(self, u):
        sol = riccati_solve(P_STD, CgfQuery(u=u, t=2.0))
        assert np.all(sol.B == 0.0) and np.all(sol.A == 0.0)
        assert sol.blow_up_time is None

    def test_initial_conditions(self):
        sol = riccati_solve(P_STD, CgfQuery(u=0.7, t=1.0))
        assert sol.grid.nodes[0] == 0.0
        assert sol.A[0] == 0.0 and sol.B[0] == 0.0

    def test_kappa0_d0_matches_tan_derivative_route(self):
        # B(t) = -m(t)/v0 for eta=0, kappa=0 (A vanishes)
        u, t = 2.0, 1.0
        sol = riccati_solve(P_TAN, CgfQuery(u=u, t=t), tol=1e-11)
        ref = -heston_tan_mgf(P_TAN.v0, P_TAN.xi, u, t) / P_TAN.v0
        assert sol.B[-1].real == pytest.approx(ref, rel=1e-6)

    def test_blow_up_flagged_and_truncated(self):
        sol = riccati_solve(P_STD, CgfQuery(u=5.0, t=20.0))
        assert sol.blow_up_time is not None
        assert sol.grid.nodes[-1] <= sol.blow_up_time
        assert np.all(np.isfinite(sol.B))

    def test_rejects_nonpositive_tolerance(self):
        with pytest.raises(OutOfRangeError):
            riccati_solve(P_STD, CgfQuery(u=0.5, t=1.0), tol=0.0)

    def test_node_budget_exhaustion(self):
        from fracheston import QuadratureFailureError

        with pytest.raises(QuadratureFailureError):
            riccati_solve(P_STD, CgfQuery(u=0.5, t=50.0), tol=1e-12, max_nodes=5)


class TestCgf:
    def test_zero_at_u0(self):
        assert cgf(P_STD, CgfQuery(u=0.0, t=3.0)).value == 0.0

    def test_martingale(self):
        for t in (0.1, 1.0, 10.0):
            assert abs(cgf(P_STD, CgfQuery(u=1.0, t=t)).value) <= 1e-8

    def test_tan_closed_form_pinned(self):
        # (v0/xi) sqrt(2) tan(xi sqrt(2)/2) at v0=0.04, xi=0.5, u=2, t=1
        res = cgf(P_TAN, CgfQuery(u=2.0, t=1.0), tol=1e-11)
        assert res.value.real == pytest.approx(0.04175444123580944604, rel=1e-6)

    def test_blow_up_status(self):
        res = cgf(P_STD, CgfQuery(u=5.0, t=20.0))
        assert res.status == "blew_up"
        assert not res.converged
        assert math.isinf(res.value.real)

    def test_convexity_in_u(self):
        t = 1.0
        us = [0.1, 0.45, 0.8]
        vals = [cgf(P_STD, CgfQuery(u=u, t=t)).value.real for u in us]
        lam = (us[1] - us[0]) / (us[2] - us[0])
        assert vals[1] <= (1 - lam) * vals[0] + lam * vals[2] + 1e-12

    def test_w_derivative_matches_mean_Vd(self):
        # h large enough that solver noise in the O(h) CGF values stays
        # below the O(h^2) central-difference truncation
        for d in (0.3, -0.2):
            p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, d)
            h = 1e-4
            up = cgf(p, CgfQuery(u=0.0, t=2.0, w=h), tol=1e-12).value.real
            dn = cgf(p, CgfQuery(u=0.0, t=2.0, w=-h), tol=1e-12).value.real
            assert (up - dn) / (2 * h) == pytest.approx(mean_Vd(p, 2.0), rel=1e-5)

    def test_w_rejected_at_d0(self):
        with pytest.raises(OutOfRangeError):
            cgf(validate_params(1.0, 0.04, 0.2, 0.04, 0.01, 0.0), CgfQuery(u=0.0, t=1.0, w=0.5))


class TestCgfBatch:
    def test_matches_scalar_queries(self):
        from fracheston import cgf_batch

        us = np.array([0.2, 0.5, 0.8])
        values, blown = cgf_batch(P_STD, us, 1.5, tol=1e-11)
        assert not blown.any()
        for u, v in zip(us, values):
            single = cgf(P_STD, CgfQuery(u=float(u), t=1.5), tol=1e-11).value.real
            assert v == pytest.approx(single, rel=1e-8)

    def test_mixed_blow_up_marking(self):
        from fracheston import cgf_batch

        values, blown = cgf_batch(P_STD, np.array([0.5, 5.0]), 20.0)
        assert list(blown) == [False, True]
        assert np.isfinite(values[0]) and np.isinf(values[1])


class TestCharacteristicFn:
    def test_normalisation(self):
        assert characteristic_fn(P_STD, 0.0, 1.0) == pytest.approx(1.0, abs=1e-10)

    def test_martingale_point(self):
        assert characteristic_fn(P_STD, 1.0, 1.0) == pytest.approx(1.0, abs=1e-10)

    def test_modulus_bound(self):
        z = 0.5 + 3.0j
        phi = characteristic_fn(P_STD, z, 1.0)
        bound = math.exp(cgf(P_STD, CgfQuery(u=0.5, t=1.0)).value.real)
        assert abs(phi) <= bound + 1e-12

    def test_conjugate_symmetry(self):
        z = 0.3 + 2.0j
        a = characteristic_fn(P_STD, z, 1.5)
        b = characteristic_fn(P_STD, z.conjugate(), 1.5)
        assert b == pytest.approx(a.conjugate(), rel=1e-9)

    def test_strip_enforced(self):
        with pytest.raises(OutOfRangeError):
            characteristic_fn(P_STD, 1.5 + 0.0j, 1.0)


class TestSeries:
    def test_alpha1_is_one(self):
        p = validate_params(0.0, 0.04, 0.5, 0.04, 0.0, 0.2)
        assert series_coefficients(p, 0.5, 4).alpha[0] == 1.0

    def test_alpha2_one_recursion_step(self):
        # alpha_2 = -xi^2 / (2 (2d+3)); at d=0 this is -xi^2/6
        p = validate_params(0.0, 0.04, 0.5, 0.04, 0.0, 0.2)
        a2 = series_coefficients(p, 0.5, 4).alpha[1]
        assert a2 == pytest.approx(-0.25 / (2 * 3.4), rel=1e-15)
        p0 = validate_params(0.0, 0.04, 0.5, 0.04, 0.0, 0.0)
        assert series_coefficients(p0, 0.5, 4).alpha[1] == pytest.approx(-0.25 / 6, rel=1e-15)

    def test_taylor_pattern_d0(self):
        # sum (-1)^(i+1) alpha_i (u^2/2)^i = u^2/2 + xi^2 u^4/24 + xi^4 u^6/240 + ...
        xi = 0.5
        p0 = validate_params(0.0, 0.04, xi, 0.04, 0.0, 0.0)
        alpha = series_coefficients(p0, 0.5, 3).alpha
        assert alpha[0] == pytest.approx(1.0, rel=1e-12)
        assert -alpha[1] / 4.0 == pytest.approx(xi**2 / 24.0, rel=1e-12)
        assert alpha[2] / 8.0 == pytest.approx(xi**4 / 240.0, rel=1e-12)

    @pytest.mark.parametrize("d,t", [(-0.3, 0.8), (0.2, 0.9)])
    def test_series_matches_ode(self, d, t):
        p = validate_params(0.0, 0.04, 0.5, 0.04, 0.0, d)
        u = 0.5
        coeffs = series_coefficients(p, u, 2)
        assert abs(coeffs.zeta) * t ** (d + 2.0) < 0.125
        b_series = series_B_kappa0(p, u, t, n_terms=80)
        b_ode = riccati_solve(p, CgfQuery(u=u, t=t), tol=1e-12).B[-1].real
        assert b_series == pytest.approx(b_ode, rel=1e-6)

    def test_radius_guard(self):
        p = validate_params(0.0, 0.04, 0.5, 0.04, 0.0, 0.0)
        with pytest.raises(OutOfRangeError):
            series_B_kappa0(p, 8.0, 1.0)

    def test_requires_kappa0(self):
        with pytest.raises(OutOfRangeError):
            series_B_kappa0(P_STD, 0.5, 0.5)


class TestHestonTan:
    @pytest.mark.parametrize("u", [0.0, 1.0])
    def test_vanishes_at_end_points(self, u):
        assert heston_tan_mgf(0.04, 0.5, u, 1.0) == 0.0

    def test_pinned_value(self):
        # 0.08 sqrt(2) tan(sqrt(2)/4), 25-digit reference
        assert heston_tan_mgf(0.04, 0.5, 2.0, 1.0) == pytest.approx(
            0.04175444123580944604175763, rel=1e-15
        )

    def test_tanh_branch_real_and_negative(self):
        val = heston_tan_mgf(0.04, 0.5, 0.5, 1.0)
        assert val == pytest.approx(-0.004974120070863848322, rel=1e-14)

    def test_pole_proximity(self):
        # xi t sqrt(2)/2 = pi/2 at t = pi sqrt(2)/xi / 2 for u = 2
        xi = 0.5
        t_pole = math.pi / (xi * math.sqrt(2.0))
        with pytest.raises(PoleProximityError):
            heston_tan_mgf(0.04, xi, 2.0, t_pole)

    def test_xi_zero_degenerates_to_bs(self):
        assert heston_tan_mgf(0.04, 0.0, 2.0, 1.0) == pytest.approx(0.04 * 2.0 * 1.0 / 2.0)


class TestSmallTimeExpansion:
    def test_u1_vanishes(self):
        assert small_time_expansion(P_STD, 1.0, 0.01, order=1) == 0.0
        assert small_time_expansion(P_STD, 1.0, 0.01, order=2) == 0.0

    def test_kappa0_eta0_exact_first_term(self):
        p = validate_params(0.0, 0.04, 0.2, 0.04, 0.0, 0.2)
        u, t = 2.0, 0.01
        expect = p.v0 * u * (u - 1.0) * t ** (p.d + 1.0) / (2.0 * math.gamma(p.d + 2.0))
        assert small_time_expansion(p, u, t, order=2) == pytest.approx(expect, rel=1e-15)

    def test_order2_residual_decays_faster_than_t_power(self):
        # |m - expansion| = o(t^(d+2)) checked by decay of the scaled residual;
        # the true remainder is O(t^(d+1)) relative, so one decade in t should
        # shrink the ratio by >= 10x (ladder stops before the solver noise floor)
        p = P_STD
        u = 2.0
        ratios = []
        for t in (1e-1, 1e-2, 1e-3):
            m = cgf(p, CgfQuery(u=u, t=t), tol=1e-12).value.real
            resid = abs(m - small_time_expansion(p, u, t, order=2))
            ratios.append(resid / t ** (p.d + 2.0))
        assert ratios[1] < 0.2 * ratios[0]
        assert ratios[2] < 0.2 * ratios[1]

    def test_order_validated(self):
        with pytest.raises(OutOfRangeError):
            small_time_expansion(P_STD, 0.5, 0.1, order=3)


class TestBoundsPsi:
    def test_t0_values(self):
        lo, hi = bounds_psi(P_STD, 0.7, 0.0)
        assert lo == pytest.approx(-2.0 * P_STD.kappa / P_STD.xi**2)
        assert hi == pytest.approx(0.0, abs=1e-13)

    def test_u0_constant_in_t(self):
        for t in (0.0, 1.0, 7.0):
            lo, hi = bounds_psi(P_STD, 0.0, t)
            assert lo == pytest.approx(-2.0 * P_STD.kappa / P_STD.xi**2)
            assert hi == pytest.approx(0.0, abs=1e-13)

    def test_sandwich_on_grid(self):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.0, 0.2)
        sol = riccati_solve(p, CgfQuery(u=0.5, t=10.0), tol=1e-10, dt_max=0.25)
        lo, hi = bounds_psi(p, 0.5, sol.grid.nodes)
        b = sol.B.real
        assert np.all(b >= lo - 1e-9) and np.all(b <= hi + 1e-9)

    def test_xi0_rejected(self):
        with pytest.raises(OutOfRangeError):
            bounds_psi(validate_params(1.0, 0.04, 0.0, 0.04, 0.0, 0.2), 0.5, 1.0)


class TestMomentDomain:
    def test_contains_martingale_interval(self):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, -0.2)
        u_minus, u_plus = moment_domain_estimate(p, t_horizon=200.0, tol=5e-2)
        assert u_minus <= 0.0 and u_plus >= 1.0

    def test_interior_point_never_blows(self):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, -0.2)
        res = cgf(p, CgfQuery(u=0.5, t=200.0))
        assert res.converged

    def test_tol_halving_moves_endpoints_at_most_tol(self):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, -0.2)
        coarse = moment_domain_estimate(p, t_horizon=50.0, tol=2e-1, tol_ode=1e-6)
        fine = moment_domain_estimate(p, t_horizon=50.0, tol=1e-1, tol_ode=1e-6)
        assert abs(coarse[0] - fine[0]) <= 2e-1 + 1e-12
        assert abs(coarse[1] - fine[1]) <= 2e-1 + 1e-12

    def test_requires_negative_d(self):
        with pytest.raises(OutOfRangeError):
            moment_domain_estimate(P_STD)

    def test_horizon_too_short(self):
        from fracheston import HorizonTooShortError

        # kappa-dominated regime: the quasi-equilibrium |B| ~ cu s^d / kappa
        # stays far below the divergence threshold even at u = 64, so no
        # outside point can be bracketed at this short horizon
        p = validate_params(5.0, 0.04, 0.01, 0.04, 0.01, -0.2)
        with pytest.raises(HorizonTooShortError):
            moment_domain_estimate(p, t_horizon=1.0, tol=1e-2)


class TestMeanVd:
    def test_t0_positive_d(self):
        assert mean_Vd(P_STD, 0.0) == P_STD.eta

    def test_kappa0_closed_form(self):
        p = validate_params(0.0, 0.04, 0.2, 0.04, 0.01, 0.3)
        t = 1.7
        expect = p.eta + p.v0 * t**p.d / math.gamma(p.d + 1.0)
        assert mean_Vd(p, t) == pytest.approx(expect, rel=1e-14)

    def test_d_to_zero_recovers_cir_mean(self):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, 1e-8)
        t = 2.0
        cir_mean = p.theta + (p.v0 - p.theta) * math.exp(-p.kappa * t)
        assert mean_Vd(p, t) == pytest.approx(p.eta + cir_mean, rel=1e-6)

    def test_matches_direct_singular_quadrature_for_positive_d(self):
        # independent route: raw kernel (t-s)^(d-1)/Gamma(d) against the mean
        p = validate_params(1.2, 0.05, 0.3, 0.02, 0.01, 0.3)
        t = 1.3
        mean = lambda s: p.theta + (p.v0 - p.theta) * math.exp(-p.kappa * s)
        raw, _ = quad(mean, 0.0, t, weight="alg", wvar=(0.0, p.d - 1.0))
        expect = p.eta + raw / math.gamma(p.d)
        assert mean_Vd(p, t) == pytest.approx(expect, rel=1e-9)


class TestIndependentStepperOracle:
    """The in-package DP5(4) stepper against scipy's solve_ivp (an
    independent integrator) on the same regularised equation

        C' = -kappa C - xi^2/2 C^2 + xi^2 pw s^d C - q1 s^d - q2 s^(2d),

    with B = C - pw s^d (the substitution that removes the s^(d-1) forcing;
    it is itself validated by dm/dw = E V^d and the closed-form oracles)."""

    @pytest.mark.parametrize(
        "kappa,theta,xi,d,u,w,t",
        [
            (1.0, 0.04, 0.2, 0.2, 0.7, 0.0, 2.0),
            (1.0, 0.04, 0.2, -0.2, 0.3, 0.0, 2.0),
            (0.5, 0.09, 0.6, 0.45, -0.5, 0.0, 1.0),
            (2.0, 0.02, 0.3, -0.45, 1.5, 0.0, 0.5),
            (1.0, 0.04, 0.2, 0.3, 0.5, 0.2, 1.0),
            (1.0, 0.04, 0.2, -0.2, 0.5, -0.1, 1.0),
            (1.0, 0.04, 0.2, -0.45, 0.5, 0.2, 1.5),
        ],
    )
    def test_terminal_B_and_A_match_scipy(self, kappa, theta, xi, d, u, w, t):
        from scipy.integrate import solve_ivp

        p = validate_params(kappa, theta, xi, 0.04, 0.01, d)
        sol = riccati_solve(p, CgfQuery(u=u, t=t, w=w), tol=1e-11)

        cu = u * (u - 1.0) / (2.0 * math.gamma(d + 1.0))
        pw = w / math.gamma(d + 1.0) if w else 0.0
        q1 = cu - kappa * pw
        q2 = 0.5 * xi**2 * pw * pw
        lin = xi**2 * pw
        s0 = min(t / 2.0, 1e-8)
        y0 = [
            -q1 * s0 ** (d + 1.0) / (d + 1.0)
            - (q2 * s0 ** (2 * d + 1.0) / (2 * d + 1.0) if w else 0.0),
            -q1 * s0 ** (d + 2.0) / ((d + 1.0) * (d + 2.0))
            - (q2 * s0 ** (2 * d + 2.0) / ((2 * d + 1.0) * (2 * d + 2.0)) if w else 0.0),
        ]

        def rhs(s, y):
            c = y[0]
            dc = -kappa * c - 0.5 * xi**2 * c * c - q1 * s**d
            if w:
                dc += lin * s**d * c - q2 * s ** (2.0 * d)
            return [dc, c]

        ref = solve_ivp(rhs, (s0, t), y0, method="RK45", rtol=1e-11, atol=1e-14)
        assert ref.success
        b_ref = ref.y[0, -1] - pw * t**d
        i_ref = ref.y[1, -1] - pw * t ** (d + 1.0) / (d + 1.0)
        assert sol.B[-1].real == pytest.approx(b_ref, rel=1e-7, abs=1e-12)
        assert sol.A[-1].real == pytest.approx(-kappa * theta * i_ref, rel=1e-7, abs=1e-12)


class TestEndpointOrders:
    @pytest.mark.parametrize("d", [-0.5, 0.5])
    def test_cgf_and_martingale_at_endpoints(self, d):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, d)
        assert abs(cgf(p, CgfQuery(u=1.0, t=1.0)).value) <= 1e-8
        res = cgf(p, CgfQuery(u=0.5, t=1.0))
        assert res.converged and res.value.real < 0.0

    @pytest.mark.parametrize("d", [-0.5, 0.5])
    def test_fourier_price_at_endpoints(self, d):
        from fracheston import fourier_call_price

        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, d)
        c = fourier_call_price(p, 0.0, 1.0)
        assert 0.0 < c < 1.0


class TestScaledLimits:
    def test_small_time_negative_d(self):
        p = validate_params(0.0, 0.04, 0.2, 0.04, 0.0, -0.2)
        u, t = 1.0, 1e-4
        delta = 1.0 + p.d
        scaled = t**delta * cgf(p, CgfQuery(u=u / t**delta, t=t), tol=1e-9).value.real
        assert scaled == pytest.approx(small_time_cgf_limit(p, u), rel=1e-3)

    def test_large_time_positive_d(self):
        p = validate_params(0.007, 0.04, 2.0, 1e-4, 0.0, 0.2)
        u, t = 0.5, 800.0
        scaled = cgf(p, CgfQuery(u=u, t=t), tol=1e-11).value.real / t ** (1.0 + p.d / 2.0)
        assert scaled == pytest.approx(large_time_cgf_limit(p, u), rel=6e-3)

    def test_kappa_positive_small_time_conjecture(self):
        # acceptance binds only for kappa=0; empirical support for kappa>0
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.0, -0.2)
        u, t = 1.0, 1e-4
        delta = 1.0 + p.d
        scaled = t**delta * cgf(p, CgfQuery(u=u / t**delta, t=t), tol=1e-9).value.real
        assert scaled == pytest.approx(small_time_cgf_limit(p, u), rel=1e-3)
