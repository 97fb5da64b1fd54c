"""Runtime verification suites: oracle, bound, limit, and consistency checks.

Each criterion function returns a list of CheckRow records (name, expected,
observed, tolerance, pass flag) so the CLI can emit one CSV row per check
and the acceptance tests can assert on the same data. Monotone-trend checks
encode "number of violations" as the observed value with tolerance 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import (
    fenchel_legendre,
    lambda_plus,
    large_time_cgf_limit,
    rate_minus_star,
    rate_plus_star,
    small_time_cgf_limit,
)
from .cgf import (
    CgfQuery,
    bounds_psi,
    cgf,
    heston_tan_mgf,
    riccati_solve,
    series_B_kappa0,
    series_coefficients,
)
from .model import validate_params
from .pricing import OptionQuote, bs_call_price, fourier_call_price, implied_vol
from .simulation import (
    EXACT_TRANSITION,
    McConfig,
    mc_call_price,
    mc_call_price_euler,
    mc_call_prices,
)


@dataclass(frozen=True)
class CheckRow:
    name: str
    expected: float
    observed: float
    tolerance: float
    passed: bool


def _row(name, expected, observed, tolerance, mode="abs"):
    if mode == "rel":
        err = abs(observed - expected) / abs(expected)
    else:
        err = abs(observed - expected)
    return CheckRow(name, expected, observed, tolerance, bool(err <= tolerance))


def rows_pass(rows) -> bool:
    return all(r.passed for r in rows)


# -- criterion 1 -------------------------------------------------------------


def criterion_martingale(tol: float = 1e-8):
    """|m(1, 0, t)| <= 1e-8 over a (kappa, xi, d) x t grid."""
    rows = []
    for kappa in (0.0, 0.5, 2.0):
        for xi in (0.0, 0.2, 0.6):
            for d in (-0.3, 0.0, 0.3):
                p = validate_params(kappa, 0.04, xi, 0.04, 0.01, d)
                for t in (0.1, 1.0, 10.0):
                    value = cgf(p, CgfQuery(u=1.0, t=t)).value
                    rows.append(
                        _row(
                            f"martingale[k={kappa},xi={xi},d={d},t={t}]",
                            0.0,
                            abs(value),
                            tol,
                        )
                    )
    return rows


# -- criterion 2 -------------------------------------------------------------


def criterion_tan_oracle(tol: float = 1e-6):
    """kappa=0, d=0, eta=0: ODE CGF against the tan/tanh closed form."""
    v0, xi = 0.04, 0.5
    p = validate_params(0.0, 0.04, xi, v0, 0.0, 0.0)
    rows = []
    for u in (-1.0, 0.5, 2.0):
        for t in (0.25, 1.0):
            ref = heston_tan_mgf(v0, xi, u, t)
            got = cgf(p, CgfQuery(u=u, t=t), tol=1e-11).value.real
            rows.append(_row(f"tan_oracle[u={u},t={t}]", ref, got, tol, mode="rel"))
    return rows


# -- criterion 3 -------------------------------------------------------------


def criterion_series_oracle(tol_ode: float = 1e-6, tol_coeff: float = 1e-12):
    """kappa=0 power series vs ODE B(t), plus the d=0 Taylor pattern."""
    rows = []
    for d, t in ((-0.3, 0.8), (0.2, 0.9)):
        p = validate_params(0.0, 0.04, 0.5, 0.04, 0.0, d)
        u = 0.5
        coeffs = series_coefficients(p, u, 8)
        ratio = abs(coeffs.zeta) * t ** (d + 2.0)
        assert ratio < 0.125, "test setup must stay inside |zeta t^(d+2)| < 1/8"
        b_series = series_B_kappa0(p, u, t, n_terms=80)
        sol = riccati_solve(p, CgfQuery(u=u, t=t), tol=1e-12)
        b_ode = sol.B[-1].real
        rows.append(_row(f"series_vs_ode[d={d}]", b_series, b_ode, tol_ode, mode="rel"))
    xi = 0.5
    p0 = validate_params(0.0, 0.04, xi, 0.04, 0.0, 0.0)
    alpha = series_coefficients(p0, 0.5, 3).alpha
    # Taylor pattern u^2/2 + xi^2 u^4/24 + xi^4 u^6/240 pins alpha_1..alpha_3
    targets = (1.0, -(xi**2) / 6.0, xi**4 / 30.0)
    for i, (a, target) in enumerate(zip(alpha, targets), start=1):
        rows.append(_row(f"series_taylor[alpha_{i}]", target, a, tol_coeff, mode="rel"))
    return rows


# -- criterion 4 -------------------------------------------------------------


def _scaled_small_time(p, u, t, tol):
    delta = 1.0 + p.d if p.d < 0.0 else 1.0
    res = cgf(p, CgfQuery(u=u / t**delta, t=t), tol=tol)
    return t**delta * res.value.real


def criterion_smalltime_cgf(which: str = "both", final_tol: float = 0.01):
    """kappa=0 scaled-CGF limits on a decade ladder: monotone |gap|, final <= 1%."""
    cases = []
    if which in ("both", "negative"):
        cases.append(("d=-0.2", validate_params(0.0, 0.04, 0.2, 0.04, 0.0, -0.2)))
    if which in ("both", "positive"):
        cases.append(("d=0.3", validate_params(0.0, 0.04, 0.2, 0.005, 0.04, 0.3)))
    rows = []
    u = 1.0
    ladder = (1e-1, 1e-2, 1e-3, 1e-4)
    for label, p in cases:
        limit = small_time_cgf_limit(p, u)
        gaps = []
        for t in ladder:
            scaled = _scaled_small_time(p, u, t, tol=1e-9)
            gap = abs(scaled - limit) / abs(limit)
            gaps.append(gap)
            rows.append(
                CheckRow(
                    f"smalltime_gap[{label},t={t:g}]",
                    0.0,
                    gap,
                    final_tol if t == ladder[-1] else math.inf,
                    gap <= (final_tol if t == ladder[-1] else math.inf),
                )
            )
        violations = sum(1 for a, b in zip(gaps, gaps[1:]) if b >= a)
        rows.append(
            CheckRow(f"smalltime_monotone[{label}]", 0.0, violations, 0.0, violations == 0)
        )
    return rows


# -- criterion 5 -------------------------------------------------------------


def criterion_largetime_cgf(t: float = 200.0, tol: float = 0.02):
    """Scaled large-time CGF at t=200 within 2% of its limit, both signs of d."""
    rows = []
    p_pos = validate_params(0.007, 0.04, 2.0, 1e-4, 0.0, 0.2)
    for u in (0.25, 0.5, 0.75):
        scaled = cgf(p_pos, CgfQuery(u=u, t=t), tol=1e-11).value.real / t ** (
            1.0 + p_pos.d / 2.0
        )
        limit = large_time_cgf_limit(p_pos, u)
        rows.append(_row(f"largetime[d=0.2,u={u}]", limit, scaled, tol, mode="rel"))
    p_neg = validate_params(0.5, 0.002, 0.05, 0.04, 0.1, -0.2)
    for u in (0.0, 0.5, 1.0):
        scaled = cgf(p_neg, CgfQuery(u=u, t=t), tol=1e-11).value.real / t
        limit = large_time_cgf_limit(p_neg, u)
        err = abs(scaled - limit) / max(abs(limit), 1e-12)
        rows.append(
            CheckRow(f"largetime[d=-0.2,u={u}]", limit, scaled, tol, err <= tol)
        )
    return rows


# -- criterion 6 -------------------------------------------------------------


def criterion_psi_bounds(t_max: float = 50.0, slack: float = 1e-9):
    """psi_-(s) <= B(s) <= psi_+(s) at every accepted grid node, u in {0.1..0.9}."""
    p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, 0.2)
    rows = []
    for u in np.arange(0.1, 0.95, 0.1):
        u = round(float(u), 10)
        sol = riccati_solve(p, CgfQuery(u=u, t=t_max), tol=1e-10, dt_max=0.5)
        lo, hi = bounds_psi(p, u, sol.grid.nodes)
        b = sol.B.real
        margin = min(float(np.min(b - lo)), float(np.min(hi - b)))
        rows.append(
            CheckRow(f"psi_bounds[u={u}]", 0.0, min(margin, 0.0), slack, margin >= -slack)
        )
    return rows


# -- criterion 7 -------------------------------------------------------------


def criterion_deterministic_variance(n_paths: int = 4096):
    """xi=0, kappa=0: Fourier and MC both collapse to Black-Scholes with
    total variance eta t + v0 t^(d+1) / Gamma(d+2)."""
    rows = []
    x, t = 0.1, 1.0
    for d in (-0.3, 0.0, 0.3):
        p = validate_params(0.0, 0.04, 0.0, 0.04, 0.01, d)
        total_var = p.eta * t + p.v0 * t ** (d + 1.0) / math.gamma(d + 2.0)
        ref = bs_call_price(x, t, math.sqrt(total_var / t))
        four = fourier_call_price(p, x, t, quad_tol=1e-9)
        rows.append(_row(f"deterministic_fourier[d={d}]", ref, four, 1e-4, mode="rel"))
        est = mc_call_price(p, x, t, McConfig(n_paths, 64, seed=7))
        rows.append(_row(f"deterministic_mc_mean[d={d}]", ref, est.mean, 1e-12, mode="rel"))
        rows.append(
            CheckRow(
                f"deterministic_mc_se[d={d}]",
                0.0,
                est.std_error,
                1e-12,
                est.std_error <= 1e-12,
            )
        )
    return rows


# -- criterion 8 -------------------------------------------------------------


def criterion_fourier_mc(n_paths: int = 100_000, steps: int = 400, seed: int = 20240211):
    """|fourier - mc| <= 3 SE on the (d, x, t) acceptance grid."""
    rows = []
    xs = (-0.2, 0.0, 0.2)
    for d in (-0.2, 0.2):
        p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, d)
        for t in (0.5, 2.0):
            cfg = McConfig(n_paths, steps, seed=seed, scheme=EXACT_TRANSITION)
            ests = mc_call_prices(p, xs, t, cfg)
            for x, est in zip(xs, ests):
                four = fourier_call_price(p, x, t, quad_tol=1e-9)
                diff = abs(four - est.mean)
                tol = 3.0 * est.std_error
                rows.append(
                    CheckRow(
                        f"fourier_vs_mc[d={d},x={x},t={t}]",
                        four,
                        est.mean,
                        tol,
                        diff <= tol,
                    )
                )
    return rows


# -- criterion 9 -------------------------------------------------------------


def criterion_legendre_duality():
    """Numeric Fenchel-Legendre of Lambda_+ vs closed-form dual on 41 strikes;
    interior branch of Lambda_-* against its parabola."""
    p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, 0.2)
    rows = []
    worst_plus = 0.0
    for x in np.linspace(-1.0, 1.0, 41):
        numeric = fenchel_legendre(lambda v: lambda_plus(v, p), 0.0, 1.0, float(x), tol=1e-12)
        closed = rate_plus_star(float(x), p)
        worst_plus = max(worst_plus, abs(numeric - closed))
    rows.append(CheckRow("legendre_plus_41pt_max_abs_err", 0.0, worst_plus, 1e-6, worst_plus <= 1e-6))
    eta, u_minus, u_plus = 0.04, -2.0, 3.0
    x_lo = (u_minus - 0.5) * eta
    x_hi = (u_plus - 0.5) * eta
    worst_minus = 0.0
    for x in np.linspace(x_lo, x_hi, 41):
        got = rate_minus_star(float(x), eta, u_minus, u_plus).value
        ref = (x + eta / 2.0) ** 2 / (2.0 * eta)
        worst_minus = max(worst_minus, abs(got - ref))
    rows.append(
        CheckRow("legendre_minus_interior_max_abs_err", 0.0, worst_minus, 1e-10, worst_minus <= 1e-10)
    )
    return rows


# -- criteria 10 and 11 ------------------------------------------------------


def _implied_variance(p, x, t, quad_tol=1e-9):
    price = fourier_call_price(p, x, t, quad_tol=quad_tol)
    vol = implied_vol(OptionQuote(x, t, price))
    return vol * vol


def criterion_smile_explosion(final_tol: float = 0.10):
    """d=-0.3: t^-d Sigma^2 trends monotonically to v0/Gamma(d+2), final gap <= 10%."""
    p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, -0.3)
    x = 0.05
    limit = p.v0 / math.gamma(p.d + 2.0)
    ladder = (0.05, 0.02, 0.01, 0.005)
    gaps = []
    rows = []
    for t in ladder:
        scaled = t ** (-p.d) * _implied_variance(p, x, t)
        gap = abs(scaled - limit) / limit
        gaps.append(gap)
        rows.append(
            CheckRow(
                f"smile_explosion[t={t:g}]",
                limit,
                scaled,
                final_tol if t == ladder[-1] else math.inf,
                gap <= (final_tol if t == ladder[-1] else math.inf),
            )
        )
    violations = sum(1 for a, b in zip(gaps, gaps[1:]) if b >= a)
    rows.append(CheckRow("smile_explosion_monotone", 0.0, violations, 0.0, violations == 0))
    return rows


def criterion_smile_flatness(tol_level: float = 0.10, tol_spread: float = 0.02):
    """d=0.3 at t=0.005: Sigma^2 within 10% of eta, strike spread <= 2% of eta."""
    p = validate_params(1.0, 0.04, 0.2, 0.01, 0.04, 0.3)
    t = 0.005
    values = {}
    rows = []
    for x in (-0.05, 0.05):
        var = _implied_variance(p, x, t)
        values[x] = var
        gap = abs(var - p.eta) / p.eta
        rows.append(CheckRow(f"smile_flat[x={x}]", p.eta, var, tol_level, gap <= tol_level))
    spread = abs(values[0.05] - values[-0.05]) / p.eta
    rows.append(CheckRow("smile_flat_spread", 0.0, spread, tol_spread, spread <= tol_spread))
    return rows


# -- criterion 12 ------------------------------------------------------------


def criterion_mixing_validation(n_paths: int = 100_000, steps: int = 400, seed: int = 99):
    """d=0, eta=0: conditional-BS MC vs naive Euler MC within 3 combined SE,
    and the conditional estimator has strictly smaller SE."""
    p = validate_params(1.0, 0.04, 0.2, 0.04, 0.0, 0.0)
    x, t = 0.0, 1.0
    cfg = McConfig(n_paths, steps, seed=seed)
    mixing = mc_call_price(p, x, t, cfg)
    naive = mc_call_price_euler(p, x, t, McConfig(n_paths, steps, seed=seed + 1))
    diff = abs(mixing.mean - naive.mean)
    tol = 3.0 * math.hypot(mixing.std_error, naive.std_error)
    return [
        CheckRow("mixing_vs_euler_mean", naive.mean, mixing.mean, tol, diff <= tol),
        CheckRow(
            "mixing_se_smaller",
            naive.std_error,
            mixing.std_error,
            0.0,
            mixing.std_error < naive.std_error,
        ),
    ]


# -- CLI suite registry ------------------------------------------------------


def suite_oracle(**_):
    return criterion_tan_oracle() + criterion_series_oracle()


def suite_bounds(**_):
    return criterion_psi_bounds()


def suite_smalltime(d: float = None, **_):
    if d is None:
        which = "both"
    elif d < 0:
        which = "negative"
    else:
        which = "positive"
    return criterion_smalltime_cgf(which=which)


def suite_largetime(**_):
    return criterion_largetime_cgf()


def suite_mc(paths: int = 20_000, seed: int = 20240211, **_):
    rows = criterion_deterministic_variance()
    rows += criterion_mixing_validation(n_paths=paths, seed=seed)
    rows += criterion_fourier_mc(n_paths=paths, steps=200, seed=seed)
    return rows


SUITES = {
    "oracle": suite_oracle,
    "bounds": suite_bounds,
    "smalltime": suite_smalltime,
    "largetime": suite_largetime,
    "mc": suite_mc,
}
