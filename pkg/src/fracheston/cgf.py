"""Cumulant generating function of (X_t, V^d_t) via the fractional Riccati system.

The joint CGF m(u, w, t) = log E exp(u X_t + w V^d_t) is

    m(u, w, t) = w eta + u(u-1) eta t / 2 - B(t) v0 + A(t),

where, on 0 <= s <= t,

    A'(s) = -kappa theta B(s),                                A(0) = 0,
    B'(s) = -kappa B(s) - xi^2/2 B(s)^2
            - u(u-1)/(2 Gamma(d+1)) s^d - w/Gamma(d) s^(d-1), B(0) = 0.

The forcing is singular (w != 0) or non-smooth (d < 0) at s = 0. Two
devices keep the stepper away from the singularity:

- the substitution B(s) = -w/Gamma(d+1) s^d + C(s) cancels the
  non-integrable s^(d-1) forcing exactly (its coefficient is d times the
  startup coefficient), leaving an equation for C with forcing exponents
  d and 2d only;
- on (0, s0] the analytic leading behaviour
  C(s) ~ -q1 s^(d+1)/(d+1) - q2 s^(2d+1)/(2d+1) is used, with s0 shrunk
  until the neglected linear, coupling, and quadratic terms are provably
  below tolerance, after which an embedded Dormand-Prince 5(4) pair takes
  over. For w = 0 the substitution is the identity and the startup is the
  power series' first term u(1-u)/(2 Gamma(d+2)) s^(d+1).

A is carried as the running integral inside the same state vector so its
error control is shared with B. Complex transform arguments reuse the
identical real-coefficient ODE.

Moment explosions show up as finite-time blow-up of B; |B| > 1e8 is treated
as divergence and the crossing time recorded.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (
    HorizonTooShortError,
    OutOfRangeError,
    OutsideDomainError,
    PoleProximityError,
    QuadratureFailureError,
)
from .model import ModelParams, TimeGrid

BLOW_UP_THRESHOLD = 1e8

# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CgfQuery:
    """Transform arguments (u for X, w for V^d) and maturity t > 0."""

    u: complex
    t: float
    w: complex = 0.0

    def __post_init__(self):
        if not (self.t > 0.0 and math.isfinite(self.t)):
            raise OutOfRangeError("t", "maturity must be positive and finite")
        for name in ("u", "w"):
            z = complex(getattr(self, name))
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise OutOfRangeError(name, f"'{name}' must be finite")


@dataclass(frozen=True)
class RiccatiSolution:
    """A and B sampled on the accepted-step grid; blow_up_time if |B| diverged."""

    grid: TimeGrid
    A: np.ndarray
    B: np.ndarray
    blow_up_time: float | None = None

    @property
    def blew_up(self) -> bool:
        return self.blow_up_time is not None


CONVERGED = "converged"
BLEW_UP = "blew_up"
OUTSIDE_DOMAIN = "outside_domain"


@dataclass(frozen=True)
class CgfResult:
    """Value of m(u, w, t); value is finite iff status == 'converged'."""

    value: complex
    status: str = CONVERGED

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


@dataclass(frozen=True)
class SeriesCoefficients:
    """alpha_1..alpha_n of the kappa=0 power series, and zeta = u(1-u)/(2 Gamma(d+2))."""

    alpha: np.ndarray
    zeta: float


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) tableau
# ---------------------------------------------------------------------------

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B5 - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _forcing_coeffs(p: ModelParams, u, w):
    """Coefficients of the regularised Riccati equation.

    The raw equation carries the forcing cu s^d + cw s^(d-1) with
    cu = u(u-1)/(2 Gamma(d+1)) and cw = w/Gamma(d), whose second term is
    non-integrable at 0 for d <= 0. Substituting B(s) = -pw s^d + C(s) with
    pw = w/Gamma(d+1) cancels the s^(d-1) term exactly (cw = d pw), leaving

        C' = -kappa C - xi^2/2 C^2 + lin s^d C - q1 s^d - q2 s^(2d),  C(0) = 0,

    with q1 = cu - kappa pw, q2 = xi^2 pw^2 / 2, lin = xi^2 pw. Returns
    (q1, q2, lin, pw).
    """
    d = p.d
    u = np.asarray(u)
    w = np.asarray(w)
    if np.any(w != 0):
        if d == 0.0:
            raise OutOfRangeError("w", "w-transform is undefined at d = 0 (Gamma(0) pole)")
        if d <= -0.5:
            raise OutOfRangeError("w", "w-transform unsupported at the endpoint d = -1/2")
        pw = w / math.gamma(d + 1.0)
    else:
        pw = np.zeros_like(w)
    cu = u * (u - 1.0) / (2.0 * math.gamma(d + 1.0))
    q1 = cu - p.kappa * pw
    q2 = 0.5 * p.xi**2 * pw * pw
    lin = p.xi**2 * pw
    return q1, q2, lin, pw


def _startup_s0(p: ModelParams, q1, q2, pw, t, rtol, atol):
    """Largest s0 <= t/2 at which the startup error bound is far below the
    step tolerance. C1(s) = -q1 s^(d+1)/(d+1) - q2 s^(2d+1)/(2d+1) is the
    exact integral of the forcing; the bound integrates the neglected
    linear, coupling, and quadratic terms along the majorant of C1."""
    d, kappa, xi = p.d, p.kappa, p.xi
    have_w = bool(np.any(pw != 0))
    a1 = np.abs(q1) / (d + 1.0)
    a2 = np.abs(q2) / (2.0 * d + 1.0) if have_w else 0.0
    apw = np.abs(pw)
    s0 = min(0.5 * t, 1.0)
    for _ in range(400):
        c_bar = a1 * s0 ** (d + 1.0) + a2 * s0 ** (2.0 * d + 1.0)
        err = kappa * a1 * s0 ** (d + 2.0) / (d + 2.0)
        err = err + 0.5 * xi**2 * s0 * c_bar * c_bar
        if have_w:
            err = err + kappa * a2 * s0 ** (2.0 * d + 2.0) / (2.0 * d + 2.0)
            err = err + xi**2 * apw * (
                a1 * s0 ** (2.0 * d + 2.0) / (2.0 * d + 2.0)
                + a2 * s0 ** (3.0 * d + 2.0) / (3.0 * d + 2.0)
            )
        if np.all(err <= 1e-3 * (atol + rtol * (1.0 + c_bar))):
            break
        s0 *= 0.5
    return s0


def _integrate(p, u, w, t, rtol, atol, max_steps, record=False, dt_max=math.inf):
    """Advance the regularised state (C, IC) from the analytic startup to t,
    where B(s) = C(s) - pw s^d and IC integrates C over s.

    Integration runs in two phases with the same embedded DP5(4) core: a
    log-time phase s = s0 e^tau up to s_mid (power-law forcings are smooth
    there and steps advance s geometrically, so an arbitrarily small s0 is
    cheap), then plain time from s_mid to t. u, w are 1-d arrays (a batch
    sharing one time axis); nodes whose |C| crosses the blow-up threshold
    are frozen and reported in blow_time.

    Returns (B_t, I_t, blow_time, trace) with I = int_0^t B ds; trace is
    (times, B_path, I_path) when record=True. The s = 0 node of a trace
    stores the formal initial condition B = 0 (for w != 0, d < 0 the true
    B(0+) diverges; A remains integrable).
    """
    kappa, xi, d = p.kappa, p.xi, p.d
    u = np.atleast_1d(np.asarray(u))
    w = np.atleast_1d(np.asarray(w))
    if u.shape != w.shape:
        w = np.broadcast_to(w, u.shape).copy()
    q1, q2, lin, pw = _forcing_coeffs(p, u, w)
    is_complex = np.iscomplexobj(q1) or np.iscomplexobj(pw)
    dtype = np.complex128 if is_complex else np.float64
    q1 = q1.astype(dtype)
    q2 = q2.astype(dtype)
    lin = lin.astype(dtype)
    pw = pw.astype(dtype)
    n = q1.size
    have_w = bool(np.any(pw != 0))

    s0 = _startup_s0(p, q1, q2, pw, t, rtol, atol)
    C = -q1 * s0 ** (d + 1.0) / (d + 1.0)
    IC = -q1 * s0 ** (d + 2.0) / ((d + 1.0) * (d + 2.0))
    if have_w:
        C = C - q2 * s0 ** (2.0 * d + 1.0) / (2.0 * d + 1.0)
        IC = IC - q2 * s0 ** (2.0 * d + 2.0) / ((2.0 * d + 1.0) * (2.0 * d + 2.0))

    def rhs_s(s, Cv):
        f = -q1 * s**d
        if have_w:
            f = f - q2 * s ** (2.0 * d) + lin * s**d * Cv
        if kappa != 0.0:
            f = f - kappa * Cv
        if xi != 0.0:
            f = f - 0.5 * xi**2 * Cv * Cv
        return f

    def b_of(s, Cv):
        return Cv - pw * s**d if have_w else Cv

    def i_of(s, ICv):
        return ICv - pw * s ** (d + 1.0) / (d + 1.0) if have_w else ICv

    state = {
        "C": C,
        "IC": IC,
        "active": np.ones(n, dtype=bool),
        "blow": np.full(n, math.nan),
        "steps": 0,
        "stop": False,  # set when record-mode hits a blow-up
    }
    times = [0.0, s0] if record else None
    B_path = [np.zeros(n, dtype=dtype), b_of(s0, C)] if record else None
    I_path = [np.zeros(n, dtype=dtype), i_of(s0, IC)] if record else None

    def run_phase(x0, x1, s_of, jac_of, h0, h_cap):
        """March from x0 to x1 in the phase variable x, where s = s_of(x)
        and ds/dx = jac_of(x). dC/dx = jac * rhs_s, dIC/dx = jac * C."""
        C = state["C"]
        IC = state["IC"]
        x = x0
        h = min(h0, x1 - x0, h_cap)
        k = np.empty((7, n), dtype=dtype)
        kI = np.empty((7, n), dtype=dtype)
        k1 = jac_of(x) * rhs_s(s_of(x), C)
        while x < x1:
            if state["steps"] >= max_steps:
                raise QuadratureFailureError(
                    f"Riccati stepper exceeded {max_steps} steps (t={t:g}, n={n})"
                )
            state["steps"] += 1
            h = min(h, x1 - x)
            if x + h == x:  # remaining gap below float resolution
                break
            k[0] = k1
            kI[0] = jac_of(x) * C
            for i in range(1, 7):
                Ci = C + h * (_A[i] @ k[:i])
                xi_ = x + _C[i] * h
                k[i] = jac_of(xi_) * rhs_s(s_of(xi_), Ci)
                kI[i] = jac_of(xi_) * Ci
            C_new = C + h * (_B5 @ k)
            IC_new = IC + h * (_B5 @ kI)
            err_C = h * (_E @ k)
            err_I = h * (_E @ kI)
            active = state["active"]
            scale_C = atol + rtol * np.maximum(np.abs(C), np.abs(C_new))
            scale_I = atol + rtol * np.maximum(np.abs(IC), np.abs(IC_new))
            ratios = np.maximum(np.abs(err_C) / scale_C, np.abs(err_I) / scale_I)
            err_norm = float(np.max(ratios[active])) if active.any() else 0.0

            if not math.isfinite(err_norm):
                h *= 0.2
                if h < 1e-15 * max(1.0, abs(x)):
                    raise QuadratureFailureError("step size underflow in Riccati stepper")
                continue
            if err_norm > 1.0:
                h *= max(0.2, 0.9 * err_norm ** (-0.2))
                if h < 1e-15 * max(1.0, abs(x)):
                    raise QuadratureFailureError("step size underflow in Riccati stepper")
                continue

            # accept
            C_new = np.where(active, C_new, C)
            IC_new = np.where(active, IC_new, IC)
            x_new = x + h
            crossed = active & (np.abs(C_new) > BLOW_UP_THRESHOLD)
            if crossed.any():
                state["blow"][crossed] = s_of(x_new)
                state["active"] = active & ~crossed
                if record:
                    state["C"], state["IC"] = C_new, IC_new
                    state["stop"] = True
                    return
                if not state["active"].any():
                    state["C"], state["IC"] = C_new, IC_new
                    return
                # park frozen nodes at 0 so their (discarded) stage values
                # cannot overflow while the live nodes take large steps
                C_new = np.where(crossed, 0.0, C_new)
                IC_new = np.where(crossed, 0.0, IC_new)
            C, IC, x = C_new, IC_new, x_new
            if record:
                s_here = s_of(x)
                times.append(s_here)
                B_path.append(b_of(s_here, C))
                I_path.append(i_of(s_here, IC))
            k1 = k[6]  # FSAL: last stage is the derivative at the new point
            h *= 5.0 if err_norm == 0.0 else min(5.0, 0.9 * err_norm ** (-0.2))
            h = min(h, h_cap)
        state["C"], state["IC"] = C, IC

    s_mid = min(max(s0 * 2.0, 1.0), 0.5 * t) if s0 < 0.5 * t else s0
    if s_mid > s0 and not state["stop"]:
        # log-time phase: tau in [0, log(s_mid/s0)], s = s0 e^tau
        tau_end = math.log(s_mid / s0)
        run_phase(
            0.0,
            tau_end,
            s_of=lambda x: s0 * math.exp(x),
            jac_of=lambda x: s0 * math.exp(x),
            h0=0.1,
            h_cap=1.0,
        )
    else:
        s_mid = s0
    if not state["stop"] and state["active"].any() and s_mid < t:
        run_phase(
            s_mid,
            t,
            s_of=lambda x: x,
            jac_of=lambda x: 1.0,
            h0=min(0.25 * s_mid, t - s_mid),
            h_cap=dt_max,
        )

    trace = None
    if record:
        trace = (np.asarray(times), np.vstack(B_path), np.vstack(I_path))
    C, IC = state["C"], state["IC"]
    return b_of(t, C), i_of(t, IC), state["blow"], trace


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def riccati_solve(
    p: ModelParams,
    q: CgfQuery,
    tol: float = 1e-10,
    max_nodes: int = 200_000,
    dt_max: float = math.inf,
) -> RiccatiSolution:
    """Solve the Riccati pair for one transform argument, keeping the full path.

    The returned grid is the accepted-step grid (0, s0, adaptive nodes..., t);
    A = -kappa theta * integral of B is carried in the state so its error
    control is shared with B. On blow-up the trajectory stops at the last
    node before the threshold crossing and blow_up_time is set.
    """
    if tol <= 0.0:
        raise OutOfRangeError("tol", "tolerance must be positive")
    _, _, blow, trace = _integrate(
        p,
        np.asarray([q.u]),
        np.asarray([q.w]),
        q.t,
        rtol=tol,
        atol=tol * 1e-2,
        max_steps=max_nodes,
        record=True,
        dt_max=dt_max,
    )
    times, B_path, I_path = trace
    A_path = -p.kappa * p.theta * I_path[:, 0]
    blow_t = None if math.isnan(blow[0]) else float(blow[0])
    return RiccatiSolution(
        grid=TimeGrid(times), A=A_path, B=B_path[:, 0], blow_up_time=blow_t
    )


def cgf_batch(p: ModelParams, us, t: float, w=0.0, tol: float = 1e-10):
    """m(u, w, t) for a batch of transform arguments sharing one maturity.

    Returns (values, blown) where values[i] is +inf for blown nodes.
    One ODE bundle integrates all nodes together; per-node local error is
    still controlled at tol because the controller uses the worst node.
    """
    if t <= 0.0:
        raise OutOfRangeError("t", "maturity must be positive")
    us = np.atleast_1d(np.asarray(us))
    ws = np.broadcast_to(np.asarray(w), us.shape)
    B, I, blow, _ = _integrate(
        p, us, ws, t, rtol=tol, atol=tol * 1e-2, max_steps=500_000
    )
    A = -p.kappa * p.theta * I
    values = ws * p.eta + us * (us - 1.0) * p.eta * t / 2.0 - B * p.v0 + A
    blown = ~np.isnan(blow)
    if blown.any():
        values = values.copy()
        values[blown] = np.inf
    return values, blown


def _demote_real(z):
    z = complex(z)
    return z.real if z.imag == 0.0 else z


def cgf(p: ModelParams, q: CgfQuery, tol: float = 1e-10) -> CgfResult:
    """m(u, w, t) = w eta + u(u-1) eta t/2 - B(t) v0 + A(t)."""
    values, blown = cgf_batch(
        p, [_demote_real(q.u)], q.t, w=[_demote_real(q.w)], tol=tol
    )
    if blown[0]:
        return CgfResult(complex(math.inf, 0.0), BLEW_UP)
    return CgfResult(complex(values[0]), CONVERGED)


def characteristic_fn(p: ModelParams, z: complex, t: float, tol: float = 1e-10) -> complex:
    """E exp(z X_t) = exp(m(z, 0, t)) for Re(z) in the martingale strip [0, 1].

    The strip sits inside the effective domain for every t, so the query
    cannot blow up; |result| <= exp(m(Re z, 0, t)) by the modulus bound.
    """
    z = complex(z)
    if not 0.0 <= z.real <= 1.0:
        raise OutOfRangeError("z", "Re(z) must lie in [0, 1]")
    res = cgf(p, CgfQuery(u=z, t=t), tol=tol)
    if not res.converged:
        raise OutsideDomainError(f"CGF blew up at z={z}, t={t}")
    return cmath.exp(res.value)


def series_coefficients(p: ModelParams, u: float, n_terms: int) -> SeriesCoefficients:
    """Power-series data for kappa = 0: alpha_1 = 1 and

    alpha_i = -xi^2 / (2 (i(d+2) - 1)) * sum_{k=1}^{i-1} alpha_k alpha_{i-k}.
    """
    if n_terms < 1:
        raise OutOfRangeError("n_terms", "need at least one term")
    d, xi = p.d, p.xi
    alpha = np.empty(n_terms)
    alpha[0] = 1.0
    for i in range(2, n_terms + 1):
        conv = np.dot(alpha[: i - 1], alpha[i - 2 :: -1])
        alpha[i - 1] = -(xi**2) / (2.0 * (i * (d + 2.0) - 1.0)) * conv
    zeta = u * (1.0 - u) / (2.0 * math.gamma(d + 2.0))
    return SeriesCoefficients(alpha=alpha, zeta=zeta)


def series_B_kappa0(p: ModelParams, u: float, t: float, n_terms: int = 64) -> float:
    """B(t) = sum_i alpha_i zeta^i t^(i d + 2i - 1) for kappa = 0.

    Valid inside the proven convergence radius |zeta t^(d+2)| < 1/4; the
    truncation error is bounded by the geometric tail of the dominating
    series, which halves per term at |zeta t^(d+2)| <= 1/8.
    """
    if p.kappa != 0.0:
        raise OutOfRangeError("kappa", "series solution requires kappa = 0")
    if t <= 0.0:
        raise OutOfRangeError("t", "maturity must be positive")
    coeffs = series_coefficients(p, u, n_terms)
    x = coeffs.zeta * t ** (p.d + 2.0)
    if abs(x) >= 0.25:
        raise OutOfRangeError(
            "t", f"|zeta t^(d+2)| = {abs(x):g} outside the convergence radius 1/4"
        )
    powers = x ** np.arange(1, n_terms + 1)
    return float(np.dot(coeffs.alpha, powers) / t)


def heston_tan_mgf(v0: float, xi: float, u: float, t: float) -> float:
    """Closed-form m(u, t) for kappa = 0, d = 0, eta = 0:

        m(u, t) = (v0/xi) sqrt(u(u-1)) tan(xi t sqrt(u(u-1)) / 2).

    For u in (0, 1), u(u-1) < 0 and the composition is real-valued via tanh:
    m = -(v0/xi) sqrt(u(1-u)) tanh(xi t sqrt(u(1-u)) / 2). At xi = 0 the
    expression degenerates to the Black-Scholes value v0 u(u-1) t / 2.
    """
    a = u * (u - 1.0)
    if a == 0.0:
        return 0.0
    if xi == 0.0:
        return v0 * a * t / 2.0
    if a > 0.0:
        root = math.sqrt(a)
        arg = xi * t * root / 2.0
        dist = abs(math.remainder(arg - math.pi / 2.0, math.pi))
        if dist < 1e-6:
            raise PoleProximityError(
                f"tan argument {arg:g} within 1e-6 of a pole of the closed form"
            )
        return v0 / xi * root * math.tan(arg)
    root = math.sqrt(-a)
    return -v0 / xi * root * math.tanh(xi * t * root / 2.0)


def small_time_expansion(p: ModelParams, u: float, t: float, order: int = 2) -> float:
    """Leading small-t behaviour of m(u, 0, t):

        order 1:  u(u-1) eta t / 2 + v0 u(u-1) t^(d+1) / (2 Gamma(d+2))
        order 2:  + kappa (theta - v0) u(u-1) t^(d+2) / (2 Gamma(d+3))

    The order-2 coefficient follows from iterating the integral form of the
    Riccati equation; the remainder is o(t^(d+2)).
    """
    if order not in (1, 2):
        raise OutOfRangeError("order", "order must be 1 or 2")
    a = u * (u - 1.0)
    out = a * p.eta * t / 2.0 + p.v0 * a * t ** (p.d + 1.0) / (2.0 * math.gamma(p.d + 2.0))
    if order == 2:
        out += (
            p.kappa
            * (p.theta - p.v0)
            * a
            * t ** (p.d + 2.0)
            / (2.0 * math.gamma(p.d + 3.0))
        )
    return out


def bounds_psi(p: ModelParams, u: float, t):
    """Comparison bounds psi_-(t) <= B(t) <= psi_+(t) for u in [0, 1]:

        psi_+-(t) = -kappa/xi^2 +- (1/xi) sqrt(kappa^2/xi^2 + u(1-u) t^d / Gamma(d+1))

    Accepts scalar or array t; meaningful in the d > 0 comparison regime.
    """
    if p.xi == 0.0:
        raise OutOfRangeError("xi", "comparison bounds require xi > 0")
    if not 0.0 <= u <= 1.0:
        raise OutOfRangeError("u", "comparison bounds require u in [0, 1]")
    t = np.asarray(t, dtype=float)
    base = -p.kappa / p.xi**2
    root = np.sqrt(p.kappa**2 / p.xi**2 + u * (1.0 - u) * t**p.d / math.gamma(p.d + 1.0)) / p.xi
    return base - root, base + root


def moment_domain_estimate(
    p: ModelParams,
    t_horizon: float = 200.0,
    tol: float = 1e-3,
    tol_ode: float = 1e-8,
    u_cap: float = 64.0,
):
    """Bracket the large-time effective domain [u_-, u_+] for d < 0 by bisection.

    A point u is classified inside iff the Riccati solve reports no blow-up
    before t_horizon, so the returned endpoints are the inner ends of
    brackets of width <= tol and the estimate always contains [0, 1].
    """
    if not p.d < 0.0:
        raise OutOfRangeError("d", "moment-domain estimate applies to d < 0")
    if tol <= 0.0:
        raise OutOfRangeError("tol", "tolerance must be positive")

    def inside(u: float) -> bool:
        _, _, blow, _ = _integrate(
            p,
            np.asarray([u]),
            np.asarray([0.0]),
            t_horizon,
            rtol=tol_ode,
            atol=tol_ode * 1e-2,
            max_steps=500_000,
        )
        return math.isnan(blow[0])

    def expand(start: float, step: float) -> tuple[float, float]:
        lo = start
        probe = start + step
        while abs(probe) <= u_cap:
            if not inside(probe):
                return lo, probe
            lo = probe
            probe += step
            step *= 2.0
        raise HorizonTooShortError(
            f"no blow-up out to u = {lo:g} by t = {t_horizon:g}; "
            "bisection cannot bracket the domain edge"
        )

    def bisect(lo: float, hi: float) -> float:
        # invariant: lo inside, hi outside
        while abs(hi - lo) > tol:
            mid = 0.5 * (lo + hi)
            if inside(mid):
                lo = mid
            else:
                hi = mid
        return lo

    lo_p, hi_p = expand(1.0, 1.0)
    u_plus = bisect(lo_p, hi_p)
    lo_m, hi_m = expand(0.0, -1.0)
    u_minus = bisect(lo_m, hi_m)
    return u_minus, u_plus


def mean_Vd(p: ModelParams, t: float) -> float:
    """E V^d_t = eta + I^d applied to the CIR mean s -> theta + (v0-theta)e^(-kappa s).

    Uses the integrated-by-parts form

        I^d f(t) = f(0) t^d / Gamma(d+1) + (1/Gamma(d+1)) int_0^t (t-s)^d f'(s) ds,

    whose kernel (t-s)^d is integrable for every d in (-1/2, 1/2]; the raw
    kernel (t-s)^(d-1) is not when d <= 0. Exact for kappa = 0. For d < 0
    the boundary term diverges as t -> 0 (the fractional derivative of a
    path started away from 0), so mean_Vd(0) is +inf there.
    """
    if t < 0.0:
        raise OutOfRangeError("t", "time must be nonnegative")
    d = p.d
    if t == 0.0:
        if d > 0.0:
            return p.eta
        if d == 0.0:
            return p.eta + p.v0
        return math.inf
    g1 = math.gamma(d + 1.0)
    out = p.eta + p.v0 * t**d / g1
    if p.kappa == 0.0:
        return out
    rate = p.kappa * (p.theta - p.v0)
    integral, _ = quad(
        lambda s: rate * math.exp(-p.kappa * s), 0.0, t, weight="alg", wvar=(0.0, d)
    )
    return out + integral / g1
