"""Rate functions, Fenchel-Legendre machinery, and asymptotic smiles.

Limiting rescaled CGFs and their convex duals:

    Lambda_+(u) = -(kappa theta / xi) sqrt(u(1-u) / Gamma(1+d)),  u in [0,1]
    Lambda_-(u) = u(u-1) eta / 2
    lambda_+*(x) = x^2 / (2 eta)
    lambda_-*(x) = Gamma(2+d) x^2 / (2 v0)

Lambda_+* is evaluated through its maximiser

    u(x) = 1/2 { 1 + sgn(x) sqrt(1 - [1 + (x xi sqrt(Gamma(1+d)) / (kappa theta))^2]^-1) },

with sgn(0) = +1, which makes Lambda_+*(x) = u(x) x + (kappa theta/xi)
sqrt(u(x)(1-u(x))/Gamma(1+d)) the exact Fenchel-Legendre dual of Lambda_+
(equivalently (x + sqrt(x^2 + c^2))/2 with c = kappa theta/(xi sqrt(Gamma(1+d)))).

Lambda_-* is the dual of Lambda_- restricted to the moment interval
[u_-, u_+]: a parabola (x + eta/2)^2 / (2 eta) between the endpoint slopes
Lambda_-'(u_+-) = (u_+- - 1/2) eta, continued linearly outside.

The scaled-CGF limits used by the verification harness: for d < 0 the
t -> infinity limit of t^-1 m(u, t) is Lambda_-(u); for d > 0, integrating
B(s) ~ beta0 s^(d/2) against A' = -kappa theta B gives

    t^-(1+d/2) m(u, t)  ->  Lambda_+(u) / (1 + d/2),

i.e. the dual pair (Lambda_+, Lambda_+*) governs the smile shape while the
scaled CGF itself carries the extra 1/(1+d/2) from the time integral.
"""

import math
import warnings
from dataclasses import dataclass

from .errors import NonConvexWarning, OutOfRangeError
from .model import ModelParams
from .pricing import SOURCE_ASYMPTOTIC, SmilePoint

BRANCH_INTERIOR = "interior"
BRANCH_LEFT = "linear_left"
BRANCH_RIGHT = "linear_right"


@dataclass(frozen=True)
class RateFunctionEval:
    """Rate-function value at a log-moneyness coordinate, with branch tag."""

    x: float
    value: float
    branch: str = BRANCH_INTERIOR


@dataclass(frozen=True)
class AsymptoticSmile:
    """A family of asymptotic smile points for one regime and sign of d."""

    regime: str  # "small_time" | "large_time"
    d_sign: str  # "positive" | "negative"
    entries: tuple


def _require_large_plus(p: ModelParams):
    if not 0.0 < p.d < 0.5:
        raise OutOfRangeError("d", "large-time d > 0 asymptotics require d in (0, 1/2)")
    if p.xi == 0.0:
        raise OutOfRangeError("xi", "requires xi > 0")
    if p.kappa * p.theta == 0.0:
        raise OutOfRangeError("kappa", "requires kappa * theta > 0")


def u_of_x(x: float, p: ModelParams) -> float:
    """Maximiser of u x - Lambda_+(u) over (0, 1); u(0) = 1/2, sgn(0) = +1."""
    _require_large_plus(p)
    g = x * p.xi * math.sqrt(math.gamma(1.0 + p.d)) / (p.kappa * p.theta)
    sgn = 1.0 if x >= 0.0 else -1.0
    return 0.5 * (1.0 + sgn * math.sqrt(1.0 - 1.0 / (1.0 + g * g)))


def lambda_plus(u: float, p: ModelParams) -> float:
    """Limiting scaled CGF shape for d > 0; nonpositive, vanishing at 0 and 1."""
    if not 0.0 <= u <= 1.0:
        raise OutOfRangeError("u", "Lambda_+ is defined on [0, 1]")
    if p.xi == 0.0:
        raise OutOfRangeError("xi", "requires xi > 0")
    return -(p.kappa * p.theta / p.xi) * math.sqrt(
        u * (1.0 - u) / math.gamma(1.0 + p.d)
    )


def lambda_minus(u: float, eta: float) -> float:
    """Limiting t^-1 CGF for d < 0: u(u-1) eta / 2."""
    return 0.5 * u * (u - 1.0) * eta


def rate_plus_star(x: float, p: ModelParams) -> float:
    """Fenchel-Legendre dual of Lambda_+: strictly convex, >= max(x, 0),
    minimum kappa theta / (2 xi sqrt(Gamma(1+d))) at x = 0."""
    u = u_of_x(x, p)
    return u * x + (p.kappa * p.theta / p.xi) * math.sqrt(
        u * (1.0 - u) / math.gamma(1.0 + p.d)
    )


def rate_minus_star(x: float, eta: float, u_minus: float, u_plus: float) -> RateFunctionEval:
    """Dual of Lambda_- on the moment interval [u_minus, u_plus].

    Interior parabola (x + eta/2)^2/(2 eta) on [Lambda_-'(u_-), Lambda_-'(u_+)]
    with Lambda_-'(u) = (u - 1/2) eta, linear continuations outside; C^1
    across the junctions.
    """
    if eta <= 0.0:
        raise OutOfRangeError("eta", "rate_minus_star requires eta > 0")
    if u_minus > 0.0 or u_plus < 1.0:
        raise OutOfRangeError("u_minus", "need u_minus <= 0 and u_plus >= 1")
    x_lo = (u_minus - 0.5) * eta
    x_hi = (u_plus - 0.5) * eta
    if x < x_lo:
        return RateFunctionEval(x, u_minus * x - lambda_minus(u_minus, eta), BRANCH_LEFT)
    if x > x_hi:
        return RateFunctionEval(x, u_plus * x - lambda_minus(u_plus, eta), BRANCH_RIGHT)
    return RateFunctionEval(x, (x + eta / 2.0) ** 2 / (2.0 * eta), BRANCH_INTERIOR)


def small_rate_plus(x: float, eta: float) -> float:
    """Small-time rate for d > 0: x^2 / (2 eta)."""
    if eta <= 0.0:
        raise OutOfRangeError("eta", "small_rate_plus requires eta > 0")
    return x * x / (2.0 * eta)


def small_rate_minus(x: float, v0: float, d: float) -> float:
    """Small-time rate for d < 0: Gamma(2+d) x^2 / (2 v0)."""
    if v0 <= 0.0:
        raise OutOfRangeError("v0", "small_rate_minus requires v0 > 0")
    return math.gamma(2.0 + d) * x * x / (2.0 * v0)


def fenchel_legendre(limit_cgf, a: float, b: float, x: float, tol: float = 1e-10) -> float:
    """sup over [a, b] of u x - Lambda(u) by golden-section search.

    The objective is concave when Lambda is convex (probed at three points,
    advisory warning only); endpoints are admissible maximisers. Bracket
    floor 1e-10.
    """
    if not a < b:
        raise OutOfRangeError("a", "need a < b")
    if tol <= 0.0:
        raise OutOfRangeError("tol", "tolerance must be positive")
    mid = 0.5 * (a + b)
    if limit_cgf(mid) > 0.5 * (limit_cgf(a) + limit_cgf(b)) + 1e-12:
        warnings.warn(
            "limit CGF failed the midpoint convexity probe", NonConvexWarning
        )

    def objective(u):
        return u * x - limit_cgf(u)

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = a, b
    c = hi - inv_phi * (hi - lo)
    d_ = lo + inv_phi * (hi - lo)
    fc, fd = objective(c), objective(d_)
    width_floor = max(tol, 1e-10)
    while hi - lo > width_floor:
        if fc >= fd:
            hi, d_, fd = d_, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = objective(c)
        else:
            lo, c, fc = c, d_, fd
            d_ = lo + inv_phi * (hi - lo)
            fd = objective(d_)
    best = max(fc, fd)
    # endpoints are admissible (the sup may sit on the boundary)
    return max(best, objective(a), objective(b))


# ---------------------------------------------------------------------------
# scaled-CGF limits (verification harness targets)
# ---------------------------------------------------------------------------


def small_time_cgf_limit(p: ModelParams, u: float) -> float:
    """Limit of the rescaled small-time CGF (kappa = 0 regime):

    d in (0, 1/2]:  t m(u/t, t)            ->  eta u^2 / 2
    d in [-1/2, 0): t^(1+d) m(u/t^(1+d), t) -> v0 u^2 / (2 Gamma(2+d))
    """
    if p.d > 0.0:
        return p.eta * u * u / 2.0
    if p.d < 0.0:
        return p.v0 * u * u / (2.0 * math.gamma(2.0 + p.d))
    raise OutOfRangeError("d", "small-time scaled limit is stated for d != 0")


def large_time_cgf_limit(p: ModelParams, u: float) -> float:
    """Limit of the rescaled large-time CGF:

    d in (0, 1/2):  t^-(1+d/2) m(u, t) -> Lambda_+(u) / (1 + d/2)
    d in (-1/2, 0): t^-1 m(u, t)       -> Lambda_-(u)

    The 1/(1+d/2) factor comes from A(t) = -kappa theta int_0^t B with
    B(s) ~ beta0 s^(d/2); see the module docstring.
    """
    if 0.0 < p.d < 0.5:
        return lambda_plus(u, p) / (1.0 + p.d / 2.0)
    if -0.5 < p.d < 0.0:
        return lambda_minus(u, p.eta)
    raise OutOfRangeError("d", "large-time scaled limit requires 0 < |d| < 1/2")


# ---------------------------------------------------------------------------
# asymptotic smiles and option-price exponents
# ---------------------------------------------------------------------------


def smile_small_time(p: ModelParams, x: float, t: float) -> SmilePoint:
    """Limiting short-maturity implied volatility at log-strike x != 0.

    d in (0, 1/2]:  implied variance -> eta (strike-independent)
    d in [-1/2, 0): implied variance = v0 t^d / Gamma(d+2), the jump-type
                    explosion at rate t^(d/2) with sigma0 = sqrt(v0/Gamma(2+d))
    """
    if t <= 0.0:
        raise OutOfRangeError("t", "maturity must be positive")
    if x == 0.0:
        raise OutOfRangeError("x", "the small-time limit excludes x = 0")
    if p.d > 0.0:
        if p.eta <= 0.0:
            raise OutOfRangeError("eta", "d > 0 small-time limit requires eta > 0")
        var = p.eta
    elif p.d < 0.0:
        var = p.v0 * t**p.d / math.gamma(p.d + 2.0)
    else:
        raise OutOfRangeError("d", "small-time smile limit is stated for d != 0")
    return SmilePoint(x, t, math.sqrt(var), SOURCE_ASYMPTOTIC)


def smile_large_time(
    p: ModelParams,
    x: float,
    t: float,
    u_minus: float = None,
    u_plus: float = None,
) -> SmilePoint:
    """Large-maturity asymptotic smile.

    d in (0, 1/2): vol = sqrt(2) t^(d/4) (sqrt(L*(x)) + sqrt(L*(x) - x)) at
    log-strike x t^(1+d/2), where L* = rate_plus_star (both radicands are
    nonnegative since L*(x) >= max(x, 0)). d in (-1/2, 0): implied variance
    eta at log-strike x t, for x strictly inside the admissible interval
    (Lambda_-'(u_-), Lambda_-'(u_+)).
    """
    if t <= 0.0:
        raise OutOfRangeError("t", "maturity must be positive")
    if 0.0 < p.d < 0.5:
        rate = rate_plus_star(x, p)
        vol = math.sqrt(2.0) * t ** (p.d / 4.0) * (
            math.sqrt(rate) + math.sqrt(max(rate - x, 0.0))
        )
        return SmilePoint(x * t ** (1.0 + p.d / 2.0), t, vol, SOURCE_ASYMPTOTIC)
    if -0.5 < p.d < 0.0:
        if u_minus is None or u_plus is None:
            raise OutOfRangeError("u_minus", "d < 0 needs the moment interval (u_-, u_+)")
        x_lo = (u_minus - 0.5) * p.eta
        x_hi = (u_plus - 0.5) * p.eta
        if not x_lo < x < x_hi:
            raise OutOfRangeError(
                "x", f"x must lie in the admissible interval ({x_lo:g}, {x_hi:g})"
            )
        if p.eta <= 0.0:
            raise OutOfRangeError("eta", "d < 0 large-time smile requires eta > 0")
        return SmilePoint(x * t, t, math.sqrt(p.eta), SOURCE_ASYMPTOTIC)
    raise OutOfRangeError("d", "large-time smile requires 0 < |d| < 1/2")


def asymptotic_smile(
    p: ModelParams,
    xs,
    t: float,
    regime: str,
    u_minus: float = None,
    u_plus: float = None,
) -> AsymptoticSmile:
    """Sweep an x-ladder through the applicable smile limit."""
    if regime == "small_time":
        entries = tuple(smile_small_time(p, float(x), t) for x in xs)
    elif regime == "large_time":
        entries = tuple(
            smile_large_time(p, float(x), t, u_minus=u_minus, u_plus=u_plus) for x in xs
        )
    else:
        raise OutOfRangeError("regime", "regime must be 'small_time' or 'large_time'")
    d_sign = "positive" if p.d > 0.0 else "negative"
    return AsymptoticSmile(regime=regime, d_sign=d_sign, entries=entries)


def option_asymptote_large_time(
    x: float,
    kind: str,
    rate,
    x_star: float,
    x_tilde_star: float,
) -> float:
    """Piecewise limit of f(t)^-1 log(price) for strikes e^(x f(t)).

    rate is the applicable rate function Lambda*; its tilted companion is
    Lambda~*(x) = Lambda*(x) - x. x_star and x_tilde_star are the
    minimisers of Lambda* and Lambda~* (+-inf admitted when the endpoint
    slopes are infinite, as for d > 0).

        put:     x - Lambda*(x) if x <= x_star, else x
        call:    -Lambda~*(x)   if x >= x_tilde_star, else 0
        covered: 0 if x > x_tilde_star; x - Lambda*(x) on [x_star, x_tilde_star];
                 x if x < x_star
    """
    if x_star > x_tilde_star:
        raise OutOfRangeError("x_star", "need x_star <= x_tilde_star")
    if kind == "put":
        return x - rate(x) if x <= x_star else x
    if kind == "call":
        return -(rate(x) - x) if x >= x_tilde_star else 0.0
    if kind == "covered_call":
        if x > x_tilde_star:
            return 0.0
        if x < x_star:
            return x
        return x - rate(x)
    raise OutOfRangeError("kind", "kind must be 'put', 'call' or 'covered_call'")


def exponent_minimisers(p: ModelParams, u_minus: float = None, u_plus: float = None):
    """(x_star, x_tilde_star) for the large-time exponents.

    d > 0: Lambda_+' diverges at the ends of [0, 1], so both minimisers are
    infinite and the piecewise formulas degenerate to their middle branches.
    d < 0: the parabola/dual geometry gives x_star = -eta/2, x_tilde_star = eta/2.
    """
    if 0.0 < p.d < 0.5:
        return -math.inf, math.inf
    if -0.5 < p.d < 0.0:
        if p.eta <= 0.0:
            raise OutOfRangeError("eta", "d < 0 exponents require eta > 0")
        return -p.eta / 2.0, p.eta / 2.0
    raise OutOfRangeError("d", "large-time exponents require 0 < |d| < 1/2")
