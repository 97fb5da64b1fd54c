"""Black-Scholes formulas, implied-volatility inversion, and Fourier pricing.

Spot is normalised to 1 and rates are zero throughout, so a call struck at
e^x on the martingale S = e^X has price in [max(1 - e^x, 0), 1].

Fourier pricing uses the damped inverse-transform representation along the
vertical line Re(z) = a, a in (0, 1):

    C(x) = 1 + (1/pi) int_0^inf Re[ phi(a+iy) e^((1-a-iy)x) / ((a+iy)(a+iy-1)) ] dy,

which follows from E min(e^X, e^x) and needs the characteristic function
only on the martingale strip [0, 1] - always inside the effective domain.
The quadrature is Gauss-Kronrod 7-15 panels on [0, Z], worst panels split
until the error estimate meets quad_tol, and Z doubled until the last
panel's contribution drops below quad_tol. All panel nodes of a refinement
round are evaluated in a single batched Riccati solve.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .cgf import cgf_batch
from .errors import (
    NearBoundWarning,
    NoSolutionError,
    OutOfRangeError,
    QuadratureFailureError,
)
from .model import ModelParams, std_normal_cdf

SOURCE_FOURIER = "fourier"
SOURCE_MC = "mc"
SOURCE_ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class OptionQuote:
    """European quote on unit spot: strike e^log_strike, maturity, price."""

    log_strike: float
    maturity: float
    price: float


@dataclass(frozen=True)
class SmilePoint:
    """One implied-volatility observation tagged with its provenance."""

    log_strike: float
    maturity: float
    implied_vol: float
    source: str

    def __post_init__(self):
        if self.source not in (SOURCE_FOURIER, SOURCE_MC, SOURCE_ASYMPTOTIC):
            raise OutOfRangeError("source", f"unknown smile source {self.source!r}")
        if not (self.implied_vol > 0.0 and math.isfinite(self.implied_vol)):
            raise OutOfRangeError("implied_vol", "implied vol must be positive and finite")


def bs_call_price(x, t, sigma):
    """Black-Scholes call on unit spot: N(-x/s + s/2) - e^x N(-x/s - s/2), s = sigma sqrt(t).

    sigma = 0 returns the intrinsic value max(1 - e^x, 0). Vectorised in x
    and sigma.
    """
    if t <= 0.0:
        raise OutOfRangeError("t", "maturity must be positive")
    x = np.asarray(x, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    scalar = x.ndim == 0 and sigma.ndim == 0
    total = sigma * math.sqrt(t)
    intrinsic = np.maximum(1.0 - np.exp(x), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = -x / total + 0.5 * total
        d2 = d1 - total
        live = std_normal_cdf(d1) - np.exp(x) * std_normal_cdf(d2)
    out = np.where(total > 0.0, live, intrinsic)
    return float(out) if scalar else out


def bs_put_price(x, t, sigma):
    """Put via parity on unit spot: put = call - 1 + e^x."""
    return bs_call_price(x, t, sigma) - 1.0 + np.exp(np.asarray(x, dtype=float))


def _call_bounds(x):
    return max(1.0 - math.exp(x), 0.0), 1.0


def implied_vol(quote: OptionQuote, kind: str = "call") -> float:
    """The unique sigma > 0 reproducing the quote, to 1e-10 absolute.

    Newton from the seed sigma sqrt(t) = sqrt(2|x|) with a bisection
    safeguard on [1e-9, 40/sqrt(t)]; beyond the ceiling the price is within
    1e-12 of its upper bound. Puts are converted through parity first.
    """
    x, t = quote.log_strike, quote.maturity
    if t <= 0.0:
        raise OutOfRangeError("t", "maturity must be positive")
    if kind == "call":
        target = quote.price
    elif kind == "put":
        target = quote.price + 1.0 - math.exp(x)
    else:
        raise OutOfRangeError("kind", "kind must be 'call' or 'put'")
    lower, upper = _call_bounds(x)
    if not lower < target < upper:
        raise NoSolutionError(
            f"price {target:.17g} outside the open arbitrage interval ({lower:.17g}, {upper:.17g})"
        )
    if target - lower < 1e-12 or upper - target < 1e-12:
        warnings.warn(
            f"price within 1e-12 of a no-arbitrage bound at x={x:g}, t={t:g}",
            NearBoundWarning,
        )

    sqrt_t = math.sqrt(t)
    lo, hi = 1e-9, 40.0 / sqrt_t
    f_lo = bs_call_price(x, t, lo) - target
    f_hi = bs_call_price(x, t, hi) - target
    if f_lo > 0.0 or f_hi < 0.0:
        raise NoSolutionError(
            f"no volatility in [{lo:g}, {hi:g}] reproduces price {target:.17g}"
        )

    sigma = min(max(max(math.sqrt(2.0 * abs(x)), 1e-2) / sqrt_t, lo * 2.0), hi * 0.5)
    for _ in range(200):
        diff = bs_call_price(x, t, sigma) - target
        if diff > 0.0:
            hi = sigma
        else:
            lo = sigma
        total = sigma * sqrt_t
        vega = norm.pdf(-x / total + 0.5 * total) * sqrt_t
        step = diff / vega if vega > 0.0 else math.nan
        nxt = sigma - step
        if not (math.isfinite(nxt) and lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - sigma) < 0.25e-10 or (hi - lo) < 0.5e-10:
            return nxt
        sigma = nxt
    return sigma


def covered_call_value(call_price: float) -> float:
    """1 - call: the expectation E min(e^X, strike) of the covered position."""
    if not 0.0 <= call_price <= 1.0:
        raise OutOfRangeError("call_price", "call price must lie in [0, 1]")
    return 1.0 - call_price


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7-15 panel quadrature over batched characteristic-function
# evaluations
# ---------------------------------------------------------------------------

_XGK = np.array(
    [
        -0.991455371120813,
        -0.949107912342759,
        -0.864864423359769,
        -0.741531185599394,
        -0.586087235467691,
        -0.405845151377397,
        -0.207784955007898,
        0.0,
        0.207784955007898,
        0.405845151377397,
        0.586087235467691,
        0.741531185599394,
        0.864864423359769,
        0.949107912342759,
        0.991455371120813,
    ]
)
_WGK = np.array(
    [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
        0.204432940075298,
        0.190350578064785,
        0.169004726639267,
        0.140653259715525,
        0.104790010322250,
        0.063092092629979,
        0.022935322010529,
    ]
)
_WG = np.array(
    [
        0.129484966168870,
        0.279705391489277,
        0.381830050505119,
        0.417959183673469,
        0.381830050505119,
        0.279705391489277,
        0.129484966168870,
    ]
)
_GAUSS_IDX = np.arange(1, 15, 2)


def _panel_nodes(edges_lo, edges_hi):
    mid = 0.5 * (edges_lo[:, None] + edges_hi[:, None])
    half = 0.5 * (edges_hi[:, None] - edges_lo[:, None])
    return mid + half * _XGK[None, :]


def fourier_call_price(
    p: ModelParams,
    x: float,
    t: float,
    damping: float = 0.5,
    quad_tol: float = 1e-8,
    tol_ode: float = None,
    max_rounds: int = 40,
) -> float:
    """European call by damped inverse transform along Re(z) = damping.

    One Riccati solve per quadrature node (nodes of a refinement round are
    bundled into a single batched integration). The returned price is
    clamped into its static bounds, which quadrature noise of size quad_tol
    could otherwise breach.
    """
    if t <= 0.0:
        raise OutOfRangeError("t", "maturity must be positive")
    if not 0.0 < damping < 1.0:
        raise OutOfRangeError("damping", "damping must lie in (0, 1)")
    if quad_tol <= 0.0:
        raise OutOfRangeError("quad_tol", "quad_tol must be positive")
    if tol_ode is None:
        tol_ode = min(1e-9, 0.01 * quad_tol)
    a = damping

    var_proxy = p.eta * t + p.v0 * t ** (p.d + 1.0) / math.gamma(p.d + 2.0)
    y_decay = math.sqrt(2.0 * max(-math.log(quad_tol), 10.0) / var_proxy)
    z_max = max(20.0, 1.2 * y_decay)
    width = min(z_max / 8.0, 6.0 * math.pi / max(abs(x), 1e-9), 60.0)
    n0 = min(max(8, math.ceil(z_max / width)), 96)
    edges = np.linspace(0.0, z_max, n0 + 1)

    def eval_panels(lo, hi):
        ys = _panel_nodes(lo, hi)
        flat = ys.ravel()
        values, _ = cgf_batch(p, a + 1j * flat, t, tol=tol_ode)
        z = a + 1j * flat
        integrand = np.real(
            np.exp(values + (1.0 - z) * x) / (z * (z - 1.0))
        ).reshape(ys.shape)
        half = 0.5 * (hi - lo)
        # elementwise-then-sum keeps the reduction order fixed (bit-stable)
        k15 = half * (integrand * _WGK).sum(axis=1)
        g7 = half * (integrand[:, _GAUSS_IDX] * _WG).sum(axis=1)
        return k15, np.abs(k15 - g7)

    lo = edges[:-1]
    hi = edges[1:]
    vals, errs = eval_panels(lo, hi)
    panels_lo = list(lo)
    panels_hi = list(hi)
    panels_val = list(vals)
    panels_err = list(errs)

    for _ in range(max_rounds):
        # extend the domain until the last panel no longer matters
        order = np.argsort(panels_hi)
        last = order[-1]
        need_extend = abs(panels_val[last]) >= quad_tol and panels_hi[last] < 1e7
        if need_extend:
            z0 = panels_hi[last]
            new_edges = np.linspace(z0, 2.0 * z0, 5)
            nlo, nhi = new_edges[:-1], new_edges[1:]
            v, e = eval_panels(nlo, nhi)
            panels_lo.extend(nlo)
            panels_hi.extend(nhi)
            panels_val.extend(v)
            panels_err.extend(e)
            continue
        total_err = float(np.sum(panels_err))
        if total_err <= 0.5 * quad_tol:
            break
        # split the worst offenders, largest error first
        worst = np.argsort(panels_err)[::-1][:8]
        worst = [i for i in worst if panels_err[i] > 0.5 * quad_tol / max(len(panels_err), 1)]
        if not worst:
            break
        mids = [(panels_lo[i] + panels_hi[i]) / 2.0 for i in worst]
        nlo = np.array([panels_lo[i] for i in worst] + mids)
        nhi = np.array(mids + [panels_hi[i] for i in worst])
        v, e = eval_panels(nlo, nhi)
        for j in sorted(worst, reverse=True):
            del panels_lo[j], panels_hi[j], panels_val[j], panels_err[j]
        panels_lo.extend(nlo)
        panels_hi.extend(nhi)
        panels_val.extend(v)
        panels_err.extend(e)
        if len(panels_lo) > 4096:
            raise QuadratureFailureError("panel budget exhausted in Fourier pricing")
    else:
        raise QuadratureFailureError(
            f"quadrature not converged after {max_rounds} refinement rounds"
        )

    price = 1.0 + float(np.sum(np.asarray(panels_val))) / math.pi
    lower, upper = _call_bounds(x)
    return min(max(price, lower), upper)
