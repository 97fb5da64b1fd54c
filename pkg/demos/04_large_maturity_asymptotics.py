#!/usr/bin/env python3
"""Large-maturity regime: scaled CGF limits, rate functions, option exponents.

Demonstrates the large-deviations layer:
  * convergence of the rescaled CGF to its limit (speed t^(1+d/2) for d > 0,
    t for d < 0),
  * the dual pair Lambda_+ / Lambda_+* checked through the numeric
    Fenchel-Legendre transform, and the piecewise Lambda_-*,
  * the large-time asymptotic smile sqrt(2) t^(d/4) (sqrt(L*) + sqrt(L* - x)),
  * the piecewise put / call / covered-call log-price exponents.

Saves demos/output/large_maturity.png when matplotlib is available.
"""

import os

import numpy as np

from fracheston import (
    CgfQuery,
    cgf,
    exponent_minimisers,
    fenchel_legendre,
    lambda_minus,
    lambda_plus,
    large_time_cgf_limit,
    option_asymptote_large_time,
    rate_minus_star,
    rate_plus_star,
    smile_large_time,
    validate_params,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")

# --- scaled CGF convergence ----------------------------------------------------
p_pos = validate_params(0.007, 0.04, 2.0, 1e-4, 0.0, 0.2)
u = 0.5
limit = large_time_cgf_limit(p_pos, u)
print(f"d={p_pos.d} (speed t^(1+d/2)): limit for u={u} is {limit:.6e}")
conv = []
for t in (50.0, 100.0, 200.0, 400.0, 800.0):
    scaled = cgf(p_pos, CgfQuery(u=u, t=t), tol=1e-11).value.real / t ** (1.0 + p_pos.d / 2.0)
    conv.append((t, scaled))
    print(f"  t={t:6.0f}: scaled CGF = {scaled:.6e}  (gap {scaled/limit - 1:+.3%})")

p_neg = validate_params(0.5, 0.002, 0.05, 0.04, 0.1, -0.2)
lim_neg = lambda_minus(0.5, p_neg.eta)
scaled = cgf(p_neg, CgfQuery(u=0.5, t=200.0), tol=1e-11).value.real / 200.0
print(f"d={p_neg.d} (speed t): t^-1 m(1/2, 200) = {scaled:.6e} vs "
      f"Lambda_-(1/2) = {lim_neg:.6e} (gap {scaled/lim_neg - 1:+.3%})")

# --- Legendre duality -----------------------------------------------------------
p = validate_params(1.0, 0.04, 0.2, 0.04, 0.01, 0.2)
print("\nFenchel-Legendre duality (numeric transform vs closed form):")
for x in (-0.5, 0.0, 0.5):
    numeric = fenchel_legendre(lambda v: lambda_plus(v, p), 0.0, 1.0, x, tol=1e-12)
    closed = rate_plus_star(x, p)
    print(f"  x={x:+.1f}: numeric {numeric:.10f}  closed {closed:.10f}")

# --- asymptotic smile and option exponents ---------------------------------------
t_big = 20.0
print(f"\nlarge-time smile sigma~(x) t^(-d/4) at t={t_big} (d={p.d}):")
for x in (-0.3, 0.0, 0.3):
    pt = smile_large_time(p, x, t_big)
    print(f"  x={x:+.1f}: vol = {pt.implied_vol:.4f} at log strike {pt.log_strike:+.3f}")

eta, um, up = 0.1, -2.0, 3.0
p_exp = validate_params(0.5, 0.002, 0.05, 0.04, eta, -0.2)
x_star, x_tilde = exponent_minimisers(p_exp)
rate = lambda y: rate_minus_star(y, eta, um, up).value
print(f"\ncovered-call exponent for d<0 (x* = {x_star:+.3f}, x~* = {x_tilde:+.3f}):")
for x in (-0.2, -eta / 2.0, 0.0, eta / 2.0 + 0.05):
    val = option_asymptote_large_time(x, "covered_call", rate, x_star, x_tilde)
    print(f"  x={x:+.3f}: lim t^-1 log(1 - call) = {val:+.5f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not available; skipping the figure")
else:
    os.makedirs(OUT_DIR, exist_ok=True)
    fig, axes = plt.subplots(1, 3, figsize=(14, 4))
    arr = np.array(conv)
    axes[0].semilogx(arr[:, 0], arr[:, 1] / limit, "o-")
    axes[0].axhline(1.0, color="k", ls="--", lw=0.8)
    axes[0].set_xlabel("t")
    axes[0].set_title(r"$t^{-(1+d/2)} m(u,t)\,/\,$limit")

    xs = np.linspace(-0.6, 0.6, 121)
    axes[1].plot(xs, [rate_plus_star(float(x), p) for x in xs], label=r"$\Lambda_+^*$")
    axes[1].plot(xs, [rate_minus_star(float(x), eta, um, up).value for x in xs],
                 label=r"$\Lambda_-^*$")
    axes[1].plot(xs, np.maximum(xs, 0.0), "k:", lw=0.8, label=r"$\max(x,0)$")
    axes[1].set_xlabel("x")
    axes[1].legend()
    axes[1].set_title("rate functions")

    smile = [smile_large_time(p, float(x), t_big).implied_vol for x in xs]
    axes[2].plot(xs, smile)
    axes[2].set_xlabel("scaled log strike x")
    axes[2].set_title(rf"asymptotic smile at t={t_big:g}")
    fig.tight_layout()
    path = os.path.join(OUT_DIR, "large_maturity.png")
    fig.savefig(path, dpi=120)
    print(f"figure written to {path}")
