#!/usr/bin/env python3
"""Short-maturity smile: jump-type explosion for d < 0, flattening for d > 0.

The short end of the smile separates the two memory regimes:
  * d < 0 (short memory): implied variance explodes like t^d; the rescaled
    quantity t^(-d) Sigma^2 tends to v0 / Gamma(d+2), strike-independent.
  * d > 0 (long memory): implied variance flattens to the floor eta, as for
    any continuous-path diffusion.

Both limits are checked here against actual Fourier prices at decreasing
maturities. Saves demos/output/small_maturity.png when matplotlib is there.
"""

import math
import os

import numpy as np

from fracheston import (
    OptionQuote,
    fourier_call_price,
    implied_vol,
    smile_small_time,
    validate_params,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")


def implied_variance(p, x, t):
    price = fourier_call_price(p, x, t, quad_tol=1e-9)
    return implied_vol(OptionQuote(x, t, price)) ** 2


# --- d < 0: explosion ---------------------------------------------------------
p_neg = validate_params(kappa=1.0, theta=0.04, xi=0.2, v0=0.04, eta=0.01, d=-0.3)
x = 0.05
limit = p_neg.v0 / math.gamma(p_neg.d + 2.0)
ts = (0.05, 0.02, 0.01, 0.005)
print(f"d={p_neg.d}: t^(-d) Sigma^2(x={x}) against the limit v0/Gamma(d+2) = {limit:.6f}")
neg_rows = []
for t in ts:
    scaled = t ** (-p_neg.d) * implied_variance(p_neg, x, t)
    ansatz = smile_small_time(p_neg, x, t).implied_vol ** 2 * t ** (-p_neg.d)
    neg_rows.append((t, scaled))
    print(f"  t={t:6.3f}: scaled Sigma^2 = {scaled:.6f}  (gap {scaled/limit - 1:+.2%}, "
          f"ansatz {ansatz:.6f})")

# --- d > 0: flattening ---------------------------------------------------------
p_pos = validate_params(kappa=1.0, theta=0.04, xi=0.2, v0=0.01, eta=0.04, d=0.3)
print(f"\nd={p_pos.d}: Sigma^2 at t=0.005 against the floor eta = {p_pos.eta}")
pos_rows = []
for x in (-0.05, -0.02, 0.02, 0.05):
    var = implied_variance(p_pos, x, 0.005)
    pos_rows.append((x, var))
    print(f"  x={x:+5.2f}: Sigma^2 = {var:.6f}  (gap {var/p_pos.eta - 1:+.2%})")
spread = max(v for _, v in pos_rows) - min(v for _, v in pos_rows)
print(f"  strike spread = {spread:.2e} ({spread/p_pos.eta:.3%} of eta): flat smile")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not available; skipping the figure")
else:
    os.makedirs(OUT_DIR, exist_ok=True)
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    arr = np.array(neg_rows)
    axes[0].semilogx(arr[:, 0], arr[:, 1], "o-", label=r"$t^{-d}\Sigma^2$ from prices")
    axes[0].axhline(limit, color="k", ls="--", lw=0.8, label=r"$v_0/\Gamma(d+2)$")
    axes[0].set_xlabel("maturity t")
    axes[0].set_title(f"d={p_neg.d}: smile explosion at rate $t^{{d/2}}$")
    axes[0].legend()
    arr = np.array(pos_rows)
    axes[1].plot(arr[:, 0], arr[:, 1], "s-", label=r"$\Sigma^2(x, t=0.005)$")
    axes[1].axhline(p_pos.eta, color="k", ls="--", lw=0.8, label=r"$\eta$")
    axes[1].set_xlabel("log strike x")
    axes[1].set_title(f"d={p_pos.d}: flat short-end smile")
    axes[1].legend()
    fig.tight_layout()
    path = os.path.join(OUT_DIR, "small_maturity.png")
    fig.savefig(path, dpi=120)
    print(f"figure written to {path}")
