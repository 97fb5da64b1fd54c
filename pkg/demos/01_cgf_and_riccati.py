#!/usr/bin/env python3
"""Riccati trajectories, closed-form oracles, and the comparison envelope.

Walks through the exact cumulant generating function machinery:
  * B(t) trajectories for a fan of transform arguments u, with the
    comparison envelope psi_-(t) <= B(t) <= psi_+(t),
  * the martingale identity m(1, 0, t) = 0,
  * the kappa=0, d=0 tan/tanh closed form against the ODE engine,
  * the kappa=0 power series against the ODE engine,
  * a moment explosion: B dives to -infinity at finite time once u leaves
    the effective domain.

Saves a figure to demos/output/riccati.png when matplotlib is available.
"""

import os

import numpy as np

from fracheston import (
    CgfQuery,
    bounds_psi,
    cgf,
    heston_tan_mgf,
    riccati_solve,
    series_B_kappa0,
    validate_params,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")

p = validate_params(kappa=1.0, theta=0.04, xi=0.2, v0=0.04, eta=0.01, d=0.2)
print(f"model: {p}")
print(f"feller condition holds: {p.feller}\n")

# --- martingale identity ----------------------------------------------------
print("martingale identity m(1, 0, t):")
for t in (0.1, 1.0, 10.0):
    print(f"  t={t:5.1f}: m = {cgf(p, CgfQuery(u=1.0, t=t)).value.real:+.2e}")

# --- tan/tanh oracle (kappa = 0, d = 0, eta = 0) -----------------------------
p_tan = validate_params(0.0, 0.04, 0.5, 0.04, 0.0, 0.0)
print("\nkappa=0, d=0, eta=0 closed form vs ODE engine:")
for u in (-1.0, 0.5, 2.0):
    ref = heston_tan_mgf(p_tan.v0, p_tan.xi, u, 1.0)
    ode = cgf(p_tan, CgfQuery(u=u, t=1.0), tol=1e-11).value.real
    print(f"  u={u:+.1f}: tan formula {ref:+.10f}   ode {ode:+.10f}   rel {abs(ode-ref)/abs(ref):.1e}")

# --- power series (kappa = 0, fractional d) ----------------------------------
p_ser = validate_params(0.0, 0.04, 0.5, 0.04, 0.0, 0.2)
b_series = series_B_kappa0(p_ser, 0.5, 0.9, n_terms=80)
b_ode = riccati_solve(p_ser, CgfQuery(u=0.5, t=0.9), tol=1e-12).B[-1].real
print(f"\nkappa=0, d=0.2 series vs ODE at t=0.9: {b_series:.12f} vs {b_ode:.12f}")

# --- trajectories and the psi envelope ---------------------------------------
t_max = 30.0
fan = (0.25, 0.5, 0.75)
solutions = {u: riccati_solve(p, CgfQuery(u=u, t=t_max), dt_max=0.25) for u in fan}
print("\ncomparison envelope margins over [0, 30]:")
for u, sol in solutions.items():
    lo, hi = bounds_psi(p, u, sol.grid.nodes)
    b = sol.B.real
    print(f"  u={u}: min(B - psi-) = {np.min(b - lo):.3e}, min(psi+ - B) = {np.min(hi - b):.3e}")

# --- moment explosion ---------------------------------------------------------
exploding = riccati_solve(p, CgfQuery(u=5.0, t=20.0))
print(f"\nu=5 leaves the effective domain: blow-up at t* = {exploding.blow_up_time:.4f}")
print(f"m(5, t=20) status: {cgf(p, CgfQuery(u=5.0, t=20.0)).status}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("\nmatplotlib not available; skipping the figure")
else:
    os.makedirs(OUT_DIR, exist_ok=True)
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for u, sol in solutions.items():
        axes[0].plot(sol.grid.nodes, sol.B.real, label=f"B(t), u={u}")
    ts = np.linspace(1e-6, t_max, 400)
    lo, hi = bounds_psi(p, 0.5, ts)
    axes[0].plot(ts, hi, "k--", lw=0.8, label=r"$\psi_\pm$ envelope (u=1/2)")
    axes[0].plot(ts, lo, "k--", lw=0.8)
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("B(t)")
    axes[0].set_ylim(-0.5, 1.5)
    axes[0].legend(fontsize=8)
    axes[0].set_title("Riccati trajectories inside the envelope")

    axes[1].plot(exploding.grid.nodes, exploding.B.real)
    axes[1].set_yscale("symlog")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("B(t)")
    axes[1].set_title(f"moment explosion at u=5 (t* = {exploding.blow_up_time:.2f})")
    fig.tight_layout()
    path = os.path.join(OUT_DIR, "riccati.png")
    fig.savefig(path, dpi=120)
    print(f"\nfigure written to {path}")
