"""Command-line surface: pricing, smiles, asymptotics, simulation, verification.

Output is CSV (default) or JSON (--format json) on stdout with fixed column
sets per verb; floats are printed with 17 significant digits so runs are
byte-reproducible and machine-diffable. Exit codes: 0 success, 2 validation
error, 1 numerical failure (blow-up, quadrature, failed verify suite); on
error a JSON object {"error", "field", "message"} goes to stderr.

Model parameters come from built-in defaults, overridden by an optional
--config JSON file (flat object with keys kappa, theta, xi, v0, eta, d),
overridden by the corresponding flags.
"""

import argparse
import csv
import json
import math
import sys

from .asymptotics import (
    rate_minus_star,
    rate_plus_star,
    small_rate_minus,
    small_rate_plus,
    smile_large_time,
    smile_small_time,
)
from .cgf import CgfQuery, cgf, moment_domain_estimate
from .errors import FracHestonError, OutOfRangeError, ParameterError
from .model import PARAM_FIELDS, validate_params
from .pricing import OptionQuote, fourier_call_price, implied_vol
from .simulation import FULL_TRUNCATION, EXACT_TRANSITION, McConfig, mc_call_price
from .verification import SUITES

DEFAULT_PARAMS = {
    "kappa": 1.0,
    "theta": 0.04,
    "xi": 0.2,
    "v0": 0.04,
    "eta": 0.01,
    "d": 0.2,
}

COLUMNS = {
    "cgf": ("u", "w", "t", "value", "status"),
    "price": ("x", "t", "price", "implied_vol"),
    "smile": ("x", "t", "implied_vol", "source"),
    "asymptote": ("x_coord", "log_strike", "t", "implied_vol", "source"),
    "simulate": ("x", "t", "price", "std_error", "n_paths", "seed"),
    "ratefn": ("x", "value", "branch"),
    "verify": ("name", "expected", "observed", "tolerance", "pass"),
}


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _emit(rows, columns, fmt, out):
    if fmt == "json":
        out.write(json.dumps([{c: r[c] for c in columns} for r in rows], default=_fmt))
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in columns])


def _resolve_params(args):
    merged = dict(DEFAULT_PARAMS)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        # structural check only here; flags may still override bad values
        if not isinstance(raw, dict):
            raise ParameterError("config", "config must be a flat JSON object")
        for key in raw:
            if key not in PARAM_FIELDS:
                raise ParameterError(key, f"unknown parameter '{key}' in config")
        for key in PARAM_FIELDS:
            if key not in raw:
                raise ParameterError(key, f"missing parameter '{key}' in config")
        merged.update(raw)
    for name in PARAM_FIELDS:
        value = getattr(args, name)
        if value is not None:
            merged[name] = value
    return validate_params(**{k: merged[k] for k in PARAM_FIELDS})


def _build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    for name in PARAM_FIELDS:
        shared.add_argument(f"--{name}", type=float, default=None, help=f"model parameter {name}")
    shared.add_argument("--config", default=None, help="JSON file with the six parameters")
    shared.add_argument("--format", choices=("csv", "json"), default="csv")

    top = argparse.ArgumentParser(
        prog="fracheston",
        description="Uncorrelated fractional Heston model: CGF, pricing, smiles, asymptotics",
    )
    sub = top.add_subparsers(dest="verb", required=True)

    q = sub.add_parser("cgf", parents=[shared], help="cumulant generating function m(u, w, t)")
    q.add_argument("--u", type=float, required=True)
    q.add_argument("--w", type=float, default=0.0)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--tol", type=float, default=1e-10)

    pr = sub.add_parser("price", parents=[shared], help="Fourier call price and implied vol")
    pr.add_argument("--x", type=float, default=0.0, help="log strike")
    pr.add_argument("--t", type=float, required=True)
    pr.add_argument("--damping", type=float, default=0.5)
    pr.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance")

    sm = sub.add_parser("smile", parents=[shared], help="implied-vol smile on a strike ladder")
    sm.add_argument("--x-min", type=float, default=-0.2)
    sm.add_argument("--x-max", type=float, default=0.2)
    sm.add_argument("--x-steps", type=int, default=9)
    sm.add_argument("--t", type=float, required=True)
    sm.add_argument("--damping", type=float, default=0.5)
    sm.add_argument("--tol", type=float, default=1e-8)
    sm.add_argument(
        "--regime",
        choices=("small", "large", "auto", "none"),
        default="auto",
        help="which asymptotic smile to emit alongside the Fourier smile",
    )
    sm.add_argument("--mc", action="store_true", help="also emit Monte Carlo rows")
    sm.add_argument("--paths", type=int, default=20000)
    sm.add_argument("--steps", type=int, default=200, help="steps per unit time")
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--scheme", choices=(FULL_TRUNCATION, EXACT_TRANSITION), default=FULL_TRUNCATION)

    asy = sub.add_parser("asymptote", parents=[shared], help="asymptotic smile point")
    asy.add_argument("--regime", choices=("small", "large"), required=True)
    asy.add_argument("--x", type=float, required=True, help="theorem coordinate")
    asy.add_argument("--t", type=float, required=True)
    asy.add_argument("--horizon", type=float, default=200.0, help="moment-domain horizon (d < 0)")

    sim = sub.add_parser("simulate", parents=[shared], help="Monte Carlo call price")
    sim.add_argument("--x", type=float, default=0.0)
    sim.add_argument("--t", type=float, required=True)
    sim.add_argument("--paths", type=int, default=20000)
    sim.add_argument("--steps", type=int, default=200, help="steps per unit time")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--scheme", choices=(FULL_TRUNCATION, EXACT_TRANSITION), default=FULL_TRUNCATION)

    rf = sub.add_parser("ratefn", parents=[shared], help="rate functions on an x grid")
    rf.add_argument(
        "--family",
        choices=("large_plus", "large_minus", "small_plus", "small_minus"),
        required=True,
    )
    rf.add_argument("--x-min", type=float, default=-0.5)
    rf.add_argument("--x-max", type=float, default=0.5)
    rf.add_argument("--x-steps", type=int, default=21)
    rf.add_argument("--u-minus", type=float, default=None, help="moment-domain lower endpoint")
    rf.add_argument("--u-plus", type=float, default=None, help="moment-domain upper endpoint")
    rf.add_argument("--horizon", type=float, default=200.0)

    ver = sub.add_parser("verify", parents=[shared], help="run a verification suite")
    ver.add_argument("--suite", choices=sorted(SUITES), required=True)
    ver.add_argument("--paths", type=int, default=20000)
    ver.add_argument("--seed", type=int, default=20240211)
    return top


def _xgrid(args):
    n = max(int(args.x_steps), 1)
    if n == 1:
        return [args.x_min]
    step = (args.x_max - args.x_min) / (n - 1)
    return [args.x_min + i * step for i in range(n)]


def _verb_cgf(args, p):
    res = cgf(p, CgfQuery(u=args.u, t=args.t, w=args.w), tol=args.tol)
    value = res.value.real if res.converged else math.inf
    rows = [{"u": args.u, "w": args.w, "t": args.t, "value": value, "status": res.status}]
    return rows, (0 if res.converged else 1)


def _verb_price(args, p):
    price = fourier_call_price(p, args.x, args.t, damping=args.damping, quad_tol=args.tol)
    vol = implied_vol(OptionQuote(args.x, args.t, price))
    return [{"x": args.x, "t": args.t, "price": price, "implied_vol": vol}], 0


def _asymptotic_points(p, xs, t, regime, horizon=200.0):
    points = []
    if regime == "small":
        for x in xs:
            if x == 0.0:
                continue
            points.append(smile_small_time(p, x, t))
    else:
        u_minus = u_plus = None
        if p.d < 0.0:
            u_minus, u_plus = moment_domain_estimate(p, t_horizon=horizon)
        scale = t ** (1.0 + p.d / 2.0) if p.d > 0.0 else t
        for x in xs:
            try:
                points.append(
                    smile_large_time(p, x / scale, t, u_minus=u_minus, u_plus=u_plus)
                )
            except OutOfRangeError:
                continue  # outside the admissible window: no asymptote there
    return points


def _verb_smile(args, p):
    xs = _xgrid(args)
    rows = []
    for x in xs:
        price = fourier_call_price(p, x, args.t, damping=args.damping, quad_tol=args.tol)
        vol = implied_vol(OptionQuote(x, args.t, price))
        rows.append({"x": x, "t": args.t, "implied_vol": vol, "source": "fourier"})
    if args.mc:
        cfg = McConfig(args.paths, args.steps, seed=args.seed, scheme=args.scheme)
        for x in xs:
            est = mc_call_price(p, x, args.t, cfg)
            vol = implied_vol(OptionQuote(x, args.t, est.mean))
            rows.append({"x": x, "t": args.t, "implied_vol": vol, "source": "mc"})
    regime = args.regime
    if regime == "auto":
        regime = "small" if args.t < 1.0 else "large"
    if regime != "none" and p.d != 0.0:
        for pt in _asymptotic_points(p, xs, args.t, regime):
            rows.append(
                {
                    "x": pt.log_strike,
                    "t": args.t,
                    "implied_vol": pt.implied_vol,
                    "source": pt.source,
                }
            )
    return rows, 0


def _verb_asymptote(args, p):
    if args.regime == "small":
        pt = smile_small_time(p, args.x, args.t)
    else:
        u_minus = u_plus = None
        if p.d < 0.0:
            u_minus, u_plus = moment_domain_estimate(p, t_horizon=args.horizon)
        pt = smile_large_time(p, args.x, args.t, u_minus=u_minus, u_plus=u_plus)
    row = {
        "x_coord": args.x,
        "log_strike": pt.log_strike,
        "t": args.t,
        "implied_vol": pt.implied_vol,
        "source": pt.source,
    }
    return [row], 0


def _verb_simulate(args, p):
    cfg = McConfig(args.paths, args.steps, seed=args.seed, scheme=args.scheme)
    est = mc_call_price(p, args.x, args.t, cfg)
    row = {
        "x": args.x,
        "t": args.t,
        "price": est.mean,
        "std_error": est.std_error,
        "n_paths": est.n_paths,
        "seed": est.seed,
    }
    return [row], 0


def _verb_ratefn(args, p):
    xs = _xgrid(args)
    rows = []
    if args.family == "large_minus":
        u_minus, u_plus = args.u_minus, args.u_plus
        if u_minus is None or u_plus is None:
            u_minus, u_plus = moment_domain_estimate(p, t_horizon=args.horizon)
    for x in xs:
        if args.family == "large_plus":
            value, branch = rate_plus_star(x, p), "interior"
        elif args.family == "large_minus":
            ev = rate_minus_star(x, p.eta, u_minus, u_plus)
            value, branch = ev.value, ev.branch
        elif args.family == "small_plus":
            value, branch = small_rate_plus(x, p.eta), "interior"
        else:
            value, branch = small_rate_minus(x, p.v0, p.d), "interior"
        rows.append({"x": x, "value": value, "branch": branch})
    return rows, 0


def _verb_verify(args, p):
    suite = SUITES[args.suite]
    checks = suite(d=p.d, paths=args.paths, seed=args.seed)
    rows = [
        {
            "name": c.name,
            "expected": float(c.expected),
            "observed": float(c.observed),
            "tolerance": float(c.tolerance),
            "pass": c.passed,
        }
        for c in checks
    ]
    return rows, (0 if all(c.passed for c in checks) else 1)


_VERBS = {
    "cgf": _verb_cgf,
    "price": _verb_price,
    "smile": _verb_smile,
    "asymptote": _verb_asymptote,
    "simulate": _verb_simulate,
    "ratefn": _verb_ratefn,
    "verify": _verb_verify,
}


def run(argv=None, out=None, err=None) -> int:
    """Parse argv, execute one verb, and write structured output to stdout."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        p = _resolve_params(args)
        rows, code = _VERBS[args.verb](args, p)
    except ParameterError as exc:
        err.write(json.dumps({"error": type(exc).__name__, "field": exc.field, "message": str(exc)}))
        err.write("\n")
        return 2
    except FracHestonError as exc:
        err.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        err.write("\n")
        return 1
    _emit(rows, COLUMNS[args.verb], args.format, out)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
