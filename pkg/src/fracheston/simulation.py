"""Monte Carlo engine: CIR paths, fractional product integration, mixing pricer.

Because the volatility driver W is independent of the price driver B, the
log price is conditionally Gaussian given the variance path:

    X_t | (V_s) ~ N(-IV/2, IV),   IV = int_0^t V^d_s ds = eta t + int_0^t (t-u)^d V_u du / Gamma(d+1),

so a European call prices as the Black-Scholes value at total variance IV
averaged over variance paths (the mixing estimator). The time-integral
identity trades the non-integrable pointwise kernel (t-u)^(d-1) (d <= 0)
for the benign (t-u)^d, which product integration handles exactly on
piecewise-constant paths:

    int IV kernel over [s_k, s_k+1] = [(t-s_k)^(d+1) - (t-s_k+1)^(d+1)] / Gamma(d+2).

Randomness is drawn from counter-based Philox streams keyed by
(seed, path-block index) with a fixed block size, and block results are
reduced in block order, so estimates are bit-identical for a given
(seed, config) no matter how many workers run the blocks.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, OutOfRangeError
from .model import ModelParams, TimeGrid
from .pricing import bs_call_price

BLOCK_SIZE = 8192  # fixed: part of the determinism contract

FULL_TRUNCATION = "full_truncation"
EXACT_TRANSITION = "exact_transition"


@dataclass(frozen=True)
class McConfig:
    """Path count, per-unit-time resolution, seed, and variance scheme."""

    n_paths: int
    steps_per_unit_time: int
    seed: int
    scheme: str = FULL_TRUNCATION

    def __post_init__(self):
        if self.n_paths < 2:
            raise OutOfRangeError("n_paths", "need at least two paths")
        if self.steps_per_unit_time < 1:
            raise OutOfRangeError("steps_per_unit_time", "need at least one step per unit time")
        if self.scheme not in (FULL_TRUNCATION, EXACT_TRANSITION):
            raise OutOfRangeError("scheme", f"unknown scheme {self.scheme!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise OutOfRangeError("seed", "seed must fit in a 64-bit unsigned integer")


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with standard error sample_std / sqrt(n_paths)."""

    mean: float
    std_error: float
    n_paths: int
    seed: int


@dataclass(frozen=True)
class VariancePath:
    """One simulated variance path on its grid; values >= 0, values[0] = v0."""

    grid: TimeGrid
    values: np.ndarray


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    key = np.array([seed, block_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _blocks(n_paths: int):
    out = []
    start = 0
    index = 0
    while start < n_paths:
        size = min(BLOCK_SIZE, n_paths - start)
        out.append((index, size))
        start += size
        index += 1
    return out


def _grid_for(t: float, cfg: McConfig) -> TimeGrid:
    n_steps = max(1, math.ceil(t * cfg.steps_per_unit_time))
    return TimeGrid.uniform(t, n_steps)


def _cir_exact_step(p: ModelParams, v, dt, rng):
    """Noncentral chi-square transition as a Poisson-mixed Gamma draw."""
    if p.xi == 0.0:
        if p.kappa == 0.0:
            return v
        decay = math.exp(-p.kappa * dt)
        return p.theta + (v - p.theta) * decay
    if p.kappa > 0.0:
        decay = math.exp(-p.kappa * dt)
        c = p.xi**2 * (1.0 - decay) / (4.0 * p.kappa)
        lam = v * decay / c
    else:  # driftless square root: squared Bessel of dimension 4 theta kappa/xi^2 -> 0
        c = p.xi**2 * dt / 4.0
        lam = v / c
    nu = 4.0 * p.kappa * p.theta / p.xi**2
    pois = rng.poisson(0.5 * lam)
    shape = 0.5 * nu + pois
    out = np.zeros_like(v)
    live = shape > 0.0
    if np.any(live):
        out[live] = 2.0 * c * rng.standard_gamma(shape[live])
    return out


def _simulate_block(p: ModelParams, grid: TimeGrid, rng, n: int, scheme: str, consume):
    """March a block of n CIR paths along grid, handing each step's stored
    (nonnegative) values to consume(k, v_k). The draw order per step is fixed,
    so a block's stream is a pure function of (seed, block index)."""
    nodes = grid.nodes
    v_plus = np.full(n, p.v0)
    if scheme == FULL_TRUNCATION:
        latent = np.full(n, p.v0)
        for k in range(nodes.size - 1):
            consume(k, v_plus)
            dt = nodes[k + 1] - nodes[k]
            z = rng.standard_normal(n)
            latent = (
                latent
                + p.kappa * (p.theta - v_plus) * dt
                + p.xi * np.sqrt(v_plus * dt) * z
            )
            v_plus = np.maximum(latent, 0.0)
    else:
        for k in range(nodes.size - 1):
            consume(k, v_plus)
            dt = nodes[k + 1] - nodes[k]
            v_plus = _cir_exact_step(p, v_plus, dt, rng)
    consume(nodes.size - 1, v_plus)


def simulate_cir_path(
    p: ModelParams, grid: TimeGrid, rng_stream, scheme: str = FULL_TRUNCATION
) -> VariancePath:
    """One variance path driven by the supplied generator."""
    if scheme not in (FULL_TRUNCATION, EXACT_TRANSITION):
        raise OutOfRangeError("scheme", f"unknown scheme {scheme!r}")
    values = np.empty(grid.nodes.size)

    def consume(k, v):
        values[k] = v[0]

    _simulate_block(p, grid, rng_stream, 1, scheme, consume)
    return VariancePath(grid=grid, values=values)


def _frac_weights(nodes: np.ndarray, d: float) -> np.ndarray:
    """Exact integrals of (t-u)^d / Gamma(d+1) over each grid cell."""
    t = nodes[-1]
    tau = t - nodes
    return (tau[:-1] ** (d + 1.0) - tau[1:] ** (d + 1.0)) / math.gamma(d + 2.0)


def integrated_frac_variance(path: VariancePath, d: float, eta: float, t: float) -> float:
    """IV = eta t + sum_k V_k [(t-s_k)^(d+1) - (t-s_k+1)^(d+1)] / Gamma(d+2).

    Left-endpoint product integration, exact for piecewise-constant paths;
    t must be the terminal grid node.
    """
    if not -0.5 <= d <= 0.5:
        raise OutOfRangeError("d", "d must lie in [-1/2, 1/2]")
    nodes = path.grid.nodes
    if not math.isclose(t, nodes[-1], rel_tol=1e-12, abs_tol=0.0):
        raise GridMismatchError(f"t={t:g} is not the terminal grid node {nodes[-1]:g}")
    w = _frac_weights(nodes, d)
    return eta * t + float(np.sum(path.values[:-1] * w))


def _run_blocks(worker, n_paths: int, n_workers: int):
    blocks = _blocks(n_paths)
    if n_workers <= 1:
        return [worker(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(worker, blocks))  # map preserves block order


def _estimate_from_moments(parts, cfg: McConfig) -> McEstimate:
    n = sum(c for c, _, _ in parts)
    total = 0.0
    total_sq = 0.0
    for c, s, ss in parts:  # fixed block order: bit-stable reduction
        total += s
        total_sq += ss
    mean = total / n
    var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    return McEstimate(mean=mean, std_error=math.sqrt(var / n), n_paths=n, seed=cfg.seed)


def mc_call_prices(p: ModelParams, xs, t: float, cfg: McConfig, n_workers: int = 1):
    """Mixing (conditional Black-Scholes) call prices for several strikes
    off one set of variance paths. Returns a list of McEstimate."""
    if t <= 0.0:
        raise OutOfRangeError("t", "maturity must be positive")
    xs = [float(x) for x in xs]
    grid = _grid_for(t, cfg)
    weights = _frac_weights(grid.nodes, p.d)

    def worker(block):
        index, size = block
        rng = _block_rng(cfg.seed, index)
        iv = np.full(size, p.eta * t)

        def consume(k, v):
            if k < weights.size:
                iv[:] += v * weights[k]

        _simulate_block(p, grid, rng, size, cfg.scheme, consume)
        sigma = np.sqrt(iv)  # total variance as sigma^2 * 1
        out = []
        for x in xs:
            payoff = bs_call_price(x, 1.0, sigma)
            out.append((size, float(np.sum(payoff)), float(np.sum(payoff * payoff))))
        return out

    results = _run_blocks(worker, cfg.n_paths, n_workers)
    return [
        _estimate_from_moments([r[j] for r in results], cfg) for j in range(len(xs))
    ]


def mc_call_price(
    p: ModelParams, x: float, t: float, cfg: McConfig, n_workers: int = 1
) -> McEstimate:
    """Variance-reduced European call price by the mixing identity."""
    return mc_call_prices(p, [x], t, cfg, n_workers=n_workers)[0]


def mc_call_price_euler(
    p: ModelParams, x: float, t: float, cfg: McConfig, n_workers: int = 1
) -> McEstimate:
    """Plain Euler estimator E(e^X - e^x)_+ with pathwise X, for d = 0 only.

    Exists to validate the mixing identity: at d = 0 the variance layer is
    V^d = eta + V pointwise, so X can be marched directly with its own
    independent normals. Per step the variance draw precedes the price draw.
    """
    if p.d != 0.0:
        raise OutOfRangeError("d", "the naive Euler estimator is implemented for d = 0")
    if t <= 0.0:
        raise OutOfRangeError("t", "maturity must be positive")
    grid = _grid_for(t, cfg)
    nodes = grid.nodes
    strike = math.exp(x)

    def worker(block):
        index, size = block
        rng = _block_rng(cfg.seed, index)
        v_plus = np.full(size, p.v0)
        latent = np.full(size, p.v0)
        xlog = np.zeros(size)
        for k in range(nodes.size - 1):
            dt = nodes[k + 1] - nodes[k]
            z_w = rng.standard_normal(size)
            z_b = rng.standard_normal(size)
            vd = p.eta + v_plus
            xlog += -0.5 * vd * dt + np.sqrt(vd * dt) * z_b
            latent = (
                latent
                + p.kappa * (p.theta - v_plus) * dt
                + p.xi * np.sqrt(v_plus * dt) * z_w
            )
            v_plus = np.maximum(latent, 0.0)
        payoff = np.maximum(np.exp(xlog) - strike, 0.0)
        return (size, float(np.sum(payoff)), float(np.sum(payoff * payoff)))

    results = _run_blocks(worker, cfg.n_paths, n_workers)
    return _estimate_from_moments(results, cfg)


def mean_Vd_mc(p: ModelParams, t: float, cfg: McConfig, n_workers: int = 1) -> McEstimate:
    """Monte Carlo counterpart of the analytic fractional-variance mean.

    d > 0: pointwise Riemann-Liouville evaluation of V^d_t per path (the
    kernel (t-u)^(d-1) is integrable there). d = 0: eta + V_t. d < 0: the
    pointwise value is a fractional derivative of a rough path, so the
    time-integrated identity is used instead and the estimate targets the
    time average (1/t) int_0^t V^d_s ds.
    """
    if t <= 0.0:
        raise OutOfRangeError("t", "time must be positive")
    grid = _grid_for(t, cfg)
    nodes = grid.nodes
    if p.d > 0.0:
        tau = t - nodes
        w_point = (tau[:-1] ** p.d - tau[1:] ** p.d) / math.gamma(p.d + 1.0)
    elif p.d < 0.0:
        w_point = _frac_weights(nodes, p.d) / t
    else:
        w_point = None

    def worker(block):
        index, size = block
        rng = _block_rng(cfg.seed, index)
        acc = np.zeros(size)
        last = np.empty(size)

        def consume(k, v):
            if w_point is not None and k < w_point.size:
                acc[:] += v * w_point[k]
            if k == nodes.size - 1:
                last[:] = v

        _simulate_block(p, grid, rng, size, cfg.scheme, consume)
        if p.d == 0.0:
            y = p.eta + last
        else:
            y = p.eta + acc
        return (size, float(np.sum(y)), float(np.sum(y * y)))

    results = _run_blocks(worker, cfg.n_paths, n_workers)
    return _estimate_from_moments(results, cfg)


def cov_V_stationary(p: ModelParams, h: float) -> float:
    """Stationary CIR autocovariance c_V(h) = xi^2 theta e^(-kappa h) / (2 kappa)."""
    if p.kappa <= 0.0:
        raise OutOfRangeError("kappa", "stationary covariance requires kappa > 0")
    if h < 0.0:
        raise OutOfRangeError("h", "lag must be nonnegative")
    return p.xi**2 * p.theta * math.exp(-p.kappa * h) / (2.0 * p.kappa)
