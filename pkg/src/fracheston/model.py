"""Model parameters, time grids, and the shared special-function kernel.

The variance dynamics are CIR with a fractional Riemann-Liouville layer on top:

    dX_t = -1/2 V^d_t dt + sqrt(V^d_t) dB_t,        X_0 = 0
    dV_t = kappa (theta - V_t) dt + xi sqrt(V_t) dW_t,   V_0 = v0 > 0
    V^d_t = eta + I^d_{0+} V_t,                     d in [-1/2, 1/2]

with B and W independent. ``xi = 0`` and ``kappa = 0`` are admitted as
degenerate test modes (deterministic variance resp. driftless square root)
even though desk parameterisations keep them strictly positive.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import NonFiniteError, OutOfRangeError

PARAM_FIELDS = ("kappa", "theta", "xi", "v0", "eta", "d")


@dataclass(frozen=True)
class ModelParams:
    """The six model constants, validated on construction.

    kappa : mean-reversion rate (1/time), >= 0
    theta : long-run variance level, >= 0
    xi    : vol-of-vol (1/sqrt(time)), >= 0
    v0    : initial instantaneous variance, > 0
    eta   : variance floor shift, >= 0
    d     : fractional order, in [-1/2, 1/2]
    """

    kappa: float
    theta: float
    xi: float
    v0: float
    eta: float
    d: float

    def __post_init__(self):
        for name in PARAM_FIELDS:
            raw = getattr(self, name)
            try:
                value = float(raw)
            except (TypeError, ValueError):
                raise NonFiniteError(name, f"'{name}' is not a real number: {raw!r}")
            if not math.isfinite(value):
                raise NonFiniteError(name)
            object.__setattr__(self, name, value)
        if self.v0 <= 0.0:
            raise OutOfRangeError("v0", "v0 must be strictly positive")
        for name in ("kappa", "theta", "xi", "eta"):
            if getattr(self, name) < 0.0:
                raise OutOfRangeError(name, f"'{name}' must be nonnegative")
        if not -0.5 <= self.d <= 0.5:
            raise OutOfRangeError("d", "d must lie in [-1/2, 1/2]")

    @property
    def feller(self) -> bool:
        """Whether 2*kappa*theta >= xi^2 (origin unattainable for V)."""
        return 2.0 * self.kappa * self.theta >= self.xi**2

    @property
    def deterministic_variance(self) -> bool:
        """xi = 0: the variance path is the deterministic CIR mean."""
        return self.xi == 0.0

    @property
    def driftless(self) -> bool:
        """kappa = 0: no mean reversion (needed by the small-time limits)."""
        return self.kappa == 0.0

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_FIELDS}


def validate_params(kappa, theta, xi, v0, eta, d) -> ModelParams:
    """Validate six raw numbers into a ModelParams record.

    Idempotent: feeding back the fields of a validated record reproduces it.
    """
    return ModelParams(kappa, theta, xi, v0, eta, d)


def params_from_dict(obj) -> ModelParams:
    """Build ModelParams from a flat mapping with keys exactly PARAM_FIELDS."""
    if not isinstance(obj, dict):
        raise NonFiniteError("params", "expected a flat JSON object of six numbers")
    missing = [k for k in PARAM_FIELDS if k not in obj]
    if missing:
        raise OutOfRangeError(missing[0], f"missing parameter '{missing[0]}'")
    extra = [k for k in obj if k not in PARAM_FIELDS]
    if extra:
        raise OutOfRangeError(extra[0], f"unknown parameter '{extra[0]}'")
    return ModelParams(**{k: obj[k] for k in PARAM_FIELDS})


class TimeGrid:
    """Strictly increasing sequence of times starting at 0."""

    __slots__ = ("nodes",)

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 1:
            raise OutOfRangeError("nodes", "grid must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(nodes)):
            raise NonFiniteError("nodes")
        if nodes[0] != 0.0:
            raise OutOfRangeError("nodes", "grid must start at 0")
        if nodes.size > 1 and not np.all(np.diff(nodes) > 0.0):
            raise OutOfRangeError("nodes", "grid must be strictly increasing")
        self.nodes = nodes
        self.nodes.setflags(write=False)

    @classmethod
    def uniform(cls, horizon: float, n_steps: int) -> "TimeGrid":
        if horizon <= 0.0:
            raise OutOfRangeError("horizon", "horizon must be positive")
        if n_steps < 1:
            raise OutOfRangeError("n_steps", "need at least one step")
        return cls(np.linspace(0.0, horizon, n_steps + 1))

    def __len__(self):
        return self.nodes.size

    def __repr__(self):
        return f"TimeGrid(n={self.nodes.size}, horizon={self.nodes[-1]:g})"


def gamma_fn(x: float) -> float:
    """Gamma function on the positive half line.

    Every in-package use has argument > 1/2 (Gamma(1+d), Gamma(2+d), ...),
    so the reflection formula and its poles are deliberately unsupported.
    """
    x = float(x)
    if math.isnan(x):
        raise NonFiniteError("x")
    if x <= 0.0:
        raise OutOfRangeError("x", "gamma_fn supports x > 0 only")
    return math.gamma(x)


def std_normal_cdf(z):
    """Standard normal CDF, accurate to ~1e-16 absolute; accepts arrays."""
    return ndtr(z)
