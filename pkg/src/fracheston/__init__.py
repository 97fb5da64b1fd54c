"""Uncorrelated fractional Heston model: exact CGF via fractional Riccati
ODEs, Fourier and Monte Carlo option pricing, implied volatility, and the
small/large-maturity large-deviations asymptotics of the smile."""

from .asymptotics import (
    AsymptoticSmile,
    RateFunctionEval,
    asymptotic_smile,
    exponent_minimisers,
    fenchel_legendre,
    lambda_minus,
    lambda_plus,
    large_time_cgf_limit,
    option_asymptote_large_time,
    rate_minus_star,
    rate_plus_star,
    small_rate_minus,
    small_rate_plus,
    small_time_cgf_limit,
    smile_large_time,
    smile_small_time,
    u_of_x,
)
from .cgf import (
    BLOW_UP_THRESHOLD,
    CgfQuery,
    CgfResult,
    RiccatiSolution,
    SeriesCoefficients,
    bounds_psi,
    cgf,
    cgf_batch,
    characteristic_fn,
    heston_tan_mgf,
    mean_Vd,
    moment_domain_estimate,
    riccati_solve,
    series_B_kappa0,
    series_coefficients,
    small_time_expansion,
)
from .errors import (
    FracHestonError,
    GridMismatchError,
    HorizonTooShortError,
    NearBoundWarning,
    NoSolutionError,
    NonConvexWarning,
    NonFiniteError,
    OutOfRangeError,
    OutsideDomainError,
    ParameterError,
    PoleProximityError,
    QuadratureFailureError,
)
from .model import (
    ModelParams,
    TimeGrid,
    gamma_fn,
    params_from_dict,
    std_normal_cdf,
    validate_params,
)
from .pricing import (
    OptionQuote,
    SmilePoint,
    bs_call_price,
    bs_put_price,
    covered_call_value,
    fourier_call_price,
    implied_vol,
)
from .simulation import (
    EXACT_TRANSITION,
    FULL_TRUNCATION,
    McConfig,
    McEstimate,
    VariancePath,
    cov_V_stationary,
    integrated_frac_variance,
    mc_call_price,
    mc_call_price_euler,
    mc_call_prices,
    mean_Vd_mc,
    simulate_cir_path,
)

__version__ = "0.1.0"
