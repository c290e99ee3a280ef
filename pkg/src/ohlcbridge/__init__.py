"""Conditioned-diffusion interpolation of OHLC bars.

Given a bar's open/high/low/close, the package computes the law of the
underlying path at interior times conditioned on increasingly rich subsets
of the bar statistics (close only; close and high; high and low; all
three), along with Monte Carlo machinery to validate every analytic
surface, volatility estimators, and a command-line interface.

All laws are expressed for a driftless diffusion started at the bar open,
normalized so the bar spans [0, 1] in time; ``ModelParams`` carries the
volatility scale.
"""

from .curves import ConditionalCurve, MomentTriple, floor_variance
from .errors import (
    BracketError,
    CapacityError,
    DataError,
    DegenerateBarError,
    DensityUnderflowError,
    DomainError,
    GapError,
    NumericError,
    OhlcBridgeError,
    ScoreUndefinedError,
    TruncationError,
)
from .extrema import (
    FellerEval,
    HighCloseStat,
    HighLowCloseStat,
    choi_roh_distribution,
    close_given_high_moments,
    density_high,
    density_hl,
    density_hlc,
    feller_range_density,
    feller_range_evaluation,
    joint_high_close,
    log_density_hl,
    log_density_hlc,
    log_joint_high_close,
    reflection_series,
)
from .condch import (
    conditional_curve_ch,
    conditional_curve_close,
    conditional_curve_given_high,
    density_given_high,
    four_gaussian_terms,
    joint_density_cht,
    moments_ch,
    moments_given_high,
)
from .condchl import (
    barrier_series_Q,
    boundary_cancellation_check,
    conditional_curve_chl,
    conditional_curve_hl,
    conditional_density_chl,
    conditional_density_hl,
    distribution_hl,
    generator_G,
    moments_chl,
    moments_hl,
    quadrature_moments_chl,
    term_table,
)
from .params import (
    DEFAULT_QUADRATURE,
    DEFAULT_SERIES,
    ModelParams,
    QuadratureControl,
    SeriesControl,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "CapacityError",
    "ConditionalCurve",
    "DataError",
    "DEFAULT_QUADRATURE",
    "DEFAULT_SERIES",
    "DegenerateBarError",
    "DensityUnderflowError",
    "DomainError",
    "FellerEval",
    "GapError",
    "HighCloseStat",
    "HighLowCloseStat",
    "ModelParams",
    "MomentTriple",
    "NumericError",
    "OhlcBridgeError",
    "QuadratureControl",
    "ScoreUndefinedError",
    "SeriesControl",
    "TruncationError",
    "barrier_series_Q",
    "boundary_cancellation_check",
    "choi_roh_distribution",
    "close_given_high_moments",
    "conditional_curve_ch",
    "conditional_curve_chl",
    "conditional_curve_close",
    "conditional_curve_given_high",
    "conditional_curve_hl",
    "conditional_density_chl",
    "conditional_density_hl",
    "density_given_high",
    "density_high",
    "density_hl",
    "density_hlc",
    "distribution_hl",
    "feller_range_density",
    "feller_range_evaluation",
    "floor_variance",
    "four_gaussian_terms",
    "generator_G",
    "joint_density_cht",
    "joint_high_close",
    "log_density_hl",
    "log_density_hlc",
    "log_joint_high_close",
    "moments_ch",
    "moments_chl",
    "moments_given_high",
    "moments_hl",
    "quadrature_moments_chl",
    "reflection_series",
    "term_table",
]
