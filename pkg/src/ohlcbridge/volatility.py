"""Volatility estimation, the volatility-time transform, and scoring.

Three sigma^2 estimators (squared close, Garman-Klass, and maximum
likelihood over the terminal (high, low, close) density), an intraday
volatility-time map built from lagged squared differences, and the
vol-weighted scores used to rank interpolators.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import (
    BracketError,
    DegenerateBarError,
    DensityUnderflowError,
    DomainError,
    GapError,
    ScoreUndefinedError,
    TruncationError,
)
from .extrema import HighLowCloseStat, log_density_hlc
from .params import ModelParams

GK_RANGE = 0.511
GK_CROSS = 0.019
GK_CLOSE = 0.383

# ML bracket relative to the Garman-Klass seed, and its convergence target
ML_BRACKET = (0.01, 100.0)
ML_REL_TOL = 1e-8


@dataclass(frozen=True)
class VolEstimate:
    """A sigma^2 estimate with its provenance."""

    sigma_sq: float
    method: str
    iterations: int = 0

    def __post_init__(self):
        if not self.sigma_sq > 0.0:
            raise DegenerateBarError(
                f"nonpositive variance estimate {self.sigma_sq} ({self.method})"
            )

    @property
    def sigma(self):
        return math.sqrt(self.sigma_sq)

    def params(self):
        return ModelParams(sigma=self.sigma)


def _hlc(bar):
    """Accept an OhlcBar, a HighLowCloseStat, or a bare (h, l, c) triple."""
    if hasattr(bar, "high_log"):
        return bar.high_log, bar.low_log, bar.close_log
    if hasattr(bar, "high"):
        return bar.high, bar.low, bar.close
    h, low, c = bar
    return float(h), float(low), float(c)


def sigma_const(bars):
    """Mean squared normalized close over a window of bars."""
    closes = np.array([_hlc(b)[2] for b in bars])
    if closes.size == 0:
        raise DomainError("sigma_const needs at least one bar")
    return VolEstimate(sigma_sq=float(np.mean(closes**2)), method="const")


def sigma_garman_klass(bar):
    """The quadratic range/close combination with the classical weights.

    Off-model bars can push the quadratic form nonpositive; that raises
    rather than returning an unusable estimate.
    """
    h, low, c = _hlc(bar)
    est = (
        GK_RANGE * (h - low) ** 2
        - GK_CROSS * (c * (h + low) - 2.0 * h * low)
        - GK_CLOSE * c * c
    )
    if not est > 0.0:
        raise DegenerateBarError(
            f"Garman-Klass estimate {est:.3e} not positive for bar {(h, low, c)}"
        )
    return VolEstimate(sigma_sq=float(est), method="garman_klass")


def _parkinson(h, low):
    return (h - low) ** 2 / (4.0 * math.log(2.0))


def sigma_max_likelihood(bar, bracket=None):
    """argmax over sigma^2 of the terminal (high, low, close) log density.

    The search runs in log sigma^2 (positivity for free, and the
    likelihood is close to parabolic there) with a derivative-free
    bounded minimizer.  The default bracket spans [0.01, 100] times the
    Garman-Klass seed, falling back to the Parkinson range estimate when
    Garman-Klass is degenerate.  A maximum on the bracket edge raises
    ``BracketError`` carrying both boundary log-likelihoods.
    """
    h, low, c = _hlc(bar)
    stat = HighLowCloseStat(high=h, low=low, close=c)
    if bracket is None:
        try:
            seed = sigma_garman_klass(bar).sigma_sq
        except DegenerateBarError:
            seed = _parkinson(h, low)
            if not seed > 0.0:
                raise DegenerateBarError(f"zero-range bar {(h, low, c)}") from None
        bracket = (ML_BRACKET[0] * seed, ML_BRACKET[1] * seed)
    lo, hi = bracket
    if not 0.0 < lo < hi:
        raise DomainError(f"invalid sigma^2 bracket {bracket}")

    def negative_loglik(log_s2):
        try:
            return -log_density_hlc(stat, ModelParams.from_sigma_sq(math.exp(log_s2)))
        except (DensityUnderflowError, TruncationError):
            return 1e300

    log_lo, log_hi = math.log(lo), math.log(hi)
    res = optimize.minimize_scalar(
        negative_loglik,
        bounds=(log_lo, log_hi),
        method="bounded",
        options={"xatol": ML_REL_TOL},
    )
    edge_tol = 1e-4 * (log_hi - log_lo)
    if res.x - log_lo < edge_tol or log_hi - res.x < edge_tol:
        raise BracketError(
            f"likelihood maximum sits on the bracket edge for bar {(h, low, c)}",
            boundary_values=(-negative_loglik(log_lo), -negative_loglik(log_hi)),
        )
    return VolEstimate(
        sigma_sq=math.exp(res.x), method="max_likelihood", iterations=int(res.nfev)
    )


@dataclass(frozen=True)
class VolTimeMap:
    """Monotone clock mapping wall time to cumulative-variance time."""

    times: np.ndarray
    tau: np.ndarray
    slot_var: np.ndarray = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        tau = np.asarray(self.tau, dtype=float)
        if t.shape != tau.shape or t.ndim != 1 or t.size < 2:
            raise DomainError("times and tau must be equal-length 1-D, size >= 2")
        if np.any(np.diff(tau) < 0.0) or tau[0] < 0.0:
            raise DomainError("tau must be nondecreasing and start at >= 0")
        if not math.isclose(tau[-1], 1.0, abs_tol=1e-9):
            raise DomainError(f"tau must end at 1, got {tau[-1]}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "tau", tau)

    def tau_of(self, t):
        """Piecewise-linear interpolation of the clock."""
        return np.interp(t, self.times, self.tau)

    @property
    def total_variance(self):
        if self.slot_var is None:
            raise DomainError("this map was loaded without slot variances")
        return float(np.sum(self.slot_var))


def identity_vol_time(n=2):
    return VolTimeMap(times=np.linspace(0.0, 1.0, n), tau=np.linspace(0.0, 1.0, n))


def estimate_vol_time(days, lag=1):
    """Volatility-time map from a matrix of intraday normalized log-prices.

    ``days`` is (n_days, n_slots) with column 0 the session open (zeros
    after normalization).  Slot variances are day-averaged squared lagged
    differences; for lag > 1 each difference's variance is spread evenly
    over the slots it straddles.  Missing values are an error -- silent
    imputation would bend the clock.
    """
    x = np.asarray(days, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    n_days, n_slots = x.shape
    if n_slots < 2:
        raise DomainError("need at least 2 time slots")
    if n_days < 1:
        raise DomainError("need at least 1 day")
    if not 1 <= lag < n_slots:
        raise DomainError(f"lag must lie in [1, {n_slots - 1}], got {lag}")
    bad = ~np.isfinite(x)
    if np.any(bad):
        day, slot = np.argwhere(bad)[0]
        raise GapError(f"missing value at day {day}, slot {slot}")

    diffs = x[:, lag:] - x[:, :-lag]
    var_by_end = np.mean(diffs * diffs, axis=0)
    slot_var = np.zeros(n_slots - 1)
    for end in range(lag, n_slots):
        slot_var[end - lag : end] += var_by_end[end - lag] / lag

    total = slot_var.sum()
    if not total > 0.0:
        raise DomainError("flat price matrix: zero total variance")
    tau = np.concatenate([[0.0], np.cumsum(slot_var) / total])
    tau[-1] = 1.0
    times = np.linspace(0.0, 1.0, n_slots)
    return VolTimeMap(times=times, tau=tau, slot_var=slot_var)


@dataclass(frozen=True)
class ScoreTriple:
    """Vol-weighted mean squared error and its two relative forms."""

    mse: float
    rmse: float
    mrse: float


def score(x, x_hat, weights=None):
    """Weighted scores of an estimate against the realized series.

    ``x`` and ``x_hat`` are (n_days, n_slots) (a single day may be 1-D);
    ``weights`` are per-slot variances (uniform when omitted).  MSE is the
    weighted average squared error; RMSE normalizes pooled error by pooled
    signal energy; MRSE averages the per-day normalized ratios.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x_hat = np.atleast_2d(np.asarray(x_hat, dtype=float))
    if x.shape != x_hat.shape:
        raise DomainError(f"shape mismatch {x.shape} vs {x_hat.shape}")
    n_days, n_slots = x.shape
    w = np.ones(n_slots) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n_slots,):
        raise DomainError("need one weight per time slot")
    if np.any(w < 0.0):
        raise DomainError("negative weights")

    err = (x - x_hat) ** 2
    energy_by_day = (x * x) @ w
    if not np.all(energy_by_day > 0.0) or not w.sum() > 0.0:
        raise ScoreUndefinedError("zero signal energy in at least one day")
    mse = float(np.sum(err @ w) / (n_days * w.sum()))
    rmse = float(np.sum(err @ w) / np.sum(energy_by_day))
    mrse = float(np.mean((err @ w) / energy_by_day))
    return ScoreTriple(mse=mse, rmse=rmse, mrse=mrse)
