"""Terminal-time laws of the path extremes.

Covers the half-normal law of the high, the joint (high, close) law, the
conditional close-given-high moments, the double-barrier reflection series
for (high, low, close), the (high, low) marginal, and the alternating
series for the law of the range.

Series share one truncation contract (see
:class:`~ohlcbridge.params.SeriesControl`): terms are grouped by reflection
order, and summation stops once two consecutive groups fall below
``tail_tolerance * (1 + |partial|)``.  Ranges smaller than a tenth of the
scale are rejected outright -- the reflection series converge too slowly
there to be worth a silent low-accuracy answer, and such paths are rare
anyway under the range law.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DensityUnderflowError, DomainError, NumericError, TruncationError
from .gaussians import erfcx_product, gaussian_pdf
from .params import DEFAULT_SERIES, ModelParams

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_HALF_PI = math.pi / 2.0

# Below this range-to-scale ratio the series are refused (slow convergence).
MIN_RANGE_RATIO = 0.1


@dataclass(frozen=True)
class HighCloseStat:
    """A (high, close) pair of a path started at zero."""

    high: float
    close: float

    def __post_init__(self):
        if not (math.isfinite(self.high) and math.isfinite(self.close)):
            raise DomainError("high and close must be finite")
        if self.high < 0:
            raise DomainError(f"high must be >= 0, got {self.high}")
        if self.high < self.close:
            raise DomainError(f"high {self.high} below close {self.close}")


@dataclass(frozen=True)
class HighLowCloseStat:
    """A (high, low, close) triple of a path started at zero."""

    high: float
    low: float
    close: float

    def __post_init__(self):
        vals = (self.high, self.low, self.close)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("high, low and close must be finite")
        if not (self.low <= 0.0 <= self.high):
            raise DomainError(f"need low <= 0 <= high, got ({self.low}, {self.high})")
        if not (self.low <= self.close <= self.high):
            raise DomainError(f"close {self.close} outside [{self.low}, {self.high}]")
        if self.range <= 0:
            raise DomainError("range must be positive")

    @property
    def range(self):
        return self.high - self.low


class HighConditionalMoments(NamedTuple):
    mean: float
    variance: float


class FellerEval(NamedTuple):
    value: float
    terms_used: int


def density_high(h, params=ModelParams()):
    """Density of the running maximum: twice the Gaussian, zero below 0."""
    if not math.isfinite(h):
        raise DomainError(f"h must be finite, got {h!r}")
    if h < 0:
        return 0.0
    return 2.0 * gaussian_pdf(h, params.sigma_sq)


def joint_high_close(stat, params=ModelParams()):
    """Joint density of (high, close) at terminal time."""
    r = 2.0 * stat.high - stat.close
    return (2.0 * r / params.sigma_sq) * gaussian_pdf(r, params.sigma_sq)


def log_joint_high_close(stat, params=ModelParams()):
    value = joint_high_close(stat, params)
    if value <= 0.0:
        raise DensityUnderflowError(f"joint (high, close) density vanished at {stat}")
    return math.log(value)


def close_given_high_moments(h, params=ModelParams()):
    """Mean and variance of the close conditional on the high.

    Both run through the scaled complementary error function, so they stay
    finite for arbitrarily large ``h``.  The variance is the compact form
    obtained by working with the reflected variable 2h - c, whose law given
    the high is an explicit tail distribution; it decays to zero as the
    conditioning high grows.
    """
    if h < 0:
        raise DomainError(f"h must be >= 0, got {h}")
    sigma = params.sigma
    w = erfcx_product(h, sigma)
    halfpi_s = sigma * math.sqrt(_HALF_PI)
    mean = h - halfpi_s * w
    variance = 2.0 * params.sigma_sq - 2.0 * h * halfpi_s * w - _HALF_PI * params.sigma_sq * w * w
    return HighConditionalMoments(mean=mean, variance=variance)


def _check_range(delta, scale_sq):
    if delta / math.sqrt(scale_sq) < MIN_RANGE_RATIO:
        raise TruncationError(
            f"range {delta} below {MIN_RANGE_RATIO} of the scale "
            f"{math.sqrt(scale_sq)}; reflection series converges too slowly"
        )


def _reflection_rings(x, variance, high, low):
    """Yield (negative-group, positive-group) magnitudes ring by ring.

    Ring m removes the images reflected once more across each barrier and
    restores the twice-reflected ones at +-2m(high-low).
    """
    delta = high - low
    m = 1
    while True:
        shift = 2.0 * (m - 1) * delta
        neg = gaussian_pdf(x - 2.0 * high - shift, variance) + gaussian_pdf(
            x - 2.0 * low + shift, variance
        )
        pos = gaussian_pdf(x - 2.0 * m * delta, variance) + gaussian_pdf(
            x + 2.0 * m * delta, variance
        )
        yield neg, pos
        m += 1


def reflection_series(x, variance, high, low, ctrl=DEFAULT_SERIES):
    """Two-sided reflection series: density at ``x`` of a Brownian value with
    the given variance that has stayed inside (low, high).

    Terms are added in rings of increasing image distance; because the image
    positions interlace, the partial ring sums bracket the limit, which the
    truncation rule exploits.
    """
    if not (low < 0.0 < high):
        raise DomainError(f"need low < 0 < high, got ({low}, {high})")
    _check_range(high - low, variance)
    if not (low <= x <= high):
        return 0.0

    s = gaussian_pdf(x, variance)
    below = 0
    last = math.inf
    rings = _reflection_rings(x, variance, high, low)
    for _ in range(ctrl.max_terms):
        neg, pos = next(rings)
        s -= neg
        s += pos
        below = below + 1 if neg < ctrl.tail_tolerance * (1.0 + abs(s)) else 0
        below = below + 1 if pos < ctrl.tail_tolerance * (1.0 + abs(s)) else 0
        last = max(neg, pos)
        if below >= 2:
            return max(s, 0.0)
    raise TruncationError(
        f"reflection series did not converge in {ctrl.max_terms} rings",
        last_term=last,
        terms_used=ctrl.max_terms,
    )


def reflection_series_partials(x, variance, high, low, n_rings):
    """Partial sums after each half-ring, for bracket-property diagnostics.

    Returns the sequence [S_0, S_0 - neg_1, S_0 - neg_1 + pos_1, ...]; when
    low < x < high the entries alternate around the limit.
    """
    if not (low < 0.0 < high):
        raise DomainError(f"need low < 0 < high, got ({low}, {high})")
    s = gaussian_pdf(x, variance)
    out = [s]
    rings = _reflection_rings(x, variance, high, low)
    for _ in range(n_rings):
        neg, pos = next(rings)
        s -= neg
        out.append(s)
        s += pos
        out.append(s)
    return np.array(out)


def choi_roh_distribution(x_close, high, low, params=ModelParams(), ctrl=DEFAULT_SERIES):
    """Terminal density of the close jointly with staying inside (low, high)."""
    return reflection_series(x_close, params.sigma_sq, high, low, ctrl)


def _gauss_d1(u, variance):
    # first derivative of the Gaussian density
    return -u / variance * gaussian_pdf(u, variance)


def _gauss_d2(u, variance):
    # second derivative of the Gaussian density
    return (u * u / (variance * variance) - 1.0 / variance) * gaussian_pdf(u, variance)


def density_hlc(stat, params=ModelParams(), ctrl=DEFAULT_SERIES):
    """Joint density of (high, low, close), from the doubly-reflected series.

    This is the mixed derivative -d_low d_high of the barrier-constrained
    close density; each ring below combines the +-k images of both
    derivative families.
    """
    sq = params.sigma_sq
    h, low, c = stat.high, stat.low, stat.close
    delta = stat.range
    _check_range(delta, sq)

    s = 0.0
    below = 0
    last = math.inf
    for m in range(1, ctrl.max_terms + 1):
        two_m_d = 2.0 * m * delta
        ring = m * m * (_gauss_d2(c - two_m_d, sq) + _gauss_d2(c + two_m_d, sq))
        ring -= m * (m + 1) * _gauss_d2(c - 2.0 * h - two_m_d, sq)
        ring -= m * (m - 1) * _gauss_d2(c - 2.0 * h + two_m_d, sq)
        s += ring
        mag = abs(ring)
        below = below + 1 if mag < ctrl.tail_tolerance * (1.0 + abs(s)) else 0
        last = mag
        if below >= 2:
            value = 4.0 * s
            if value < 0.0:
                if value > -1e3 * ctrl.tail_tolerance * (1.0 + abs(4.0 * s)):
                    return 0.0
                raise NumericError(f"(high, low, close) density came out negative: {value}")
            return value
    raise TruncationError(
        f"(high, low, close) series did not converge in {ctrl.max_terms} rings",
        last_term=last,
        terms_used=ctrl.max_terms,
    )


def log_density_hlc(stat, params=ModelParams(), ctrl=DEFAULT_SERIES):
    value = density_hlc(stat, params, ctrl)
    if value <= 0.0:
        raise DensityUnderflowError(f"(high, low, close) density vanished at {stat}")
    return math.log(value)


def density_hl(high, low, params=ModelParams(), ctrl=DEFAULT_SERIES):
    """Marginal density of (high, low): the close integrated out analytically.

    Integrating each second-derivative term of the (high, low, close) series
    over close in [low, high] leaves first-derivative differences, so the
    same ring structure applies.
    """
    if not (low < 0.0 < high):
        raise DomainError(f"need low < 0 < high, got ({low}, {high})")
    sq = params.sigma_sq
    delta = high - low
    _check_range(delta, sq)

    def d1_pair(shift):
        return _gauss_d1(high + shift, sq) - _gauss_d1(low + shift, sq)

    s = 0.0
    below = 0
    last = math.inf
    for m in range(1, ctrl.max_terms + 1):
        two_m_d = 2.0 * m * delta
        ring = m * m * (d1_pair(-two_m_d) + d1_pair(two_m_d))
        ring -= m * (m + 1) * d1_pair(-2.0 * high - two_m_d)
        ring -= m * (m - 1) * d1_pair(-2.0 * high + two_m_d)
        s += ring
        mag = abs(ring)
        below = below + 1 if mag < ctrl.tail_tolerance * (1.0 + abs(s)) else 0
        last = mag
        if below >= 2:
            value = 4.0 * s
            if value < 0.0:
                if value > -1e3 * ctrl.tail_tolerance * (1.0 + abs(4.0 * s)):
                    return 0.0
                raise NumericError(f"(high, low) density came out negative: {value}")
            return value
    raise TruncationError(
        f"(high, low) series did not converge in {ctrl.max_terms} rings",
        last_term=last,
        terms_used=ctrl.max_terms,
    )


def log_density_hl(high, low, params=ModelParams(), ctrl=DEFAULT_SERIES):
    value = density_hl(high, low, params, ctrl)
    if value <= 0.0:
        raise DensityUnderflowError(f"(high, low) density vanished at ({high}, {low})")
    return math.log(value)


# ---------------------------------------------------------------------------
# Range law


def feller_range_evaluation(x, ctrl=DEFAULT_SERIES, _levels=14):
    """Alternating-series density of the range of a standard Brownian path,
    with the number of terms consumed.

    The raw series needs thousands of float64 terms for small ranges because
    the term modulus peaks near sqrt(2)/x before decaying.  Iterated pairwise
    averaging of the partial sums -- applied only once the averaging window
    sits entirely past that peak -- collapses the oscillation and converges
    two to five times sooner, which is what makes small ranges affordable.
    """
    if not (math.isfinite(x) and x > 0):
        raise DomainError(f"range must be positive and finite, got {x!r}")
    tol = ctrl.tail_tolerance
    coeff = 8.0 / _SQRT_2PI

    partials = []
    s = 0.0
    prev_abs = -1.0
    peak_k = None
    prev_est = None
    stable = 0
    for k in range(1, ctrl.max_terms + 1):
        term = coeff * (-1.0) ** (k + 1) * k * k * math.exp(-((k * x) ** 2) / 2.0)
        s += term
        partials.append(s)
        mag = abs(term)
        if peak_k is None and prev_abs >= 0.0 and mag < prev_abs:
            peak_k = k - 1
        prev_abs = mag
        if peak_k is None or k - _levels <= peak_k or len(partials) <= _levels:
            continue
        window = np.array(partials[-(_levels + 1):])
        for _ in range(_levels):
            window = 0.5 * (window[:-1] + window[1:])
        est = float(window[0])
        if prev_est is not None and abs(est - prev_est) <= tol * (1.0 + abs(est)):
            stable += 1
            if stable >= 3:
                if est < 0.0:
                    if est < -1e-8:
                        raise NumericError(f"range density came out negative: {est}")
                    est = 0.0
                return FellerEval(value=est, terms_used=k)
        else:
            stable = 0
        prev_est = est
    raise TruncationError(
        f"range series did not converge in {ctrl.max_terms} terms at x={x}",
        last_term=prev_abs,
        terms_used=ctrl.max_terms,
    )


def feller_range_density(x, ctrl=DEFAULT_SERIES):
    """Density of the range of a standard Brownian path on [0, 1]."""
    return feller_range_evaluation(x, ctrl).value
