"""Interior-time law of a path conditioned on (close, high) or on the high alone.

The joint law factorizes at an interior time t into a left segment that must
stay below the barrier and a right segment whose own maximum closes the gap;
the product of the two reflection factors expands into four shifted
Gaussians, whose moment integrals collapse to the closed forms implemented
in :func:`moments_ch`.

Conventions: the path starts at 0, ``h`` is the running maximum over [0, 1],
``c`` the terminal value, ``r = 2h - c`` the once-reflected close, and
``sigma_t^2 = sigma^2 t (1 - t)`` the interior variance scale.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .curves import ConditionalCurve, MomentTriple, floor_variance
from .errors import DomainError, NumericError
from .extrema import HighCloseStat, close_given_high_moments, density_high, joint_high_close
from .gaussians import gaussian_pdf
from .params import DEFAULT_QUADRATURE, ModelParams

_SQRT2 = math.sqrt(2.0)

# Inside this distance of an endpoint the formulas are replaced by their
# algebraic limits (the interior scale sigma_t degenerates there).
ENDPOINT_EPS = 1e-9

# Offset used to evaluate conditional curves for degenerate statistics
# (h == c exactly, or h == c == 0) as limits from the interior.
DEGENERATE_EPS = 1e-8


@dataclass(frozen=True)
class FourGaussianTerm:
    """One of the four shifted Gaussians in the factorized (close, high) law."""

    index: int
    a: float
    b: float
    sign: int
    mu: float
    g: float
    psi: float
    tau: float

    def density(self, x, sigma_t_sq):
        return self.psi * gaussian_pdf(x - self.mu, sigma_t_sq)


def four_gaussian_terms(t, h, c, params=ModelParams()):
    """The four (a_i, b_i) endpoint pairs with their derived quantities.

    The left endpoints are {0, 2h} (the start and its reflection), the right
    endpoints {c, 2h - c}; all four products of a left and a right factor
    appear, with signs (+, -, -, +).
    """
    _validate_hc(h, c)
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")
    sigma = params.sigma
    endpoints = ((0.0, c), (0.0, 2.0 * h - c), (2.0 * h, c), (2.0 * h, 2.0 * h - c))
    signs = (1, -1, -1, 1)
    taus = (0.0, 2.0 * t, 2.0 * (1.0 - t), 2.0)
    out = []
    for i, ((a, b), s, tau) in enumerate(zip(endpoints, signs, taus), start=1):
        g = (a - b) ** 2 / (2.0 * params.sigma_sq)
        psi = math.exp(-g) / (math.sqrt(2.0 * math.pi) * sigma)
        mu = a * (1.0 - t) + b * t
        out.append(FourGaussianTerm(index=i, a=a, b=b, sign=s, mu=mu, g=g, psi=psi, tau=tau))
    return out


def _validate_hc(h, c):
    if not (math.isfinite(h) and math.isfinite(c)):
        raise DomainError("h and c must be finite")
    if h < 0 or h < c:
        raise DomainError(f"need h >= max(0, c), got h={h}, c={c}")


def survival_factor(x, t, h, params=ModelParams()):
    """Density factor for reaching ``x`` at time t without touching ``h``."""
    if x > h:
        raise DomainError(f"x={x} above the barrier h={h}")
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")
    v = t * params.sigma_sq
    return gaussian_pdf(x, v) - gaussian_pdf(2.0 * h - x, v)


def _hitting_factor(x, t, h, params):
    # density (in h) of the maximum over a segment of duration t ending at x
    v = t * params.sigma_sq
    return (2.0 * (2.0 * h - x) / v) * gaussian_pdf(2.0 * h - x, v)


def joint_density_cht(x, t, h, c, params=ModelParams()):
    """Joint density of (position at t, close, high).

    Splits the conditioning at t: either the left segment stays strictly
    below h and the right segment attains it, or the other way around.
    """
    _validate_hc(h, c)
    if x > h or c > h:
        raise DomainError("x and c must not exceed h")
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")
    left_survives = survival_factor(x, t, h, params) * _hitting_factor(c - x, 1.0 - t, h - x, params)
    right_survives = _hitting_factor(x, t, h, params) * (
        gaussian_pdf(c - x, (1.0 - t) * params.sigma_sq)
        - gaussian_pdf(2.0 * (h - x) - (c - x), (1.0 - t) * params.sigma_sq)
    )
    return left_survives + right_survives


def _moments_ch_arrays(ts, h, c, params):
    """Closed-form (M0, M1, M2) vectorized over an array of interior times."""
    t = np.asarray(ts, dtype=float)
    sq = params.sigma_sq
    r = 2.0 * h - c
    m0 = joint_high_close(HighCloseStat(high=h, close=c), params)

    st_sq = sq * t * (1.0 - t)
    st = np.sqrt(st_sq)
    phi_c = gaussian_pdf(c, sq)
    phi_r = gaussian_pdf(r, sq)
    phi_bridge = np.exp(-((h - r * t) ** 2) / (2.0 * st_sq)) / np.sqrt(2.0 * np.pi * st_sq)
    erf_low = special.erf((c * t - h) / (_SQRT2 * st))
    erf_high = special.erf((h - r * t) / (_SQRT2 * st))

    p_hrt = (1.0 - 2.0 * t) + 2.0 * r * (r * t - h) / sq
    m1 = (
        phi_c * (1.0 + erf_low)
        + phi_r * (2.0 * h * r / sq - 1.0 + p_hrt * erf_high)
        - 4.0 * r * t * (1.0 - t) * phi_r * phi_bridge
    )

    q1 = -(r * t * t + (1.0 - t) * (2.0 * h - r * t)) + r * (h * h + (h - r * t) ** 2) / sq
    q2 = (2.0 * h * (1.0 - t) - r * t) + 2.0 * h * r * (r * t - h) / sq
    m2 = 2.0 * (2.0 * h - c * t) * phi_c * (1.0 + erf_low) + 2.0 * phi_r * (
        r * t * (1.0 - t) + q1 + q2 * erf_high - 4.0 * r * h * t * (1.0 - t) * phi_bridge
    )
    return np.broadcast_to(m0, t.shape).copy(), m1, m2


def moments_ch(t, h, c, params=ModelParams()):
    """Unnormalized moments M0, M1, M2 of the position at t given (close, high).

    M0 equals the terminal (high, close) density for every t.  Within
    ``ENDPOINT_EPS`` of t = 0 or t = 1 the algebraic limits are returned:
    the formulas contain erf terms in (h - rt)/sigma_t that degenerate
    there, even though their limits are perfectly regular.
    """
    _validate_hc(h, c)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    m0 = joint_high_close(HighCloseStat(high=h, close=c), params)
    if t < ENDPOINT_EPS:
        return MomentTriple(m0=m0, m1=0.0, m2=0.0)
    if 1.0 - t < ENDPOINT_EPS:
        return MomentTriple(m0=m0, m1=c * m0, m2=c * c * m0)
    m0a, m1a, m2a = _moments_ch_arrays(np.array([t]), h, c, params)
    return MomentTriple(m0=float(m0a[0]), m1=float(m1a[0]), m2=float(m2a[0]))


def conditional_curve_close(c, params=ModelParams(), grid=None):
    """Classical bridge curve: mean c*t and variance sigma^2 t (1 - t).

    The baseline every richer conditioning is scored against.
    """
    if grid is None:
        grid = np.linspace(0.0, 1.0, 101)
    t = np.asarray(grid, dtype=float)
    if np.any((t < 0.0) | (t > 1.0)):
        raise DomainError("grid times must lie in [0, 1]")
    return ConditionalCurve(
        times=t,
        mean=c * t,
        variance=params.sigma_sq * t * (1.0 - t),
        label="close",
    )


def _regularize_hc(h, c):
    if h == c == 0.0:
        return DEGENERATE_EPS, 0.0
    if h == c:
        return h + DEGENERATE_EPS, c
    if h == 0.0:
        # c <= h = 0; nudge the barrier off the start point
        return DEGENERATE_EPS, c
    return h, c


def conditional_curve_ch(h, c, params=ModelParams(), grid=None):
    """Mean/variance curve of the path given (close, high) on a time grid.

    Degenerate statistics (h == c, or a zero-range bar) are evaluated a
    hair inside their domain; endpoint times get their pinned limits.
    """
    _validate_hc(h, c)
    if grid is None:
        grid = np.linspace(0.0, 1.0, 101)
    t = np.asarray(grid, dtype=float)
    if np.any((t < 0.0) | (t > 1.0)):
        raise DomainError("grid times must lie in [0, 1]")
    hr, cr = _regularize_hc(h, c)

    mean = np.empty_like(t)
    var = np.empty_like(t)
    left = t < ENDPOINT_EPS
    right = 1.0 - t < ENDPOINT_EPS
    interior = ~(left | right)
    mean[left] = 0.0
    var[left] = 0.0
    mean[right] = c
    var[right] = 0.0
    if np.any(interior):
        m0, m1, m2 = _moments_ch_arrays(t[interior], hr, cr, params)
        mu = m1 / m0
        mean[interior] = mu
        var[interior] = floor_variance(m2 / m0 - mu * mu, scale=float(np.max(np.abs(m2 / m0))))
    return ConditionalCurve(times=t, mean=mean, variance=var, label="close+high")


def density_given_high(x, t, h, params=ModelParams()):
    """Density of the position at t jointly with the maximum, close summed out.

    Two routes to the barrier remain after integrating the close away: the
    left segment survives below h and the right segment's own maximum makes
    up the difference (the half-normal factor), or the left segment already
    touched h and the right segment merely stays below it (the erf factor).
    """
    if x > h:
        raise DomainError(f"x={x} above the barrier h={h}")
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")
    sq = params.sigma_sq
    tv = t * sq
    surv = gaussian_pdf(x, tv) - gaussian_pdf(2.0 * h - x, tv)
    term1 = 2.0 * surv * gaussian_pdf(h - x, (1.0 - t) * sq)
    term2 = (
        (2.0 * (2.0 * h - x) / tv)
        * gaussian_pdf(2.0 * h - x, tv)
        * special.erf((h - x) / (params.sigma * math.sqrt(2.0 * (1.0 - t))))
    )
    return term1 + term2


def moments_given_high(t, h, params=ModelParams(), quad=DEFAULT_QUADRATURE):
    """Quadrature moments M0, M1, M2 of the position at t given the high alone.

    No closed form is available for the first two; they are integrated
    adaptively over (-inf, h].  At the endpoints the law is known: nothing
    has moved at t = 0, and at t = 1 the close-given-high moments apply.
    """
    if h < 0:
        raise DomainError(f"h must be >= 0, got {h}")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    m0 = density_high(h, params)
    if t < ENDPOINT_EPS:
        return MomentTriple(m0=m0, m1=0.0, m2=0.0)
    if 1.0 - t < ENDPOINT_EPS:
        mean, variance = close_given_high_moments(h, params)
        return MomentTriple(m0=m0, m1=mean * m0, m2=(variance + mean * mean) * m0)

    lower = min(0.0, h) - 10.0 * params.sigma
    results = []
    for m in range(3):
        value, err = integrate.quad(
            lambda x: x**m * density_given_high(x, t, h, params),
            lower,
            h,
            epsabs=quad.abs_tolerance,
            epsrel=quad.rel_tolerance,
            limit=200,
        )
        if not math.isfinite(value):
            raise NumericError(f"moment {m} quadrature diverged at (t={t}, h={h})")
        if err > max(quad.abs_tolerance * 10.0, abs(value) * quad.rel_tolerance * 100.0):
            raise NumericError(
                f"moment {m} quadrature reached only {err} at (t={t}, h={h})", achieved=err
            )
        results.append(value)
    return MomentTriple(m0=results[0], m1=results[1], m2=results[2])


def conditional_curve_given_high(h, params=ModelParams(), grid=None, quad=DEFAULT_QUADRATURE):
    """Mean/variance curve given the high alone (numeric route)."""
    if grid is None:
        grid = np.linspace(0.0, 1.0, 51)
    t = np.asarray(grid, dtype=float)
    mean = np.empty_like(t)
    var = np.empty_like(t)
    for i, ti in enumerate(t):
        triple = moments_given_high(float(ti), h, params, quad)
        mean[i] = triple.mean
        var[i] = triple.variance
    return ConditionalCurve(times=t, mean=mean, variance=var, label="high")
