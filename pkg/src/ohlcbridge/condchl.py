"""Interior-time law of a path conditioned on (close, high, low).

The joint law factorizes at time t into two double-barrier survival factors
(Chapman-Kolmogorov at the conditioning time).  Expanding both reflection
series turns the product into a lattice of shifted Gaussians indexed by
(i, j, k): i in {1..4} picks one of the four left/right image families, j
and k count reflections of each factor.  Moments in closed form come from
integrating termwise; a second, independent route integrates the product
form numerically using only single-index series.  Both are exposed, and the
test-suite holds them against each other.

Index conventions, with Delta = high - low:
  left endpoints  a: 2j*Delta (families 1, 2) and 2*high - 2j*Delta (3, 4)
  right endpoints b: close - 2k*Delta (1, 3) and 2*high - close + 2k*Delta (2, 4)
  signs (+, -, -, +)
A family table "centered at the low" re-groups the same lattice around
images of the lower barrier; it exists for the boundary-cancellation
diagnostics, where the regrouping is what makes the term-by-term identities
hold at the lower limit.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .curves import ConditionalCurve, MomentTriple, floor_variance
from .errors import DensityUnderflowError, DomainError, TruncationError
from .extrema import HighLowCloseStat, density_hl, density_hlc, reflection_series
from .gaussians import gaussian_pdf
from .params import DEFAULT_QUADRATURE, DEFAULT_SERIES, ModelParams

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])

# Beyond this window half-width the closed moment route defers to the
# quadrature route, whose series are single-index and stay cheap.
MAX_WINDOW = 200

# Lattice terms with Gaussian exponent above this never matter at the
# supported tolerances.
_PRUNE_G = 60.0

ENDPOINT_EPS = 1e-9
DEGENERATE_EPS = 1e-8


def window_half_width(delta, sigma, tail_tolerance):
    """Smallest J with exp(-2 (J Delta)^2 / sigma^2) below the tolerance."""
    return max(1, math.ceil(sigma / delta * math.sqrt(-math.log(tail_tolerance) / 2.0)))


# ---------------------------------------------------------------------------
# family tables


def _family_coefficients(j, k, center):
    """Linear coefficients of the image endpoints in (high, low, close).

    Returns (a_h, a_l, b_h, b_l, b_c), each an array of shape (4,) + j.shape:
    left endpoint a = a_h*high + a_l*low, right endpoint
    b = b_h*high + b_l*low + b_c*close.  Everything downstream (means,
    exponents, slopes, derivatives of the exponents) is derived from these
    five arrays, so the index bookkeeping lives in exactly one place.
    """
    two_j = 2.0 * j
    two_k = 2.0 * k
    zero = np.zeros_like(two_j)
    if center == "high":
        a_h = np.stack([two_j, two_j, 2.0 - two_j, 2.0 - two_j])
        a_l = np.stack([-two_j, -two_j, two_j, two_j])
        b_h = np.stack([-two_k, 2.0 + two_k, -two_k, 2.0 + two_k])
        b_l = np.stack([two_k, -two_k, two_k, -two_k])
    elif center == "low":
        a_h = np.stack([two_j, two_j, -two_j, -two_j])
        a_l = np.stack([-two_j, -two_j, 2.0 + two_j, 2.0 + two_j])
        b_h = np.stack([-two_k, two_k, -two_k, two_k])
        b_l = np.stack([two_k, 2.0 - two_k, two_k, 2.0 - two_k])
    else:
        raise ValueError(f"unknown centering {center!r}")
    b_c = np.stack([zero + 1.0, zero - 1.0, zero + 1.0, zero - 1.0])
    return a_h, a_l, b_h, b_l, b_c


class _TermSet:
    """Flattened, pruned lattice terms with their t-independent pieces."""

    __slots__ = (
        "sign", "a", "b", "g", "psi", "a_h", "a_l", "b_h", "b_l",
        "dh_g", "dl_g", "dhl_g", "j", "k",
    )

    def __init__(self, stat, params, half_width, center="high"):
        rng = np.arange(-half_width, half_width + 1, dtype=float)
        jj, kk = np.meshgrid(rng, rng, indexing="ij")
        jj = jj.ravel()
        kk = kk.ravel()
        a_h, a_l, b_h, b_l, b_c = _family_coefficients(jj, kk, center)
        h, low, c = stat.high, stat.low, stat.close
        a = a_h * h + a_l * low
        b = b_h * h + b_l * low + b_c * c
        d = a - b
        sq = params.sigma_sq
        g = d * d / (2.0 * sq)
        sign = np.broadcast_to(_SIGNS[:, None], g.shape)

        keep = g <= _PRUNE_G
        dh_d = a_h - b_h
        dl_d = a_l - b_l
        self.sign = sign[keep]
        self.a = a[keep]
        self.b = b[keep]
        self.g = g[keep]
        self.psi = np.exp(-self.g) / (_SQRT_2PI * params.sigma)
        self.a_h = a_h[keep]
        self.a_l = a_l[keep]
        self.b_h = b_h[keep]
        self.b_l = b_l[keep]
        self.dh_g = (d * dh_d / sq)[keep]
        self.dl_g = (d * dl_d / sq)[keep]
        self.dhl_g = (dh_d * dl_d / sq)[keep]
        self.j = np.broadcast_to(jj, g.shape)[keep]
        self.k = np.broadcast_to(kk, g.shape)[keep]

    def __len__(self):
        return self.a.shape[0]

    def gamma(self):
        return -self.dh_g * self.dl_g + self.dhl_g

    def slopes(self, t):
        """tau = d(mu)/d(high), tau_hat = d(mu)/d(low) at time(s) t."""
        tau = self.a_h * (1.0 - t) + self.b_h * t
        tau_hat = self.a_l * (1.0 - t) + self.b_l * t
        return tau, tau_hat

    def means(self, t):
        return self.a * (1.0 - t) + self.b * t


# ---------------------------------------------------------------------------
# diagnostics containers (used by the identity test-suites)


@dataclass(frozen=True)
class MomentCoefficients:
    """Per-term slope/exponent combinations entering the moment formulas."""

    A: float
    B: float
    gamma: float
    C: float


@dataclass(frozen=True)
class SeriesTermIJK:
    """One lattice term with everything the identities talk about."""

    i: int
    j: int
    k: int
    sign: float
    a: float
    b: float
    mu: float
    g: float
    psi: float
    tau: float
    tau_hat: float
    v: float
    v_tilde: float
    w: float
    w_tilde: float
    coefficients: MomentCoefficients


def term_table(t, stat, params=ModelParams(), j=0, k=0, center="high"):
    """The four family terms at one (j, k), fully expanded.

    Intended for the coefficient-identity and boundary-cancellation checks;
    the production moment evaluator uses the vectorized path instead.
    """
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")
    ts = _TermSet.__new__(_TermSet)
    jj = np.full(1, float(j))
    kk = np.full(1, float(k))
    a_h, a_l, b_h, b_l, b_c = _family_coefficients(jj, kk, center)
    h, low, c = stat.high, stat.low, stat.close
    a = a_h * h + a_l * low
    b = b_h * h + b_l * low + b_c * c
    d = a - b
    sq = params.sigma_sq
    st_sq = params.sigma_t_sq(t)
    out = []
    for i in range(4):
        tau = float(a_h[i, 0] * (1.0 - t) + b_h[i, 0] * t)
        tau_hat = float(a_l[i, 0] * (1.0 - t) + b_l[i, 0] * t)
        g = float(d[i, 0] ** 2 / (2.0 * sq))
        dh_g = float(d[i, 0] * (a_h[i, 0] - b_h[i, 0]) / sq)
        dl_g = float(d[i, 0] * (a_l[i, 0] - b_l[i, 0]) / sq)
        dhl_g = float((a_h[i, 0] - b_h[i, 0]) * (a_l[i, 0] - b_l[i, 0]) / sq)
        gamma = -dh_g * dl_g + dhl_g
        big_a = tau * tau_hat
        big_b = tau * dl_g + tau_hat * dh_g
        coeffs = MomentCoefficients(A=big_a, B=big_b, gamma=gamma, C=gamma + big_a / st_sq)
        out.append(
            SeriesTermIJK(
                i=i + 1,
                j=int(j),
                k=int(k),
                sign=float(_SIGNS[i]),
                a=float(a[i, 0]),
                b=float(b[i, 0]),
                mu=float(a[i, 0] * (1.0 - t) + b[i, 0] * t),
                g=g,
                psi=math.exp(-g) / (_SQRT_2PI * params.sigma),
                tau=tau,
                tau_hat=tau_hat,
                v=2.0 * (j * (1.0 - t) + k * t),
                v_tilde=2.0 * (j * (1.0 - t) - k * t),
                w=2.0 * (j + k),
                w_tilde=2.0 * (j - k),
                coefficients=coeffs,
            )
        )
    return out


def boundary_cancellation_check(t, stat, params=ModelParams(), j=0, k=0):
    """Relative residual of the boundary-term cancellation at one (j, k).

    At the upper limit the four family terms share one Gaussian factor and
    their slope brackets sum to zero; at the lower limit the same happens
    in the low-centered regrouping.  Returns the combined residual divided
    by the largest participating term, so it is invariant under rescaling
    all inputs by a common factor.
    """
    st_sq = params.sigma_t_sq(t)
    residual = 0.0
    scale = 0.0
    for center, edge in (("high", stat.high), ("low", stat.low)):
        for term in term_table(t, stat, params, j=j, k=k, center=center):
            cf = term.coefficients
            bracket = cf.A * (term.mu - edge) / st_sq + cf.B
            piece = term.sign * bracket * term.psi * gaussian_pdf(edge - term.mu, st_sq)
            residual += piece
            scale = max(scale, abs(piece))
    if scale == 0.0:
        return 0.0
    return residual / scale


# ---------------------------------------------------------------------------
# closed-form moments


def _moment_arrays(ts, stat, params, ctrl):
    """(M0, M1, M2) over an array of interior times, via the lattice series."""
    delta = stat.range
    half = window_half_width(delta, params.sigma, ctrl.tail_tolerance)
    if half > MAX_WINDOW:
        out = np.array(
            [
                _quadrature_moments_scalar(float(t), stat, params, ctrl, DEFAULT_QUADRATURE)
                for t in ts
            ]
        )
        return out[:, 0], out[:, 1], out[:, 2]

    terms = _TermSet(stat, params, half)
    h, low = stat.high, stat.low
    sq = params.sigma_sq
    gamma = terms.gamma()
    s_psi = terms.sign * terms.psi

    m0 = np.empty_like(ts)
    m1 = np.empty_like(ts)
    m2 = np.empty_like(ts)
    # chunk over times so the (terms x times) intermediates stay small
    chunk = max(1, int(2_000_000 // max(1, len(terms))))
    for lo in range(0, len(ts), chunk):
        t = ts[lo : lo + chunk][None, :]
        st_sq = sq * t * (1.0 - t)
        st = np.sqrt(st_sq)
        mu = terms.a[:, None] * (1.0 - t) + terms.b[:, None] * t
        tau = terms.a_h[:, None] * (1.0 - t) + terms.b_h[:, None] * t
        tau_hat = terms.a_l[:, None] * (1.0 - t) + terms.b_l[:, None] * t
        big_a = tau * tau_hat
        big_b = tau * terms.dl_g[:, None] + tau_hat * terms.dh_g[:, None]
        gam = gamma[:, None]
        sp = s_psi[:, None]

        uh = h - mu
        ul = low - mu
        phi_h = np.exp(-(uh * uh) / (2.0 * st_sq)) / (_SQRT_2PI * st)
        phi_l = np.exp(-(ul * ul) / (2.0 * st_sq)) / (_SQRT_2PI * st)
        big_r = 0.5 * (special.erf(uh / (_SQRT2 * st)) - special.erf(ul / (_SQRT2 * st)))

        sl = slice(lo, lo + t.shape[1])
        m0[sl] = np.sum(sp * gam * big_r, axis=0)
        m1[sl] = np.sum(
            sp * ((big_a - gam * st_sq) * (phi_h - phi_l) + (big_b + gam * mu) * big_r),
            axis=0,
        )
        coeff_h = 2.0 * h * big_a - 2.0 * big_b * st_sq - gam * st_sq * (mu + h)
        coeff_l = 2.0 * low * big_a - 2.0 * big_b * st_sq - gam * st_sq * (mu + low)
        coeff_r = 2.0 * big_b * mu - 2.0 * big_a + gam * (mu * mu + st_sq)
        m2[sl] = np.sum(sp * (coeff_h * phi_h - coeff_l * phi_l + coeff_r * big_r), axis=0)
    return m0, m1, m2


def moments_chl(t, stat, params=ModelParams(), ctrl=DEFAULT_SERIES):
    """Closed-form unnormalized moments of the position given (close, high, low).

    M0 reproduces the terminal (high, low, close) density at every t; the
    endpoints return the pinned limits.  When the range is so small that
    the lattice window would exceed ``MAX_WINDOW``, the quadrature route is
    used instead (single-index series stay affordable there).
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    if t < ENDPOINT_EPS or 1.0 - t < ENDPOINT_EPS:
        m0 = density_hlc(stat, params, ctrl)
        c = stat.close if 1.0 - t < ENDPOINT_EPS else 0.0
        return MomentTriple(m0=m0, m1=c * m0, m2=c * c * m0)
    m0, m1, m2 = _moment_arrays(np.array([t]), stat, params, ctrl)
    return MomentTriple(m0=float(m0[0]), m1=float(m1[0]), m2=float(m2[0]))


# ---------------------------------------------------------------------------
# generator and conditional density


def barrier_series_Q(x, t, high, low, params=ModelParams(), ctrl=DEFAULT_SERIES):
    """Survival density: value ``x`` at time t with the path so far inside
    (low, high).  Vanishes at both barriers."""
    if not (low <= x <= high):
        raise DomainError(f"x={x} outside [{low}, {high}]")
    if not 0.0 < t <= 1.0:
        raise DomainError(f"t must lie in (0, 1], got {t}")
    return reflection_series(x, t * params.sigma_sq, high, low, ctrl)


def generator_G(x, t, high, low, close, params=ModelParams(), ctrl=DEFAULT_SERIES, form="checked"):
    """Joint survival generator: both segments stay inside the envelope.

    ``form`` selects the factored product of two barrier series
    ("product"), the flattened Gaussian-lattice sum ("series"), or both
    with a consistency assertion ("checked", the default).
    """
    if not (low <= x <= high and low <= close <= high):
        raise DomainError("x and close must lie inside [low, high]")
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")

    def product():
        if x == high or x == low:
            return 0.0
        left = barrier_series_Q(x, t, high, low, params, ctrl)
        right = reflection_series(
            close - x, (1.0 - t) * params.sigma_sq, high - x, low - x, ctrl
        )
        return left * right

    def series():
        stat = HighLowCloseStat(high=high, low=low, close=close)
        half = window_half_width(stat.range, params.sigma, ctrl.tail_tolerance)
        if half > MAX_WINDOW:
            raise TruncationError(
                f"lattice window {half} exceeds {MAX_WINDOW}; use the product form"
            )
        terms = _TermSet(stat, params, half)
        st_sq = params.sigma_t_sq(t)
        mu = terms.means(t)
        values = terms.sign * terms.psi * np.exp(-((x - mu) ** 2) / (2.0 * st_sq))
        return float(np.sum(values)) / (_SQRT_2PI * math.sqrt(st_sq))

    if form == "product":
        return product()
    if form == "series":
        return series()
    if form == "checked":
        p = product()
        s = series()
        if abs(p - s) > 1e-10 * max(abs(p), abs(s)) + 1e-13:
            raise AssertionError(f"generator forms disagree: product={p}, series={s}")
        return p
    raise ValueError(f"unknown form {form!r}")


def conditional_density_chl(x, t, stat, params=ModelParams(), ctrl=DEFAULT_SERIES):
    """Density of the position at t given (close, high, low).

    Termwise mixed boundary derivative of the generator divided by the
    terminal statistic density.
    """
    if not (stat.low <= x <= stat.high):
        raise DomainError(f"x={x} outside [{stat.low}, {stat.high}]")
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")
    norm = density_hlc(stat, params, ctrl)
    if norm < 1e-300:
        raise DensityUnderflowError(f"(high, low, close) density underflowed at {stat}")
    half = window_half_width(stat.range, params.sigma, ctrl.tail_tolerance)
    if half > MAX_WINDOW:
        raise TruncationError(f"lattice window {half} exceeds {MAX_WINDOW}")
    terms = _TermSet(stat, params, half)
    st_sq = params.sigma_t_sq(t)
    mu = terms.means(t)
    tau, tau_hat = terms.slopes(t)
    big_a = tau * tau_hat
    big_b = tau * terms.dl_g + tau_hat * terms.dh_g
    gam = terms.gamma()
    u = x - mu
    h_of_u = (gam + big_a / st_sq) + big_b * u / st_sq - big_a * u * u / (st_sq * st_sq)
    phi = np.exp(-(u * u) / (2.0 * st_sq)) / (_SQRT_2PI * math.sqrt(st_sq))
    value = float(np.sum(terms.sign * terms.psi * h_of_u * phi)) / norm
    return max(value, 0.0)


# ---------------------------------------------------------------------------
# quadrature route


def _bundle(u1, u2, j, variance):
    """A reflection series and its barrier derivatives from its two image
    families, vectorized over x (axis 0) and j (axis 1).

    ``u1`` are images with d/dh = -2j, d/dl = +2j; ``u2`` images with
    d/dh = 2j - 2, d/dl = -2j.  Works for the left factor and, after the
    bridge reflection of its arguments, equally for the right factor.
    """
    inv_v = 1.0 / variance
    phi1 = np.exp(-(u1 * u1) * (0.5 * inv_v)) / math.sqrt(2.0 * math.pi * variance)
    phi2 = np.exp(-(u2 * u2) * (0.5 * inv_v)) / math.sqrt(2.0 * math.pi * variance)
    d1 = -u1 * inv_v * phi1
    d2 = -u2 * inv_v * phi2
    dd1 = (u1 * u1 * inv_v - 1.0) * inv_v * phi1
    dd2 = (u2 * u2 * inv_v - 1.0) * inv_v * phi2
    two_j = 2.0 * j
    q = np.sum(phi1 - phi2, axis=1)
    dh = np.sum(-two_j * d1 - (two_j - 2.0) * d2, axis=1)
    dl = np.sum(two_j * d1 + two_j * d2, axis=1)
    dhl = np.sum(-two_j * two_j * dd1 + two_j * (two_j - 2.0) * dd2, axis=1)
    return q, dh, dl, dhl


def _left_bundle(x, t, high, low, params, ctrl):
    variance = t * params.sigma_sq
    delta = high - low
    half = window_half_width(delta, math.sqrt(variance), ctrl.tail_tolerance) + 1
    j = np.arange(-half, half + 1, dtype=float)[None, :]
    xx = np.asarray(x, dtype=float)[:, None]
    u1 = xx - 2.0 * j * delta
    u2 = xx - 2.0 * high + 2.0 * j * delta
    return _bundle(u1, u2, j, variance)


def _right_bundle(x, t, high, low, close, params, ctrl):
    variance = (1.0 - t) * params.sigma_sq
    delta = high - low
    half = window_half_width(delta, math.sqrt(variance), ctrl.tail_tolerance) + 1
    j = np.arange(-half, half + 1, dtype=float)[None, :]
    xx = np.asarray(x, dtype=float)[:, None]
    u1 = close - xx - 2.0 * j * delta
    u2 = close + xx - 2.0 * high + 2.0 * j * delta
    return _bundle(u1, u2, j, variance)


def _legendre_grid(low, high, quad):
    nodes, weights = np.polynomial.legendre.leggauss(quad.nodes)
    edges = np.linspace(low, high, quad.panels + 1)
    xs = []
    ws = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        halfw = 0.5 * (b - a)
        xs.append(mid + halfw * nodes)
        ws.append(halfw * weights)
    return np.concatenate(xs), np.concatenate(ws)


def statistic_density_on_grid(x, t, stat, params=ModelParams(), ctrl=DEFAULT_SERIES):
    """Unnormalized position density at time t from the product-form route.

    Mixed (high, low) derivative of the product of the two survival
    factors, each factor and its derivatives evaluated as single-index
    series.  This is the independent check on the lattice route.
    """
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")
    ql, dhl_, dll, ddl = _left_bundle(x, t, stat.high, stat.low, params, ctrl)
    qr, dhr, dlr, ddr = _right_bundle(x, t, stat.high, stat.low, stat.close, params, ctrl)
    return -(ql * ddr + dhl_ * dlr + dll * dhr + ddl * qr)


def _quadrature_moments_scalar(t, stat, params, ctrl, quad):
    xs, ws = _legendre_grid(stat.low, stat.high, quad)
    prob = statistic_density_on_grid(xs, t, stat, params, ctrl)
    m0 = float(np.sum(ws * prob))
    m1 = float(np.sum(ws * xs * prob))
    m2 = float(np.sum(ws * xs * xs * prob))
    return m0, m1, m2


def quadrature_moments_chl(t, stat, params=ModelParams(), ctrl=DEFAULT_SERIES, quad=DEFAULT_QUADRATURE):
    """Moments by integrating the product-form density over [low, high].

    Deliberately a different code path from :func:`moments_chl` -- the two
    serve as mutual oracles and are never collapsed.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    if t < ENDPOINT_EPS or 1.0 - t < ENDPOINT_EPS:
        m0 = density_hlc(stat, params, ctrl)
        c = stat.close if 1.0 - t < ENDPOINT_EPS else 0.0
        return MomentTriple(m0=m0, m1=c * m0, m2=c * c * m0)
    m0, m1, m2 = _quadrature_moments_scalar(t, stat, params, ctrl, quad)
    return MomentTriple(m0=m0, m1=m1, m2=m2)


# ---------------------------------------------------------------------------
# conditional curves


def _regularize_stat(stat, params):
    eps = DEGENERATE_EPS * max(stat.range, params.sigma)
    h, low, c = stat.high, stat.low, stat.close
    if h == c:
        c = h - eps
    if low == c:
        c = low + eps
    if h == 0.0:
        h = eps
    if low == 0.0:
        low = -eps
    c = min(max(c, low), h)
    if (h, low, c) == (stat.high, stat.low, stat.close):
        return stat
    return HighLowCloseStat(high=h, low=low, close=c)


def conditional_curve_chl(stat, params=ModelParams(), grid=None, ctrl=DEFAULT_SERIES):
    """Mean/variance curve of the path given (close, high, low).

    The mean is M1/M0 and the variance M2/M0 - mean^2, with M0 the terminal
    statistic density (the same normalization for every moment).  Endpoint
    times use the pinned limits; statistics sitting exactly on a degenerate
    edge (close at an extreme, or a one-sided envelope) are nudged inside.
    """
    if grid is None:
        grid = np.linspace(0.0, 1.0, 101)
    t = np.asarray(grid, dtype=float)
    if np.any((t < 0.0) | (t > 1.0)):
        raise DomainError("grid times must lie in [0, 1]")
    work = _regularize_stat(stat, params)

    mean = np.empty_like(t)
    var = np.empty_like(t)
    left = t < ENDPOINT_EPS
    right = 1.0 - t < ENDPOINT_EPS
    interior = ~(left | right)
    mean[left] = 0.0
    var[left] = 0.0
    mean[right] = stat.close
    var[right] = 0.0
    if np.any(interior):
        m0, m1, m2 = _moment_arrays(t[interior], work, params, DEFAULT_SERIES if ctrl is None else ctrl)
        mu = m1 / m0
        mean[interior] = mu
        var[interior] = floor_variance(m2 / m0 - mu * mu, scale=float(np.max(np.abs(m2 / m0))))
    return ConditionalCurve(times=t, mean=mean, variance=var, label="close+high+low")


# ---------------------------------------------------------------------------
# (high, low) only: close integrated out


def _hl_bundles(x, t, high, low, params, ctrl):
    """The S-factor (close integrated out of the right segment) and its
    barrier derivatives, evaluated with the integration limits held fixed
    at the barriers while high/low are differentiated."""
    sq = params.sigma_sq
    var_r = (1.0 - t) * sq
    sig_r = math.sqrt(var_r)
    delta = high - low
    half = window_half_width(delta, sig_r, ctrl.tail_tolerance) + 1
    k = np.arange(-half, half + 1, dtype=float)[None, :]
    xx = np.asarray(x, dtype=float)[:, None]

    u_a = high - xx - 2.0 * k * delta
    u_b = low - xx - 2.0 * k * delta
    u_c = xx - high - 2.0 * k * delta
    u_d = low + xx - 2.0 * high - 2.0 * k * delta

    def cdf_half(u):
        return 0.5 * special.erf(u / (_SQRT2 * sig_r))

    def pdf(u):
        return np.exp(-(u * u) / (2.0 * var_r)) / (_SQRT_2PI * sig_r)

    def dpdf(u):
        return -u / var_r * pdf(u)

    two_k = 2.0 * k
    s = np.sum((cdf_half(u_a) - cdf_half(u_b)) - (cdf_half(u_c) - cdf_half(u_d)), axis=1)
    pa, pb, pc, pd = pdf(u_a), pdf(u_b), pdf(u_c), pdf(u_d)
    dh_s = np.sum(-two_k * (pa - pb) + (2.0 + two_k) * (pc - pd), axis=1)
    dl_s = np.sum(two_k * (pa - pb) - two_k * (pc - pd), axis=1)
    da, db, dc, dd = dpdf(u_a), dpdf(u_b), dpdf(u_c), dpdf(u_d)
    dhl_s = np.sum(-two_k * two_k * (da - db) + (2.0 + two_k) * two_k * (dc - dd), axis=1)
    return s, dh_s, dl_s, dhl_s


def distribution_hl(x, t, high, low, params=ModelParams(), ctrl=DEFAULT_SERIES):
    """Close-marginalized generator: position density at t jointly with the
    running extremes staying inside (low, high)."""
    if not (low <= np.min(x) and np.max(x) <= high):
        raise DomainError("x must lie inside [low, high]")
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ql = np.array([barrier_series_Q(float(v), t, high, low, params, ctrl) for v in xs])
    s, _, _, _ = _hl_bundles(xs, t, high, low, params, ctrl)
    out = ql * s
    return float(out[0]) if np.ndim(x) == 0 else out


def conditional_density_hl(x, t, high, low, params=ModelParams(), ctrl=DEFAULT_SERIES):
    """Density of the position at t given the (high, low) envelope alone."""
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must be interior to (0, 1), got {t}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ql, dh_q, dl_q, dhl_q = _left_bundle(xs, t, high, low, params, ctrl)
    s, dh_s, dl_s, dhl_s = _hl_bundles(xs, t, high, low, params, ctrl)
    unnorm = -(dhl_q * s + dh_q * dl_s + dl_q * dh_s + ql * dhl_s)
    norm = density_hl(high, low, params, ctrl)
    out = unnorm / norm
    return float(out[0]) if np.ndim(x) == 0 else out


def moments_hl(t, high, low, params=ModelParams(), ctrl=DEFAULT_SERIES, quad=DEFAULT_QUADRATURE):
    """Quadrature moments of the position given (high, low); no closed form
    is available for these."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    m0 = density_hl(high, low, params, ctrl)
    if t < ENDPOINT_EPS:
        return MomentTriple(m0=m0, m1=0.0, m2=0.0)
    if 1.0 - t < ENDPOINT_EPS:
        raise DomainError("the close is not pinned here; t=1 moments need the close law")
    xs, ws = _legendre_grid(low, high, quad)
    dens = conditional_density_hl(xs, t, high, low, params, ctrl) * m0
    return MomentTriple(
        m0=float(np.sum(ws * dens)),
        m1=float(np.sum(ws * xs * dens)),
        m2=float(np.sum(ws * xs * xs * dens)),
    )


def conditional_curve_hl(high, low, params=ModelParams(), grid=None, ctrl=DEFAULT_SERIES, quad=DEFAULT_QUADRATURE):
    """Mean/variance curve given the envelope only (quadrature throughout)."""
    if grid is None:
        grid = np.linspace(0.05, 0.95, 19)
    t = np.asarray(grid, dtype=float)
    mean = np.empty_like(t)
    var = np.empty_like(t)
    for idx, ti in enumerate(t):
        trip = moments_hl(float(ti), high, low, params, ctrl, quad)
        mean[idx] = trip.mean
        var[idx] = trip.variance
    return ConditionalCurve(times=t, mean=mean, variance=var, label="high+low")
