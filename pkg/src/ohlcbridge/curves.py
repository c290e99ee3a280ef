"""Result containers: unnormalized moment triples and conditional curves."""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError

# Slightly negative variances show up from cancellation at the ends of the
# time grid; anything within this (scale-relative) band is floored to zero,
# anything worse is a genuine numerical failure.
_VAR_FLOOR_TOL = 1e-12


def floor_variance(raw, scale=1.0):
    tol = _VAR_FLOOR_TOL * max(1.0, abs(scale))
    raw = np.asarray(raw, dtype=float)
    bad = raw < -tol
    if np.any(bad):
        worst = float(np.min(raw))
        raise NumericError(f"variance {worst} below the clamping tolerance {-tol}")
    out = np.maximum(raw, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MomentTriple:
    """Unnormalized moments (M0, M1, M2) of a conditioned path position.

    M0 is the joint density of the conditioning statistic itself, so
    ``mean`` and ``variance`` are the conditional moments.
    """

    m0: float
    m1: float
    m2: float

    @property
    def mean(self):
        return self.m1 / self.m0

    @property
    def variance(self):
        second = self.m2 / self.m0
        return floor_variance(second - self.mean**2, scale=second)


@dataclass(frozen=True)
class ConditionalCurve:
    """Paired mean/variance sequences over a time grid."""

    times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    label: str = field(default="")

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        m = np.asarray(self.mean, dtype=float)
        v = np.asarray(self.variance, dtype=float)
        if not (t.shape == m.shape == v.shape):
            raise ValueError("times, mean and variance must share a shape")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "variance", v)

    def time_average_variance(self):
        """Trapezoidal time average of the variance over the stored grid."""
        span = self.times[-1] - self.times[0]
        if span <= 0:
            raise ValueError("need an increasing time grid")
        return float(np.trapezoid(self.variance, self.times) / span)
