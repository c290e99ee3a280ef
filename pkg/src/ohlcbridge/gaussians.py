"""Numerically stable Gaussian kernels used by every analytic module.

All three functions broadcast over numpy arrays and return plain floats for
scalar input.  They are pure and hold no state.
"""

import numpy as np
from scipy import special

from .errors import DomainError

_SQRT2 = float(np.sqrt(2.0))
_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


def _finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return arr


def _maybe_scalar(arr):
    return float(arr) if arr.ndim == 0 else arr


def gaussian_pdf(x, variance):
    """Density at ``x`` of a centered normal with the given variance.

    Parameters
    ----------
    x : float or array_like
    variance : float or array_like
        Strictly positive.
    """
    v = _finite("variance", variance)
    if np.any(v <= 0):
        raise DomainError(f"variance must be > 0, got {variance!r}")
    xa = _finite("x", x)
    out = np.exp(-(xa * xa) / (2.0 * v)) / np.sqrt(2.0 * np.pi * v)
    return _maybe_scalar(out)


def scaled_erf(x, sigma):
    """Half the error function at scale ``sigma``: 0.5 * erf(x / (sqrt(2) sigma)).

    Odd and monotone in ``x`` with limits +-1/2; its derivative in ``x`` is
    the Gaussian density with variance sigma**2.
    """
    s = _finite("sigma", sigma)
    if np.any(s <= 0):
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    xa = np.asarray(x, dtype=float)
    # +-inf are legitimate limit arguments here
    if np.any(np.isnan(xa)):
        raise DomainError("x must not be NaN")
    out = 0.5 * special.erf(xa / (_SQRT2 * s))
    return _maybe_scalar(out)


def erfcx_product(h, sigma):
    """The stabilized product erfc(h / (sqrt(2) sigma)) * exp(h^2 / (2 sigma^2)).

    Evaluated through the scaled complementary error function so it never
    overflows; the naive product dies around h/sigma ~ 26 while the
    conditional-close formulas need it far beyond that.
    """
    s = _finite("sigma", sigma)
    if np.any(s <= 0):
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    ha = _finite("h", h)
    if np.any(ha < 0):
        raise DomainError(f"h must be nonnegative, got {h!r}")
    out = special.erfcx(ha / (_SQRT2 * s))
    return _maybe_scalar(out)
