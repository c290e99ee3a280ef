"""Per-bar interpolation pipeline: bars -> conditional curves.

Ties the pieces together: estimate sigma^2 for each bar, map the
requested wall-time grid through the volatility clock, evaluate the
chosen conditional law on that clock, and emit rows.  Numeric trouble in
one bar annotates that bar and moves on; a batch never dies half-way
because one bar was pathological.
"""

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .condch import conditional_curve_ch, conditional_curve_close
from .condchl import conditional_curve_chl
from .curves import ConditionalCurve
from .errors import DomainError, OhlcBridgeError
from .volatility import (
    VolEstimate,
    sigma_const,
    sigma_garman_klass,
    sigma_max_likelihood,
)

METHODS = ("bridge", "ch", "chl")
SIGMA_METHODS = ("const", "gk", "ml")


@dataclass
class InterpolationResult:
    """One bar's curve (or its failure note)."""

    bar_id: str
    method: str
    times: np.ndarray
    tau: np.ndarray
    curve: ConditionalCurve | None
    estimate: VolEstimate | None
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


def _flat_curve(tau):
    z = np.zeros_like(tau)
    return ConditionalCurve(times=tau, mean=z, variance=z.copy(), label="flat")


def _estimator(sigma_method, bars):
    if sigma_method == "const":
        window = sigma_const(bars)
        return lambda bar: window
    if sigma_method == "gk":
        return sigma_garman_klass
    if sigma_method == "ml":
        return sigma_max_likelihood
    raise DomainError(f"sigma method must be one of {SIGMA_METHODS}, got {sigma_method!r}")


def _window_fallback(bars):
    usable = [b for b in bars if not b.is_flat]
    return sigma_const(usable if usable else bars)


def interpolate_bars(bars, method="chl", sigma="gk", grid=101, vol_time=None):
    """Conditional mean/variance curves for a batch of bars.

    ``grid`` is a point count for a uniform wall-time grid or an explicit
    array; ``vol_time`` an optional VolTimeMap bending that grid.  The
    conditional law runs on the volatility clock -- the model's time is
    cumulative variance, and tau is where the analytics live.
    """
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    bars = list(bars)
    if not bars:
        raise DomainError("no bars to interpolate")
    times = np.linspace(0.0, 1.0, grid) if np.ndim(grid) == 0 else np.asarray(grid, dtype=float)
    tau = vol_time.tau_of(times) if vol_time is not None else times.copy()
    estimate_for = _estimator(sigma, bars)

    results = []
    for bar in bars:
        try:
            if bar.is_flat:
                # price never moved: zero curve, window volatility
                results.append(InterpolationResult(
                    bar_id=bar.bar_id, method=method, times=times, tau=tau,
                    curve=_flat_curve(tau), estimate=_window_fallback(bars)))
                continue
            est = estimate_for(bar)
            params = est.params()
            if method == "bridge":
                curve = conditional_curve_close(bar.close_log, params, grid=tau)
            elif method == "ch":
                curve = conditional_curve_ch(bar.high_log, bar.close_log, params, grid=tau)
            else:
                curve = conditional_curve_chl(bar.stat(), params, grid=tau)
            curve = ConditionalCurve(
                times=curve.times,
                mean=np.clip(curve.mean, bar.low_log, bar.high_log),
                variance=curve.variance,
                label=curve.label,
            )
            results.append(InterpolationResult(
                bar_id=bar.bar_id, method=method, times=times, tau=tau,
                curve=curve, estimate=est))
        except OhlcBridgeError as exc:
            results.append(InterpolationResult(
                bar_id=bar.bar_id, method=method, times=times, tau=tau,
                curve=None, estimate=None, error=f"{type(exc).__name__}: {exc}"))
    return results


def emit_results(results, target=None, kind="csv"):
    """Rows of (bar_id, t, tau, mean, variance, sigma_sq, method).

    12 significant digits, header always present.  JSON output carries the
    same rows plus a per-bar error list.
    """
    if kind not in ("csv", "json"):
        raise DomainError(f"unknown output kind {kind!r}")
    header = ["bar_id", "t", "tau", "mean", "variance", "sigma_sq", "method"]
    rows = []
    errors = []
    for r in results:
        if not r.ok:
            errors.append({"bar_id": r.bar_id, "error": r.error})
            continue
        s2 = r.estimate.sigma_sq
        for i in range(r.times.shape[0]):
            rows.append([r.bar_id, f"{r.times[i]:.12g}", f"{r.tau[i]:.12g}",
                         f"{r.curve.mean[i]:.12g}", f"{r.curve.variance[i]:.12g}",
                         f"{s2:.12g}", r.method])

    buf = io.StringIO()
    if kind == "csv":
        w = csv.writer(buf)
        w.writerow(header)
        w.writerows(rows)
        for e in errors:
            buf.write(f"# error bar_id={e['bar_id']}: {e['error']}\n")
    else:
        json.dump({"rows": [dict(zip(header, row)) for row in rows],
                   "errors": errors}, buf, indent=2)
        buf.write("\n")
    text = buf.getvalue()
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
        return None
    with open(target, "w") as fh:
        fh.write(text)
    return None
