"""Empirical-vs-analytic comparison tables.

Each bin's empirical mean (or variance) curve is compared against the
analytic curve evaluated at the bin's mean statistics, giving a per-bin
MSE; sorting those identifies the worst-fitting bins, which is how the
fits are audited (worst few quantiles rather than a single aggregate).

For sharp per-bin tests :func:`bin_reference` goes one step further: a
bin is not a point statistic, so the right analytic counterpart of its
empirical curves carries the within-bin statistic spread at second order.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass
class CurveComparison:
    """Sorted per-bin fit errors between empirical and analytic curves."""

    bin_ids: np.ndarray
    mse: np.ndarray
    order: np.ndarray

    def worst(self, quantile):
        """Bin ids in the worst ``quantile`` tail of the MSE distribution."""
        if not 0.0 < quantile <= 1.0:
            raise DomainError(f"quantile must lie in (0, 1], got {quantile}")
        k = max(1, int(round(quantile * self.order.shape[0])))
        return self.bin_ids[self.order[:k]]

    def quantile_mse(self, quantile):
        """Largest MSE inside the stated worst quantile."""
        return float(self.mse[self.worst(quantile)[-1]])


@dataclass
class BinReference:
    """Spread-corrected analytic curves for one bin of conditioned paths."""

    mean: np.ndarray
    variance: np.ndarray

    def standard_errors(self, count):
        """(SE of the empirical mean, SE of the empirical variance) at
        each time for a bin of ``count`` paths, under the reference law."""
        if count < 2:
            raise DomainError(f"need at least 2 paths in the bin, got {count}")
        se_mean = np.sqrt(self.variance / count)
        se_var = self.variance * np.sqrt(2.0 / (count - 1.0))
        return se_mean, se_var


def bin_reference(curve_fn, stat_mean, stat_cov, deltas):
    """Analytic reference for the empirical curves of one bin.

    A bin's empirical mean curve estimates E[m(S) | S in bin] and its
    variance curve estimates Var[x_t | S in bin]; both differ from the
    curves evaluated at the bin-mean statistic by within-bin spread
    terms.  To second order,

        E[m(S)]  =  m(S0) + tr(H_m Sigma) / 2
        Var[x_t] =  v(S0) + tr(H_v Sigma) / 2 + g_m' Sigma g_m

    with Sigma the within-bin covariance of the conditioning statistics
    and g/H the gradient and Hessian of the curve family in the
    statistic, estimated here by central differences of half-width
    ``deltas``.  Without the correction, a 3-sigma comparison on a
    well-populated bin tests the bin width instead of the law.

    ``curve_fn(stat)`` must return the (mean, variance) curve arrays for
    a raw statistic tuple; the caller chooses ``deltas`` small enough to
    stay inside the statistic domain.
    """
    s0 = [float(v) for v in stat_mean]
    nd = len(s0)
    sigma = np.atleast_2d(np.asarray(stat_cov, dtype=float))
    if sigma.shape != (nd, nd):
        raise DomainError(f"covariance shape {sigma.shape} does not match "
                          f"a {nd}-statistic bin")
    deltas = [float(d) for d in deltas]
    if len(deltas) != nd or any(not d > 0.0 for d in deltas):
        raise DomainError("need one positive finite-difference step per statistic")

    m0, v0 = (np.asarray(a, dtype=float) for a in curve_fn(tuple(s0)))
    gm = np.empty((nd,) + m0.shape)
    hm = np.zeros((nd, nd) + m0.shape)
    hv = np.zeros_like(hm)
    plus, minus = [], []
    for a in range(nd):
        up, down = list(s0), list(s0)
        up[a] += deltas[a]
        down[a] -= deltas[a]
        mp, vp = curve_fn(tuple(up))
        mm, vm = curve_fn(tuple(down))
        plus.append((mp, vp))
        minus.append((mm, vm))
        gm[a] = (mp - mm) / (2.0 * deltas[a])
        hm[a, a] = (mp - 2.0 * m0 + mm) / deltas[a] ** 2
        hv[a, a] = (vp - 2.0 * v0 + vm) / deltas[a] ** 2
    for a, b in itertools.combinations(range(nd), 2):
        upup, downdown = list(s0), list(s0)
        upup[a] += deltas[a]
        upup[b] += deltas[b]
        downdown[a] -= deltas[a]
        downdown[b] -= deltas[b]
        mpp, vpp = curve_fn(tuple(upup))
        mmm, vmm = curve_fn(tuple(downdown))
        hm[a, b] = hm[b, a] = (
            mpp + mmm - plus[a][0] - minus[a][0] - plus[b][0] - minus[b][0] + 2.0 * m0
        ) / (2.0 * deltas[a] * deltas[b])
        hv[a, b] = hv[b, a] = (
            vpp + vmm - plus[a][1] - minus[a][1] - plus[b][1] - minus[b][1] + 2.0 * v0
        ) / (2.0 * deltas[a] * deltas[b])

    mean = m0 + 0.5 * np.einsum("ab,ab...->...", sigma, hm)
    variance = (
        v0
        + 0.5 * np.einsum("ab,ab...->...", sigma, hv)
        + np.einsum("a...,ab,b...->...", gm, sigma, gm)
    )
    return BinReference(mean=mean, variance=variance)


def compare_to_analytic(report, curve_fn, which="mean", include_sparse=False):
    """Per-bin MSE of empirical curves against an analytic family.

    ``curve_fn(stat_means_row, times)`` must return the analytic curve
    values at the report times for a bin whose conditioning statistics
    average to ``stat_means_row``.  Sparse bins are excluded by default:
    their empirical curves are mostly noise and would dominate the
    ranking for the wrong reason.
    """
    if which not in ("mean", "variance"):
        raise DomainError(f"which must be 'mean' or 'variance', got {which!r}")
    empirical = report.mean_curves if which == "mean" else report.var_curves
    keep = report.counts > 1
    if not include_sparse:
        keep &= report.adequate
    ids = np.flatnonzero(keep)
    if ids.size == 0:
        raise DomainError("no bins to compare")
    mse = np.empty(report.counts.shape[0])
    mse.fill(np.nan)
    for b in ids:
        analytic = np.asarray(curve_fn(report.stat_means[b], report.times))
        mse[b] = float(np.mean((empirical[b] - analytic) ** 2))
    order = ids[np.argsort(-mse[ids])]
    return CurveComparison(bin_ids=np.arange(report.counts.shape[0]),
                           mse=mse, order=order)
