"""Empirical conditional curves and their ensemble averages.

For every bin of a :class:`~ohlcbridge.mc.binning.BinGrid` the driver
accumulates (count, sum, sum of squares) of the path value at each report
time, giving per-bin mean and variance curves.  The ensemble variance is
the count-weighted average of the per-bin variance curves, and its
trapezoidal time average is the headline scalar for each conditioning set.

Value matrices are never required: summary-only ensembles are replayed
block by block from their per-block RNG streams (pass two of the two-pass
scheme), so memory stays at one block regardless of ensemble size.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .paths import block_ranges, regenerate_samples

DEFAULT_REPORT_POINTS = 101


@dataclass
class EnsembleVarianceReport:
    """Per-bin empirical mean/variance curves plus their ensemble average."""

    dims: tuple
    times: np.ndarray
    counts: np.ndarray
    mean_curves: np.ndarray
    var_curves: np.ndarray
    stat_means: np.ndarray
    adequate: np.ndarray

    def ensemble_variance(self, include_sparse=True):
        """Count-weighted average variance curve over bins.

        ``include_sparse=False`` drops bins under the occupancy floor
        (they carry noisy variance estimates but also real paths; the
        default keeps them, weighting each bin by its count either way).
        """
        keep = self.counts > 1
        if not include_sparse:
            keep &= self.adequate
        if not np.any(keep):
            raise DomainError("no bins left to average")
        w = self.counts[keep]
        return (w @ self.var_curves[keep]) / w.sum()

    def time_averaged_variance(self, include_sparse=True):
        v = self.ensemble_variance(include_sparse)
        span = self.times[-1] - self.times[0]
        return float(np.trapezoid(v, self.times) / span)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            stat_cols = [f"mean_{d}" for d in self.dims]
            w.writerow(["bin", "count", *stat_cols, "t", "mean", "variance"])
            for b in range(self.counts.shape[0]):
                stats = [f"{s:.12g}" for s in self.stat_means[b]]
                for i, t in enumerate(self.times):
                    w.writerow([b, int(self.counts[b]), *stats, f"{t:.12g}",
                                f"{self.mean_curves[b, i]:.12g}",
                                f"{self.var_curves[b, i]:.12g}"])


def report_times(ensemble, n_points=DEFAULT_REPORT_POINTS):
    """A subset of the ensemble grid: t=0, about ``n_points`` interior
    nodes, and t=1."""
    n_steps = ensemble.grid.n_steps
    idx = np.unique(np.round(np.linspace(0, n_steps, n_points)).astype(np.int64))
    return idx


def _finalize(grids, times, sums, sumsqs, counts):
    reports = []
    for g, s, s2, cnt in zip(grids, sums, sumsqs, counts):
        mean = np.zeros_like(s)
        var = np.zeros_like(s)
        ok = cnt > 0
        mean[ok] = s[ok] / cnt[ok, None]
        two = cnt > 1
        # unbiased per-bin variance at each report time
        var[two] = (s2[two] - cnt[two, None] * mean[two] ** 2) / (cnt[two, None] - 1.0)
        np.maximum(var, 0.0, out=var)
        reports.append(EnsembleVarianceReport(
            dims=g.dims, times=times, counts=cnt, mean_curves=mean,
            var_curves=var, stat_means=g.stat_means, adequate=g.adequate,
        ))
    return reports


def empirical_curves_multi(ensemble, grids, n_points=DEFAULT_REPORT_POINTS,
                           workers=1):
    """One sweep over the ensemble accumulating every grid's curves.

    Sharing the sweep matters: replaying a summary-only ensemble
    regenerates every path, so all conditioning sets of an experiment
    should ride the same pass.  Worker threads parallelize the replay;
    accumulation happens in block order, keeping results bit-identical
    for any worker count.
    """
    from .. import _speed

    idx = report_times(ensemble, n_points)
    times = ensemble.times[idx]
    n_times = idx.shape[0]
    for g in grids:
        if g.bin_id.shape[0] != ensemble.n_paths:
            raise DomainError("grid was built over a different ensemble")

    counts = [np.zeros(g.total_bins) for g in grids]
    sums = [np.zeros((g.total_bins, n_times)) for g in grids]
    sumsqs = [np.zeros((g.total_bins, n_times)) for g in grids]

    def accumulate(samples, start, stop):
        for g, cnt, s, s2 in zip(grids, counts, sums, sumsqs):
            _speed.accumulate_bins(samples, g.bin_id[start:stop], cnt, s, s2)

    if ensemble.values is not None:
        accumulate(np.ascontiguousarray(ensemble.values[:, idx]), 0, ensemble.n_paths)
        return _finalize(grids, times, sums, sumsqs, counts)

    record = idx[idx > 0].astype(np.int64)
    has_zero = idx[0] == 0
    blocks = list(block_ranges(ensemble.n_paths, ensemble.block_size))

    def replay(args):
        blk, start, stop = args
        return start, stop, regenerate_samples(ensemble, record, start, stop, blk)

    def feed(results):
        for start, stop, body in results:
            if has_zero:
                samples = np.zeros((stop - start, n_times))
                samples[:, 1:] = body
            else:
                samples = body
            accumulate(samples, start, stop)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            feed(pool.map(replay, blocks))
    else:
        feed(map(replay, blocks))
    return _finalize(grids, times, sums, sumsqs, counts)


def empirical_curves(ensemble, grid, n_points=DEFAULT_REPORT_POINTS, workers=1):
    """Empirical mean/variance curves for one conditioning grid."""
    return empirical_curves_multi(ensemble, [grid], n_points, workers)[0]
