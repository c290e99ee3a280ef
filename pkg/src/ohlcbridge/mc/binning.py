"""Adaptive binning of path summaries.

Bins are equal-count quantile cells, optionally flattened by a density
power: boundaries are chosen so that the integral of (sample density)^alpha
is the same over every bin.  alpha = 1 is plain quantiles; alpha below 1
widens the crowded center bins and narrows the sparse extreme bins, which
is what keeps the extreme-statistic bins statistically usable.

Multidimensional grids are nested: the second statistic is binned within
each bin of the first, and so on, so every cell is conditionally
equal-count rather than a fixed product mesh.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

DEFAULT_ALPHA = 0.72
DEFAULT_MIN_OCCUPANCY = 50

# Fine pre-cells per requested bin when estimating the density for the
# alpha-flattened boundaries.
_REFINE = 10


def _quantile_edges(sample, nbins):
    """Interior boundaries putting equal counts in each bin."""
    qs = np.sort(sample)
    n = qs.shape[0]
    cuts = (np.arange(1, nbins) * n) // nbins
    return qs[cuts]


def _alpha_edges(sample, nbins, alpha):
    """Interior boundaries equalizing the integral of density^alpha.

    The density is estimated on a fine equal-count mesh; the integral of
    density^alpha over a mesh cell is count^alpha * width^(1-alpha), and
    the cumulative of those is inverted piecewise-linearly.
    """
    if alpha == 1.0:
        return _quantile_edges(sample, nbins)
    qs = np.sort(sample)
    n = qs.shape[0]
    fine = min(_REFINE * nbins, max(nbins, n // 2))
    cut_idx = (np.arange(fine + 1) * n) // fine
    cut_idx[-1] = n - 1
    edges = qs[np.minimum(cut_idx, n - 1)]
    edges[0] = qs[0]
    widths = np.diff(edges)
    counts = np.diff((np.arange(fine + 1) * n) // fine).astype(float)
    mass = np.where(widths > 0.0, counts ** alpha * widths ** (1.0 - alpha), 0.0)
    cum = np.concatenate([[0.0], np.cumsum(mass)])
    targets = np.arange(1, nbins) * (cum[-1] / nbins)
    cell = np.searchsorted(cum, targets, side="right") - 1
    cell = np.clip(cell, 0, fine - 1)
    frac = (targets - cum[cell]) / np.where(mass[cell] > 0.0, mass[cell], 1.0)
    out = edges[cell] + frac * widths[cell]
    # ties in the sample can produce non-monotone interpolated boundaries
    return np.maximum.accumulate(out)


def _assign(sample, interior_edges):
    return np.searchsorted(interior_edges, sample, side="right")


@dataclass
class BinGrid:
    """Nested equal-count bins over up to three path statistics.

    ``bin_id`` maps each path to its flat cell index; ``stat_means`` holds
    the within-cell average of each conditioning statistic (the value at
    which analytic curves are evaluated when comparing); ``adequate``
    flags cells meeting the occupancy floor.
    """

    dims: tuple
    nbins: tuple
    alpha: float
    boundaries: list
    bin_id: np.ndarray
    counts: np.ndarray
    stat_means: np.ndarray
    min_occupancy: int

    @property
    def total_bins(self):
        return int(np.prod(self.nbins))

    @property
    def adequate(self):
        return self.counts >= self.min_occupancy


def build_bins(ensemble, dims, nbins, alpha=DEFAULT_ALPHA,
               min_occupancy=DEFAULT_MIN_OCCUPANCY):
    """Nested density-power bins over the named summary statistics.

    ``dims`` is a sequence of statistic names ("close", "high", "low",
    "range"); ``nbins`` one count per dimension.  Low-occupancy cells are
    flagged, never dropped here -- whether they enter ensemble averages is
    the report's decision.
    """
    dims = tuple(dims)
    nbins = (nbins,) * len(dims) if np.ndim(nbins) == 0 else tuple(nbins)
    if not 1 <= len(dims) <= 3:
        raise DomainError(f"1 to 3 conditioning statistics, got {len(dims)}")
    if len(nbins) != len(dims):
        raise DomainError("need one bin count per statistic")
    if any(b < 2 for b in nbins):
        raise DomainError("every dimension needs at least 2 bins")
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")

    stats = [np.asarray(ensemble.summary(d), dtype=float) for d in dims]
    n = stats[0].shape[0]
    if n < int(np.prod(nbins)):
        raise DomainError(f"{n} paths cannot fill {int(np.prod(nbins))} bins")

    # level 1 over the pooled sample, deeper levels within each parent cell
    boundaries = []
    edges0 = _alpha_edges(stats[0], nbins[0], alpha)
    boundaries.append(edges0)
    ids = _assign(stats[0], edges0)
    for level in range(1, len(dims)):
        parents = int(np.prod(nbins[:level]))
        level_edges = np.empty((parents, nbins[level] - 1))
        child = np.empty(n, dtype=np.int64)
        for parent in range(parents):
            members = ids == parent
            sub = stats[level][members]
            if sub.size >= nbins[level]:
                e = _alpha_edges(sub, nbins[level], alpha)
            else:
                # starved parent cell: fall back to the pooled boundaries
                e = _alpha_edges(stats[level], nbins[level], alpha)
            level_edges[parent] = e
            child[members] = _assign(sub, e)
        boundaries.append(level_edges)
        ids = ids * nbins[level] + child

    total = int(np.prod(nbins))
    counts = np.bincount(ids, minlength=total).astype(float)
    means = np.zeros((total, len(dims)))
    for d, stat in enumerate(stats):
        np.add.at(means[:, d], ids, stat)
    nonzero = counts > 0
    means[nonzero] /= counts[nonzero, None]

    return BinGrid(dims=dims, nbins=nbins, alpha=alpha, boundaries=boundaries,
                   bin_id=ids.astype(np.int64), counts=counts, stat_means=means,
                   min_occupancy=min_occupancy)
