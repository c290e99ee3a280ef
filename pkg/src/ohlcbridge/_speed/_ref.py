"""NumPy reference implementations of the hot loops.

Semantics (and, up to floating-point association order, results) match the
compiled kernels in ``_fast``; the test-suite runs the Monte Carlo
contracts against both.
"""

import numpy as np


def walk_block(increments, record_idx, high, low, close, argmax, samples):
    """Cumulative-sum walk of one block of paths.

    ``increments`` is (paths, steps), already scaled to per-step standard
    deviations.  Summaries include the start point (so ``high >= 0 >= low``
    always), ``argmax`` is the grid index of the running maximum (0 when
    the start is never exceeded), and ``samples[:, r]`` receives the value
    at step ``record_idx[r]`` (1-based).
    """
    paths = np.cumsum(increments, axis=1)
    np.maximum(paths.max(axis=1), 0.0, out=high)
    np.minimum(paths.min(axis=1), 0.0, out=low)
    close[:] = paths[:, -1]
    idx = np.argmax(paths, axis=1)
    peak = paths[np.arange(paths.shape[0]), idx]
    argmax[:] = np.where(peak > 0.0, idx + 1, 0)
    if record_idx.size:
        samples[:, :] = paths[:, record_idx - 1]


def accumulate_bins(samples, bins, counts, sums, sumsqs):
    """Scatter-add per-path sample rows into per-bin moment accumulators.

    Paths with a negative bin id are skipped.  ``counts`` is (nbins,),
    ``sums``/``sumsqs`` are (nbins, n_times).
    """
    ok = bins >= 0
    if not np.all(ok):
        samples = samples[ok]
        bins = bins[ok]
    np.add.at(counts, bins, 1.0)
    np.add.at(sums, bins, samples)
    np.add.at(sumsqs, bins, samples * samples)
