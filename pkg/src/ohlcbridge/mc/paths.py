"""Path-ensemble generation.

Ensembles are produced in fixed-size blocks, each block drawing from its
own counter-based RNG stream keyed by (seed, block index).  Results are
therefore bit-identical for any worker count and any block schedule; the
only thing workers change is wall time.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import CapacityError, DomainError
from ..params import ModelParams

DEFAULT_BLOCK = 8192
# Refuse to materialize value matrices beyond this (2 GiB of float64).
MEMORY_BUDGET = 2 << 30


@dataclass(frozen=True)
class GridSpec:
    """Time discretization of [0, 1].

    ``cosine`` packs steps toward both endpoints (the extremes of a bar
    are disproportionately decided there); ``uniform`` is the default.
    """

    n_steps: int
    kind: str = "uniform"

    def __post_init__(self):
        if self.n_steps < 2:
            raise DomainError(f"n_steps must be >= 2, got {self.n_steps}")
        if self.kind not in ("uniform", "cosine"):
            raise DomainError(f"unknown grid kind {self.kind!r}")

    def times(self):
        i = np.arange(self.n_steps + 1, dtype=float)
        if self.kind == "uniform":
            return i / self.n_steps
        return 0.5 * (1.0 - np.cos(math.pi * i / self.n_steps))


@dataclass
class PathEnsemble:
    """A batch of driftless paths started at 0 with their bar summaries.

    ``values`` (paths x grid points, first column identically 0) is kept
    only when requested -- summary-only ensembles stay regenerable from
    (seed, grid, block size), which is how the streaming report driver
    revisits the paths without storing them.
    """

    times: np.ndarray
    close: np.ndarray
    high: np.ndarray
    low: np.ndarray
    argmax: np.ndarray
    seed: int
    grid: GridSpec
    params: ModelParams
    block_size: int = DEFAULT_BLOCK
    values: np.ndarray | None = None
    generator: str = "walk"
    n_modes: int = 0
    _pin: float | None = field(default=None, repr=False)

    @property
    def n_paths(self):
        return self.close.shape[0]

    def summary(self, name):
        """One of the per-path summary statistics by name."""
        try:
            return {"close": self.close, "high": self.high, "low": self.low,
                    "range": self.high - self.low}[name]
        except KeyError:
            raise DomainError(f"unknown statistic {name!r}") from None

    def regenerable(self):
        return self.generator == "walk" and self._pin is None

    def save_summaries(self, path):
        """Columnar dump of the per-path summaries with the run header."""
        np.savez_compressed(
            path,
            close=self.close, high=self.high, low=self.low, argmax=self.argmax,
            seed=np.int64(self.seed), n_steps=np.int64(self.grid.n_steps),
            kind=np.str_(self.grid.kind), sigma=np.float64(self.params.sigma),
            block_size=np.int64(self.block_size), generator=np.str_(self.generator),
        )


def load_summaries(path):
    """Rebuild a summary-only ensemble from :meth:`PathEnsemble.save_summaries`."""
    with np.load(path) as z:
        grid = GridSpec(n_steps=int(z["n_steps"]), kind=str(z["kind"]))
        return PathEnsemble(
            times=grid.times(),
            close=z["close"], high=z["high"], low=z["low"], argmax=z["argmax"],
            seed=int(z["seed"]), grid=grid,
            params=ModelParams(sigma=float(z["sigma"])),
            block_size=int(z["block_size"]), generator=str(z["generator"]),
        )


def block_rng(seed, block_index):
    """The RNG stream owned by one block: counter-based, order-free."""
    return np.random.Generator(np.random.Philox(key=[seed, block_index]))


def block_ranges(n_paths, block_size):
    for block_index, start in enumerate(range(0, n_paths, block_size)):
        yield block_index, start, min(start + block_size, n_paths)


def _require_memory(n_paths, n_cols):
    required = n_paths * n_cols * 8
    if required > MEMORY_BUDGET:
        raise CapacityError(
            f"value matrix needs {required} bytes (budget {MEMORY_BUDGET}); "
            "use keep_values=False and the streaming report driver",
            required_bytes=required,
        )


def walk_increments(rng, n_paths, grid, params):
    """Per-step Gaussian increments for one block, scaled to the grid."""
    dt = np.diff(grid.times())
    z = rng.standard_normal((n_paths, grid.n_steps))
    z *= params.sigma * np.sqrt(dt)
    return z


def _refined_block(rng, inc, s2dt_row, out_high, out_low, out_close, out_argmax):
    """Bridge-overshoot extremes for one block; consumes ``inc`` in place.

    Per interval the running max is lifted to (a + b + sqrt((b-a)^2 -
    2 sigma^2 dt ln U)) / 2 -- the exact law of the bridge maximum given
    the endpoints -- and the min symmetrically.  The uniforms are drawn
    after the block's normals, so pass-two value replay (which consumes
    normals only) is unaffected.  Returns the cumulated paths.
    """
    sq = inc * inc
    lift = rng.random(inc.shape)
    np.log(lift, out=lift)
    lift *= -2.0 * s2dt_row
    lift += sq
    np.sqrt(lift, out=lift)
    drop = rng.random(inc.shape)
    np.log(drop, out=drop)
    drop *= -2.0 * s2dt_row
    drop += sq
    np.sqrt(drop, out=drop)
    paths = np.cumsum(inc, axis=1, out=inc)
    lift += paths
    lift[:, 1:] += paths[:, :-1]
    lift *= 0.5
    drop -= paths
    drop[:, 1:] -= paths[:, :-1]
    drop *= -0.5
    out_high[:] = np.maximum(lift.max(axis=1), 0.0)
    out_low[:] = np.minimum(drop.min(axis=1), 0.0)
    out_close[:] = paths[:, -1]
    out_argmax[:] = np.where(out_high > 0.0, np.argmax(lift, axis=1) + 1, 0)
    return paths


def generate_paths(n_paths, n_steps, params=ModelParams(), seed=0,
                   grid_spec="uniform", keep_values=False,
                   refine_extremes=False, block_size=DEFAULT_BLOCK):
    """Cumulative-sum ensemble of ``n_paths`` driftless paths.

    The summaries (close, running max/min including the start point, and
    the grid index of the max) are always computed; set ``keep_values``
    to also retain the full value matrix, subject to the memory budget.
    ``refine_extremes`` replaces the discrete running extremes with draws
    from the per-interval bridge-overshoot law, as in ``bar_statistics``:
    the summaries then follow the continuous-time law (no discretization
    undershoot) while staying coupled to the walk's grid values.
    """
    from .. import _speed

    if n_paths < 1:
        raise DomainError(f"n_paths must be >= 1, got {n_paths}")
    grid = grid_spec if isinstance(grid_spec, GridSpec) else GridSpec(n_steps, grid_spec)
    if grid.n_steps != n_steps:
        raise DomainError("grid_spec.n_steps disagrees with n_steps")

    close = np.empty(n_paths)
    high = np.empty(n_paths)
    low = np.empty(n_paths)
    argmax = np.empty(n_paths, dtype=np.int64)
    values = None
    if keep_values:
        _require_memory(n_paths, n_steps + 1)
        values = np.zeros((n_paths, n_steps + 1))
        record = np.arange(1, n_steps + 1, dtype=np.int64)
    else:
        record = np.empty(0, dtype=np.int64)
    s2dt_row = params.sigma_sq * np.diff(grid.times())

    for blk, start, stop in block_ranges(n_paths, block_size):
        rng = block_rng(seed, blk)
        inc = walk_increments(rng, stop - start, grid, params)
        if refine_extremes:
            paths = _refined_block(rng, inc, s2dt_row, high[start:stop],
                                   low[start:stop], close[start:stop],
                                   argmax[start:stop])
            if keep_values:
                values[start:stop, 1:] = paths
            continue
        samples = np.empty((stop - start, record.shape[0]))
        _speed.walk_block(inc, record, high[start:stop], low[start:stop],
                          close[start:stop], argmax[start:stop], samples)
        if keep_values:
            values[start:stop, 1:] = samples

    return PathEnsemble(times=grid.times(), close=close, high=high, low=low,
                        argmax=argmax, seed=seed, grid=grid, params=params,
                        block_size=block_size, values=values)


def regenerate_samples(ensemble, record_idx, start, stop, block_index):
    """Pass-two replay of one block: identical increments, sampled at
    ``record_idx`` (1-based grid steps)."""
    from .. import _speed

    if not ensemble.regenerable():
        raise DomainError("ensemble was not produced by the block walk generator")
    inc = walk_increments(block_rng(ensemble.seed, block_index), stop - start,
                          ensemble.grid, ensemble.params)
    n = stop - start
    samples = np.empty((n, record_idx.shape[0]))
    scratch = (np.empty(n), np.empty(n), np.empty(n), np.empty(n, dtype=np.int64))
    _speed.walk_block(inc, record_idx, *scratch, samples)
    return samples


def bar_statistics(n_bars, n_steps, params=ModelParams(), seed=0,
                   refine_extremes=True, block_size=DEFAULT_BLOCK):
    """(high, low, close) samples distributed as continuous-time bars.

    The discrete walk's extremes systematically undershoot the continuous
    ones (the path peaks between grid points).  With ``refine_extremes``
    each step interval's maximum and minimum are drawn from the bridge
    overshoot law, M = (a + b + sqrt((b-a)^2 - 2 sigma^2 dt ln U)) / 2,
    which removes the discretization bias; estimator-consistency studies
    need this, while bias studies set it off to measure the raw walk.
    """
    if n_bars < 1:
        raise DomainError(f"n_bars must be >= 1, got {n_bars}")
    grid = GridSpec(n_steps, "uniform")
    s2dt = params.sigma_sq / n_steps
    high = np.empty(n_bars)
    low = np.empty(n_bars)
    close = np.empty(n_bars)
    for blk, start, stop in block_ranges(n_bars, block_size):
        rng = block_rng(seed, blk)
        n = stop - start
        z = rng.standard_normal((n, n_steps)) * math.sqrt(s2dt)
        paths = np.cumsum(z, axis=1)
        close[start:stop] = paths[:, -1]
        if refine_extremes:
            left = np.hstack([np.zeros((n, 1)), paths[:, :-1]])
            gap = (paths - left) ** 2
            lift = np.sqrt(gap - 2.0 * s2dt * np.log(rng.random((n, n_steps))))
            drop = np.sqrt(gap - 2.0 * s2dt * np.log(rng.random((n, n_steps))))
            high[start:stop] = np.maximum(
                0.5 * (left + paths + lift).max(axis=1), 0.0)
            low[start:stop] = np.minimum(
                0.5 * (left + paths - drop).min(axis=1), 0.0)
        else:
            high[start:stop] = np.maximum(paths.max(axis=1), 0.0)
            low[start:stop] = np.minimum(paths.min(axis=1), 0.0)
    return high, low, close


def fourier_paths(n_paths, n_modes, params=ModelParams(), seed=0, n_steps=500):
    """Spectral ensemble: linear close term plus a sine series.

    Each path is xi_0 t + sqrt(2) * sum_n xi_n sin(n pi t) / (n pi), scaled
    by sigma, evaluated on a uniform grid.  A diagnostic generator: it
    converges to the walk ensemble's law as modes increase, from below in
    the extremes (truncation smooths the paths).
    """
    if n_paths < 1:
        raise DomainError(f"n_paths must be >= 1, got {n_paths}")
    if n_modes < 1:
        raise DomainError(f"n_modes must be >= 1, got {n_modes}")
    grid = GridSpec(n_steps, "uniform")
    t = grid.times()
    _require_memory(n_paths, n_steps + 1)

    n = np.arange(1, n_modes + 1, dtype=float)
    basis = math.sqrt(2.0) * np.sin(np.pi * np.outer(n, t)) / (np.pi * n[:, None])

    values = np.empty((n_paths, n_steps + 1))
    for blk, start, stop in block_ranges(n_paths, DEFAULT_BLOCK):
        rng = block_rng(seed, blk)
        xi = rng.standard_normal((stop - start, n_modes + 1))
        block = np.outer(xi[:, 0], t)
        block += xi[:, 1:] @ basis
        values[start:stop] = params.sigma * block

    return _ensemble_from_values(values, grid, params, seed,
                                 generator="fourier", n_modes=n_modes)


def _ensemble_from_values(values, grid, params, seed, generator, n_modes=0, pin=None):
    idx = np.argmax(values, axis=1)
    peak = values[np.arange(values.shape[0]), idx]
    return PathEnsemble(
        times=grid.times(),
        close=values[:, -1].copy(),
        high=np.maximum(peak, 0.0),
        low=np.minimum(values.min(axis=1), 0.0),
        argmax=np.where(peak > 0.0, idx, 0).astype(np.int64),
        seed=seed, grid=grid, params=params, values=values,
        generator=generator, n_modes=n_modes, _pin=pin,
    )


def pin_to_close(ensemble, c):
    """Bridge transform: subtract (close - c) * t from every path.

    All summaries are recomputed from the transformed values; the output
    close equals ``c`` exactly.  Requires a value matrix (summaries alone
    cannot be transformed).
    """
    if ensemble.values is None:
        raise DomainError("pin_to_close needs keep_values=True (full value matrix)")
    t = ensemble.times
    target = np.asarray(c, dtype=float)
    values = ensemble.values - np.outer(ensemble.close - target, t)
    values[:, -1] = target
    pin = float(target) if target.ndim == 0 else math.nan
    return _ensemble_from_values(values, ensemble.grid, ensemble.params,
                                 ensemble.seed, generator=ensemble.generator,
                                 n_modes=ensemble.n_modes, pin=pin)
