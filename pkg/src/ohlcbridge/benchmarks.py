"""Backend benchmark: compiled kernels vs the NumPy reference.

Run as ``python -m ohlcbridge.benchmarks``.  Times the two hot loops of
the Monte Carlo driver on a representative block and prints the speedup.
The numbers are the justification for carrying a compiled extension at
all; if the ratio ever drops near 1, drop the extension instead.
"""

import argparse
import time

import numpy as np

from ._speed import _ref

try:
    from ._speed import _fast
except ImportError:
    _fast = None


def _time(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(n_paths=8192, n_steps=1530, n_record=101, n_bins=320, repeats=5):
    rng = np.random.Generator(np.random.Philox(key=[1234, 0]))
    inc = rng.standard_normal((n_paths, n_steps)) * (1.0 / np.sqrt(n_steps))
    record = np.linspace(1, n_steps, n_record).round().astype(np.int64)
    record = np.unique(record)
    bins = rng.integers(0, n_bins, n_paths)

    rows = []
    for label, mod in (("python", _ref), ("cython", _fast)):
        if mod is None:
            rows.append((label, None, None))
            continue
        high = np.empty(n_paths)
        low = np.empty(n_paths)
        close = np.empty(n_paths)
        argmax = np.empty(n_paths, dtype=np.int64)
        samples = np.empty((n_paths, record.shape[0]))
        walk = _time(lambda: mod.walk_block(inc, record, high, low, close,
                                            argmax, samples), repeats)
        counts = np.zeros(n_bins)
        sums = np.zeros((n_bins, record.shape[0]))
        sumsqs = np.zeros((n_bins, record.shape[0]))
        acc = _time(lambda: mod.accumulate_bins(samples, bins, counts, sums,
                                                sumsqs), repeats)
        rows.append((label, walk, acc))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=8192)
    ap.add_argument("--steps", type=int, default=1530)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)

    rows = run(n_paths=args.paths, n_steps=args.steps, repeats=args.repeats)
    print(f"block: {args.paths} paths x {args.steps} steps")
    print(f"{'backend':<8} {'walk_block':>12} {'accumulate_bins':>16}")
    base = {}
    for label, walk, acc in rows:
        if walk is None:
            print(f"{label:<8} {'(extension not built)':>12}")
            continue
        base.setdefault("walk", walk)
        base.setdefault("acc", acc)
        print(f"{label:<8} {walk * 1e3:>10.1f}ms {acc * 1e3:>14.2f}ms")
    if rows[-1][1] is not None and len(rows) == 2:
        print(f"speedup  {base['walk'] / rows[1][1]:>11.1f}x "
              f"{base['acc'] / rows[1][2]:>15.1f}x")


if __name__ == "__main__":
    main()
