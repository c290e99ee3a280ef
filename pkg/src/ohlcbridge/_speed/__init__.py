"""Hot-loop backend selection.

The Monte Carlo driver spends essentially all of its time in two loops:
walking cumulative paths while tracking running extremes, and scattering
per-path samples into binned moment accumulators.  Both exist as a
compiled extension and as a pure-NumPy reference; the fastest available
one is picked at import.  Set ``OHLCBRIDGE_FORCE_PYTHON=1`` to insist on
the reference implementation (the benchmark suite and the fallback tests
do this).
"""

import os

from . import _ref

if os.environ.get("OHLCBRIDGE_FORCE_PYTHON"):
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _fast as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _ref
        BACKEND = "python"

walk_block = _impl.walk_block
accumulate_bins = _impl.accumulate_bins

__all__ = ["BACKEND", "walk_block", "accumulate_bins", "_ref"]
