"""Monte Carlo machinery: ensembles, binning, empirical curves, comparison."""

from .binning import BinGrid, build_bins
from .compare import BinReference, CurveComparison, bin_reference, compare_to_analytic
from .experiments import (
    VARIANCE_TARGETS,
    ConditioningRow,
    empirical_range_density,
    variance_by_conditioning,
)
from .paths import (
    GridSpec,
    PathEnsemble,
    bar_statistics,
    block_rng,
    fourier_paths,
    generate_paths,
    load_summaries,
    pin_to_close,
)
from .report import (
    EnsembleVarianceReport,
    empirical_curves,
    empirical_curves_multi,
    report_times,
)

__all__ = [
    "BinGrid",
    "ConditioningRow",
    "VARIANCE_TARGETS",
    "CurveComparison",
    "EnsembleVarianceReport",
    "GridSpec",
    "PathEnsemble",
    "bar_statistics",
    "block_rng",
    "build_bins",
    "BinReference",
    "bin_reference",
    "compare_to_analytic",
    "empirical_curves",
    "empirical_curves_multi",
    "empirical_range_density",
    "fourier_paths",
    "generate_paths",
    "load_summaries",
    "pin_to_close",
    "report_times",
    "variance_by_conditioning",
]
