"""Command-line surface.

Subcommands: ``interpolate`` (bars -> conditional curves), ``simulate``
(ensemble -> empirical report), ``verify`` (analytic/oracle suites),
``feller`` (range-density table), ``variances`` (time-averaged ensemble
variance by conditioning set).  Exit codes: 0 success, 1 usage, 2 data
error, 3 numeric verification failure.
"""

import argparse
import json
import sys

import numpy as np

from .errors import DataError, OhlcBridgeError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser():
    p = _Parser(prog="ohlcbridge",
                description="Conditioned-diffusion interpolation of OHLC bars")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pi = sub.add_parser("interpolate", help="per-bar conditional curves")
    pi.add_argument("--input", required=True, help="CSV of bars")
    pi.add_argument("--format", default="auto",
                    help="'auto' or column list, e.g. 'date,open,high,low,close'")
    pi.add_argument("--method", choices=("bridge", "ch", "chl"), default="chl")
    pi.add_argument("--sigma", choices=("const", "gk", "ml"), default="gk")
    pi.add_argument("--grid", type=int, default=101, help="time points per bar")
    pi.add_argument("--voltime", metavar="FILE",
                    help="two-column (t, tau) volatility clock")
    pi.add_argument("--output", help="write here instead of stdout")
    pi.add_argument("--emit", choices=("csv", "json"), default="csv")
    pi.add_argument("--strict", action="store_true",
                    help="reject OHLC ordering violations instead of clamping")

    ps = sub.add_parser("simulate", help="ensemble generation and empirical curves")
    ps.add_argument("--paths", type=int, default=200_000)
    ps.add_argument("--steps", type=int, default=1000)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--bins", type=int, default=160)
    ps.add_argument("--alpha", type=float, default=0.72)
    ps.add_argument("--condition", choices=("close", "high", "ch", "hl", "chl"),
                    default="close")
    ps.add_argument("--output", help="per-bin curve CSV")

    pv = sub.add_parser("verify", help="analytic and statistical self-checks")
    pv.add_argument("--level", choices=("quick", "full"), default="quick")

    pf = sub.add_parser("feller", help="range-density table")
    pf.add_argument("--xmin", type=float, default=0.005)
    pf.add_argument("--xmax", type=float, default=4.0)
    pf.add_argument("--points", type=int, default=100)
    pf.add_argument("--tolerance", type=float, default=1e-10)
    pf.add_argument("--paths", type=int, default=0,
                    help="overlay an empirical range histogram from this many paths")
    pf.add_argument("--steps", type=int, default=2000)
    pf.add_argument("--seed", type=int, default=0)
    pf.add_argument("--output")

    pt = sub.add_parser("variances", help="time-averaged variance by conditioning set")
    pt.add_argument("--paths", type=int, default=2_000_000)
    pt.add_argument("--steps", type=int, default=1530)
    pt.add_argument("--bins", default="320,40,25",
                    help="per-dimension bin counts for 1-D,2-D,3-D conditionings")
    pt.add_argument("--alpha", type=float, default=0.72)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--workers", type=int, default=1)
    pt.add_argument("--output", help="write per-conditioning curves CSV prefix")
    return p


CONDITIONS = {
    "close": ("close",),
    "high": ("high",),
    "ch": ("close", "high"),
    "hl": ("high", "low"),
    "chl": ("close", "high", "low"),
}


def _write(text, output):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_interpolate(args):
    from .bars import ingest
    from .interpolate import emit_results, interpolate_bars
    from .volatility import VolTimeMap

    bars = ingest(args.input, args.format, mode="strict" if args.strict else "lenient")
    vol_time = None
    if args.voltime:
        try:
            table = np.loadtxt(args.voltime, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot load volatility clock {args.voltime}: {exc}")
        if table.shape[1] != 2:
            raise DataError(f"{args.voltime}: expected two columns (t, tau)")
        try:
            vol_time = VolTimeMap(times=table[:, 0], tau=table[:, 1])
        except OhlcBridgeError as exc:
            raise DataError(f"invalid volatility clock {args.voltime}: {exc}")
    results = interpolate_bars(bars, method=args.method, sigma=args.sigma,
                               grid=args.grid, vol_time=vol_time)
    _write(emit_results(results, kind=args.emit), args.output)
    failed = [r for r in results if not r.ok]
    if failed:
        sys.stderr.write(f"{len(failed)} of {len(results)} bars failed; "
                         "see annotations\n")
    return EXIT_OK


def _cmd_simulate(args):
    from .mc import build_bins, empirical_curves, generate_paths

    dims = CONDITIONS[args.condition]
    ens = generate_paths(args.paths, args.steps, seed=args.seed)
    grid = build_bins(ens, dims, args.bins, alpha=args.alpha)
    report = empirical_curves(ens, grid)
    line = (f"condition={args.condition} paths={args.paths} steps={args.steps} "
            f"bins={grid.nbins} time_averaged_variance="
            f"{report.time_averaged_variance():.6g}\n")
    sys.stdout.write(line)
    if args.output:
        report.to_csv(args.output)
    return EXIT_OK


def _cmd_verify(args):
    from .verify import run_checks

    results = run_checks(args.level)
    width = max(len(name) for name, _, _ in results)
    failures = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        failures += not ok
        sys.stdout.write(f"{status}  {name:<{width}}  {detail}\n")
    sys.stdout.write(f"{len(results) - failures}/{len(results)} checks passed\n")
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


def _cmd_feller(args):
    from .extrema import feller_range_evaluation
    from .params import SeriesControl

    if not 0.0 < args.xmin < args.xmax:
        raise DataError("need 0 < xmin < xmax")
    ctrl = SeriesControl(max_terms=100_000, tail_tolerance=args.tolerance)
    xs = np.linspace(args.xmin, args.xmax, args.points)
    rows = [feller_range_evaluation(float(x), ctrl) for x in xs]
    empirical = None
    if args.paths:
        from .mc import generate_paths
        from .mc.experiments import empirical_range_density

        ens = generate_paths(args.paths, args.steps, seed=args.seed)
        empirical = empirical_range_density(ens, xs)
    lines = ["x,density,terms" + (",empirical" if empirical is not None else "")]
    for i, (x, ev) in enumerate(zip(xs, rows)):
        line = f"{x:.12g},{ev.value:.12g},{ev.terms_used}"
        if empirical is not None:
            line += f",{empirical[i]:.12g}"
        lines.append(line)
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_variances(args):
    from .mc.experiments import variance_by_conditioning

    try:
        bins_by_dim = tuple(int(b) for b in args.bins.split(","))
        if len(bins_by_dim) != 3:
            raise ValueError
    except ValueError:
        raise DataError(f"--bins wants three comma-separated ints, got {args.bins!r}")
    rows = variance_by_conditioning(args.paths, args.steps, seed=args.seed,
                                    bins_by_dim=bins_by_dim, alpha=args.alpha,
                                    workers=args.workers)
    sys.stdout.write(f"{'conditioning':<18} {'bins':<12} {'variance':>9} "
                     f"{'target':>8} {'dev':>8}\n")
    for row in rows:
        bins = "x".join(str(b) for b in row.nbins)
        sys.stdout.write(f"{row.label:<18} {bins:<12} {row.time_averaged:>9.5f} "
                         f"{row.target:>8.5f} {row.deviation:>+8.5f}\n")
        if args.output:
            row.report.to_csv(f"{args.output}.{row.label.replace('+', '_')}.csv")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {
        "interpolate": _cmd_interpolate,
        "simulate": _cmd_simulate,
        "verify": _cmd_verify,
        "feller": _cmd_feller,
        "variances": _cmd_variances,
    }[args.command]
    try:
        return handler(args)
    except DataError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return EXIT_DATA
    except OhlcBridgeError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
