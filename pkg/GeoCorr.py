#!/usr/bin/env python
"""Main script for extremal correlation computations.

This script computes the minimum (and maximum) attainable correlation
between two Geometric random variables, together with the analytic bounds,
the parameters where the minimum correlation has derivative kinks and a set
of independent cross-checks. Scans over the parameter are independent for
every grid point and are spread across processes.

Example:

    For script usage details use::

        $ ./GeoCorr.py --help

    Alternatively you can import this module for use within your custom
    pipeline::

        from GeoCorr import compute_report, scan, params

Every probability argument accepts decimal (``0.25``) as well as fraction
(``1/4``) literals; both are read exactly, which is what enables the
``--exact`` output.
"""


import argparse
import json
import logging
import math
import multiprocessing as mpi
import os
import sys
from fractions import Fraction
from pathlib import Path

import psutil
import tqdm
import numpy as np
import pandas as pd

from geocorr.exceptions import BudgetExceeded, DomainError
from geocorr.analytic import bound_pair, enumerate_kinks, slope_jump, \
    slope_noise
from geocorr.extremal import grid_denominator, max_corr, min_corr, \
    min_corr_equal_closed, min_corr_exact, std_product_exact
from geocorr.oracle import Coupling, correlation_estimate, \
    mean_product_series, quad_mean_product, sample_pairs
from geocorr.analytic.kinks import default_options as kinks_options
from geocorr.extremal.engine import default_options as extremal_options
from geocorr.extremal.exact import default_options as exact_options
from geocorr.oracle.quadrature import default_options as quadrature_options
from geocorr.oracle.sampling import default_options as sampling_options


logger = logging.getLogger("GeoCorr")

params = {
    "j": 0,
    "config": Path("./geocorr_config.json"),
    "format": "csv",
    "out": None,
    "at": [],
    "quiet": False,
    "verbose": False,
    "exact": False,
    "json": False,
    "seed": 42,
    "coupling": "countermonotone",
}
"""dict: default values for the command line options

The parameters in question are:
    * ``j``: Number of worker processes, 0 uses every physical core (capped
      by the ``GEO_EXTREMAL_THREADS`` environment variable).
    * ``config``: JSON file overriding the library tunables, ignored when it
      does not exist.
    * ``format``: Output format of ``scan``, ``csv`` or ``json``.
    * ``out``: Output file of ``scan``, standard output when ``None``.
    * ``at``: Extra parameters evaluated by ``scan`` on top of the grid.
    * ``quiet``: Only warnings are logged and progress bars are hidden.
    * ``verbose``: Debug logging.
    * ``exact``: ``compute`` also reports exact rational values.
    * ``json``: ``compute`` prints a JSON object instead of text.
    * ``seed``: Seed of the Monte Carlo streams.
    * ``coupling``: Coupling used by ``sample``.
"""

config_sections = {
    "extremal": extremal_options,
    "exact": exact_options,
    "kinks": kinks_options,
    "quadrature": quadrature_options,
    "sampling": sampling_options,
}
"""dict: sections of the JSON configuration and the option dicts they
update"""

FLOAT_FORMAT = "%.15g"
SCAN_COLUMNS = ["p", "rho_min", "bound_lower", "bound_upper", "n_breakpoints"]
THREADS_VARIABLE = "GEO_EXTREMAL_THREADS"

EXIT_DISAGREEMENT = 1
EXIT_USAGE = 2
EXIT_OUTPUT = 3


def load_json(path):
    """Reads a configuration file, returning ``{}`` if it does not exist.

    Raises:
        DomainError: if the file is not valid JSON
    """
    path = Path(path)
    if not path.is_file():
        return {}
    with open(path, "r") as file:
        try:
            return json.load(file)
        except json.JSONDecodeError as err:
            raise DomainError(f"--config: {path} is not valid JSON: "
                              f"{err}") from err


def apply_config(config):
    """Updates the library ``default_options`` dicts from a configuration.

    Raises:
        DomainError: on an unknown section or option
    """
    for section, options in config.items():
        if section not in config_sections:
            raise DomainError(f"unknown configuration section {section!r}")
        target = config_sections[section]
        unknown = set(options) - set(target)
        if unknown:
            raise DomainError(f"unknown {section} options: "
                              f"{', '.join(sorted(unknown))}")
        target.update(options)


def n_workers(j=0):
    """Worker count: `j` if given, else the physical cores, capped by the
    ``GEO_EXTREMAL_THREADS`` environment variable."""
    n = j if j > 0 else (psutil.cpu_count(logical=False) or 1)
    cap = os.environ.get(THREADS_VARIABLE)
    if cap:
        try:
            cap = int(cap)
        except ValueError:
            raise DomainError(f"{THREADS_VARIABLE} must be an integer, "
                              f"got {cap!r}") from None
        n = min(n, max(cap, 1))
    return n


def probability(text):
    """``argparse`` type for decimal or fraction probability literals."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(
            f"not a decimal or fraction literal: {text!r}") from None
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(
            f"probability must lie in (0, 1], got {text!r}")
    return value


def positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return value


def sample_count(text):
    """``argparse`` type accepting ``1000000``, ``1e6`` or ``10^6``."""
    text = text.strip()
    try:
        if "^" in text:
            base, exponent = text.split("^")
            value = int(base) ** int(exponent)
        else:
            value = float(text)
            if value != int(value):
                raise ValueError
            value = int(value)
    except (ValueError, OverflowError):
        raise argparse.ArgumentTypeError(
            f"not an integer sample count: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return value


def format_value(x):
    """The single decimal rendering used for every emitted float."""
    return FLOAT_FORMAT % x


def format_fraction(value, denominator=1):
    """Writes `value` over `denominator` when that is exact (``442/256``
    rather than ``221/128``), reduced otherwise."""
    if denominator > 1 and (value * denominator).denominator == 1:
        return f"{value * denominator}/{denominator}"
    return str(value)


def compute_report(p1, p2, exact=False):
    """Collects everything ``compute`` prints for one parameter pair.

    Args:
        p1 (Fraction): parameter of ``X1``
        p2 (Fraction): parameter of ``X2``
        exact (bool): attach the exact rational mean product and correlation

    Return:
        dict with the report fields, in print order

    Raises:
        DegenerateMarginal: if either parameter equals 1
    """
    lo = min_corr(float(p1), float(p2))
    hi = max_corr(float(p1), float(p2))
    bounds = bound_pair(float(p1), float(p2))
    report = {
        "p1": str(p1),
        "p2": str(p2),
        "rho_min": lo.rho,
        "rho_max": hi.rho,
        "e_xy": lo.e_xy,
        "covariance": lo.covariance,
        "bound_lower": bounds.lower,
        "bound_upper": bounds.upper,
        "n_breakpoints": lo.n_breakpoints,
        "path": lo.path.value,
    }
    if not exact:
        return report
    try:
        result = min_corr_exact(p1, p2)
    except BudgetExceeded as err:
        logger.warning("exact evaluation skipped: %s", err)
        return report
    denominator = grid_denominator(p1, p2)
    report["e_xy_exact"] = format_fraction(result.e_xy_exact, denominator)
    if result.rho_exact is not None:
        scale = std_product_exact(p1, p2)
        report["rho_min_exact"] = format_fraction(
            result.rho_exact, denominator * scale.numerator)
    return report


def cmd_compute(args):
    report = compute_report(args.p1, args.p2, exact=args.exact)
    if args.json:
        print(json.dumps(report, indent=2))
        return 0
    exact = {"e_xy": report.pop("e_xy_exact", None),
             "rho_min": report.pop("rho_min_exact", None)}
    for key, value in report.items():
        if isinstance(value, float):
            value = format_value(value)
            if exact.get(key):
                value = f"{exact[key]} ({value})"
        print(f"{key} = {value}")
    return 0


def scan_grid(p_min, p_max, step, at=()):
    """Ascending parameters ``p_min + k step`` up to `p_max`, plus `at`."""
    p_min, p_max = float(p_min), float(p_max)
    if not 0 < p_min < p_max < 1:
        raise DomainError(f"scan needs 0 < p_min < p_max < 1, got "
                          f"p_min={p_min!r}, p_max={p_max!r}")
    n = int(math.floor((p_max - p_min) / step + 1e-9))
    grid = np.round(p_min + step * np.arange(n + 1), 12)
    extra = np.array([float(p) for p in at if 0 < p < 1], dtype=float)
    return np.unique(np.concatenate([grid, extra]))


def scan_row(p):
    """One output row of ``scan``, evaluated at ``p1 = p2 = p``."""
    result = min_corr(p, p)
    bounds = bound_pair(p, p)
    return {"p": p, "rho_min": result.rho, "bound_lower": bounds.lower,
            "bound_upper": bounds.upper,
            "n_breakpoints": result.n_breakpoints}


def scan(p_min, p_max, step, at=(), j=0, quiet=False, config=None, **kwargs):
    """Evaluates the minimum correlation and its bounds along the diagonal.

    Rows are computed by a pool of `j` workers and collected in ascending
    ``p`` whatever order they finish in.

    Args:
        p_min (float): first grid point
        p_max (float): last grid point (inclusive when on the grid)
        step (float): grid spacing
        at (list): extra parameters to evaluate
        j (int): number of worker processes, see :func:`n_workers`
        quiet (bool): suppresses the ``tqdm`` progress bar
        config (dict): configuration forwarded to the workers

    Return:
        ``pd.DataFrame`` with the columns of ``SCAN_COLUMNS``
    """
    grid = scan_grid(p_min, p_max, step, at)
    workers = min(n_workers(j), len(grid))
    logger.info("scanning %d parameters with %d workers", len(grid), workers)
    bar = tqdm.tqdm(total=len(grid), desc="Scanned parameters", ncols=79,
                    file=sys.stderr, disable=quiet)
    rows = []
    if workers > 1:
        with mpi.Pool(workers, initializer=apply_config,
                      initargs=(config or {},)) as pool:
            for row in pool.imap(scan_row, grid, chunksize=16):
                rows.append(row)
                bar.update(1)
    else:
        for p in grid:
            rows.append(scan_row(p))
            bar.update(1)
    bar.close()
    df = pd.DataFrame(rows, columns=SCAN_COLUMNS)
    df["n_breakpoints"] = df["n_breakpoints"].astype(np.int64)
    return df


def write_scan(df, out=None, fmt="csv"):
    """Writes scan rows as CSV (``\\n`` line endings) or a JSON array."""
    if fmt == "json":
        text = df.to_json(orient="records", double_precision=15)
    else:
        text = df.to_csv(index=False, float_format=FLOAT_FORMAT,
                         lineterminator="\n")
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w", newline="") as file:
            file.write(text)


def cmd_scan(args):
    df = scan(args.p_min, args.p_max, args.step, at=args.at, j=args.j,
              quiet=args.quiet, config=args.config_data)
    write_scan(df, args.out, args.format)
    return 0


def kink_table(p_min):
    """Enumerated kinks with their measured slope jump and the slope noise
    next to them.

    Return:
        ``pd.DataFrame`` with columns ``i, c, x, p, slope_jump, noise``
    """
    rows = []
    for kink in enumerate_kinks(p_min):
        rows.append({"i": kink.i, "c": kink.c, "x": kink.x, "p": kink.p,
                     "slope_jump": slope_jump(kink.p),
                     "noise": slope_noise(kink.p)})
    return pd.DataFrame(rows, columns=["i", "c", "x", "p", "slope_jump",
                                       "noise"])


def cmd_kinks(args):
    df = kink_table(float(args.p_min))
    sys.stdout.write(df.to_csv(index=False, float_format=FLOAT_FORMAT,
                               lineterminator="\n"))
    return 0


verify_tolerances = {
    "closed_form": 1e-10,
    "exact": 1e-12,
    "quadrature": 1e-9,
    "series": 1e-9,
    "bounds": 1e-12,
    "mc_se": 4.0,
    "mc_min_nonzero": 30,
    "series_max_terms": 10**7,
}
"""dict: agreement tolerances used by ``verify``

The keys represent:
    * ``closed_form``: engine vs equal-parameter closed form, on ``rho``
    * ``exact``: engine vs rational evaluation, relative, on ``E[X1 X2]``
    * ``quadrature``, ``series``: engine vs the deterministic oracles, on
      ``E[X1 X2]``
    * ``bounds``: slack of the bound sandwich
    * ``mc_se``: Monte Carlo agreement in standard errors
    * ``mc_min_nonzero``: fewer nonzero sampled values than this in either
      marginal skips the Monte Carlo checks
    * ``series_max_terms``: the joint-tail series is skipped above this
      table size
"""


def _check(name, value, reference, diff, tol, passed):
    return {"check": name, "value": value, "reference": reference,
            "diff": diff, "tol": tol, "status": "pass" if passed else "fail"}


def _skip(name, reason):
    logger.info("%s skipped: %s", name, reason)
    return {"check": name, "value": math.nan, "reference": math.nan,
            "diff": math.nan, "tol": math.nan, "status": "skip"}


def verify(p1, p2, n, seed, j=1):
    """Runs every computation path and compares them pairwise.

    Args:
        p1 (Fraction): parameter of ``X1``
        p2 (Fraction): parameter of ``X2``
        n (int): Monte Carlo sample size, at least 1000
        seed (int): Monte Carlo seed
        j (int): worker processes for the sampling shards

    Return:
        ``pd.DataFrame`` with one row per check and a ``status`` column
        holding ``pass``, ``fail`` or ``skip``
    """
    tol = verify_tolerances
    f1, f2 = float(p1), float(p2)
    engine = min_corr(f1, f2)
    checks = []

    if p1 == p2:
        closed = min_corr_equal_closed(f1)
        diff = abs(closed.rho - engine.rho)
        checks.append(_check("closed form rho", closed.rho, engine.rho, diff,
                             tol["closed_form"], diff <= tol["closed_form"]))
    else:
        checks.append(_skip("closed form rho", "unequal parameters"))

    try:
        exact = min_corr_exact(p1, p2)
        diff = abs(float(exact.e_xy_exact) - engine.e_xy)
        limit = tol["exact"] * max(abs(engine.e_xy), 1.0)
        checks.append(_check("exact e_xy", float(exact.e_xy_exact),
                             engine.e_xy, diff, tol["exact"], diff <= limit))
    except BudgetExceeded as err:
        checks.append(_skip("exact e_xy", str(err)))

    quad = quad_mean_product(f1, f2)
    diff = abs(quad - engine.e_xy)
    checks.append(_check("quadrature e_xy", quad, engine.e_xy, diff,
                         tol["quadrature"], diff <= tol["quadrature"]))

    if engine.n_breakpoints ** 2 / 4 <= tol["series_max_terms"]:
        series = mean_product_series(f1, f2, Coupling.COUNTERMONOTONE)
        diff = abs(series - engine.e_xy)
        checks.append(_check("series e_xy", series, engine.e_xy, diff,
                             tol["series"], diff <= tol["series"]))
    else:
        checks.append(_skip("series e_xy", "table too large"))

    bounds = bound_pair(f1, f2)
    inside = bounds.contains(engine.rho, slack=tol["bounds"])
    checks.append(_check("bound sandwich", engine.rho, bounds.lower,
                         max(bounds.lower - engine.rho,
                             engine.rho - bounds.upper, 0.0),
                         tol["bounds"], inside))

    checks.extend(_verify_mc(f1, f2, n, seed, engine, j))
    return pd.DataFrame(checks, columns=["check", "value", "reference",
                                         "diff", "tol", "status"])


def _verify_mc(f1, f2, n, seed, engine, j):
    tol = verify_tolerances
    estimates = {}
    for coupling in Coupling:
        pairs = sample_pairs(f1, f2, n, seed, coupling, workers=j)
        nonzero = np.count_nonzero(pairs, axis=0)
        if nonzero.min() < tol["mc_min_nonzero"]:
            reason = f"only {nonzero.min()} nonzero sampled values"
            return [_skip("mc countermonotone rho", reason),
                    _skip("mc comonotone rho", reason),
                    _skip("mc coupling order", reason)]
        estimates[coupling] = correlation_estimate(pairs[:, 0], pairs[:, 1],
                                                   n, seed)

    checks = []
    comonotone = max_corr(f1, f2)
    for coupling, result in ((Coupling.COUNTERMONOTONE, engine),
                             (Coupling.COMONOTONE, comonotone)):
        est = estimates[coupling]
        diff = abs(est.mean - result.rho)
        limit = tol["mc_se"] * est.std_error + 1e-12
        checks.append(_check(f"mc {coupling.value} rho", est.mean,
                             result.rho, diff, limit, diff <= limit))

    lo = estimates[Coupling.COUNTERMONOTONE]
    mid = estimates[Coupling.INDEPENDENT]
    hi = estimates[Coupling.COMONOTONE]
    se_lo = math.hypot(lo.std_error, mid.std_error)
    se_hi = math.hypot(mid.std_error, hi.std_error)
    slack = tol["mc_se"] * max(se_lo, se_hi) + 1e-12
    ordered = (lo.mean <= mid.mean + tol["mc_se"] * se_lo + 1e-12
               and mid.mean <= hi.mean + tol["mc_se"] * se_hi + 1e-12)
    checks.append(_check("mc coupling order", mid.mean, lo.mean,
                         max(lo.mean - mid.mean, mid.mean - hi.mean, 0.0),
                         slack, ordered))
    return checks


def cmd_verify(args):
    if args.n < sampling_options["min_samples"]:
        raise DomainError(f"n: Monte Carlo checks need n >= "
                          f"{sampling_options['min_samples']}")
    df = verify(args.p1, args.p2, args.n, args.seed, j=n_workers(args.j))
    sys.stdout.write(df.to_string(index=False, float_format=format_value))
    sys.stdout.write("\n")
    failed = df[df["status"] == "fail"]
    if len(failed):
        logger.error("%d checks disagree: %s", len(failed),
                     ", ".join(failed["check"]))
        return EXIT_DISAGREEMENT
    return 0


def cmd_sample(args):
    coupling = Coupling.parse(args.coupling)
    pairs = sample_pairs(float(args.p1), float(args.p2), args.n, args.seed,
                         coupling, workers=n_workers(args.j))
    np.savetxt(sys.stdout, pairs, fmt="%d", delimiter=",")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        description="Extremal correlations of Geometric marginals")
    parser.add_argument("--config", action="store", type=Path,
                        default=params["config"], help="path to the json "
                        "configuration file overriding library tunables")
    parser.add_argument("-j", action="store", default=params["j"], type=int,
                        help="number of parallel processes")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    parser.add_argument("-Q", "--quiet", action="store_true",
                        help="log warnings only and hide progress bars")
    subparsers = parser.add_subparsers(dest="command", required=True)

    compute = subparsers.add_parser("compute", help="minimum and maximum "
                                    "correlation of one parameter pair")
    compute.add_argument("p1", type=probability, help="parameter of X1")
    compute.add_argument("p2", type=probability, help="parameter of X2")
    compute.add_argument("--exact", action="store_true",
                         help="add exact rational values")
    compute.add_argument("--json", action="store_true",
                         help="print a JSON object")
    compute.set_defaults(func=cmd_compute)

    scan_parser = subparsers.add_parser("scan", help="minimum correlation "
                                        "and bounds along p1 = p2 = p")
    scan_parser.add_argument("p_min", type=probability, help="first p")
    scan_parser.add_argument("p_max", type=probability, help="last p")
    scan_parser.add_argument("step", type=positive_float, help="grid step")
    scan_parser.add_argument("--out", action="store", type=Path,
                             default=params["out"], help="output file, "
                             "standard output if omitted")
    scan_parser.add_argument("--format", action="store", default="csv",
                             choices=["csv", "json"], help="output format")
    scan_parser.add_argument("--at", nargs="+", type=probability,
                             default=params["at"], help="extra parameters "
                             "to evaluate")
    scan_parser.set_defaults(func=cmd_scan)

    kinks = subparsers.add_parser("kinks", help="derivative kinks of the "
                                  "minimum correlation down to p_min")
    kinks.add_argument("p_min", type=probability, help="smallest p")
    kinks.set_defaults(func=cmd_kinks)

    verify_parser = subparsers.add_parser("verify", help="cross-check every "
                                          "computation path")
    verify_parser.add_argument("p1", type=probability, help="parameter of X1")
    verify_parser.add_argument("p2", type=probability, help="parameter of X2")
    verify_parser.add_argument("n", type=sample_count,
                               help="Monte Carlo sample size")
    verify_parser.add_argument("seed", type=int, help="Monte Carlo seed")
    verify_parser.set_defaults(func=cmd_verify)

    sample = subparsers.add_parser("sample", help="print coupled pairs")
    sample.add_argument("p1", type=probability, help="parameter of X1")
    sample.add_argument("p2", type=probability, help="parameter of X2")
    sample.add_argument("n", type=sample_count, help="number of pairs")
    sample.add_argument("seed", type=int, help="seed")
    sample.add_argument("coupling", nargs="?", default=params["coupling"],
                        help="countermonotone, comonotone or independent")
    sample.set_defaults(func=cmd_sample)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        args.config_data = load_json(args.config)
        apply_config(args.config_data)
        return args.func(args)
    except DomainError as err:
        print(f"{parser.prog} {args.command}: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"{parser.prog} {args.command}: error: cannot write output: "
              f"{err}", file=sys.stderr)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
