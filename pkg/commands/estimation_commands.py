"""
This module defines the estimation commands of the command line:

    fit    spline fits and the mean curve
    band   covariance estimate with simultaneous and pointwise bands
    test   goodness-of-fit tests of parametric covariance models

Every command writes its files into ``--out`` together with a run manifest.
"""
from pathlib import Path

import numpy as np

from commands.manifest import RunManifest
from covariance.band import gof_test, omega_hat, sce_surface
from covariance.bspline import KNOT_METHODS
from covariance.covest import eval_fit
from covariance.covmodels import parse_model_spec
from covariance.fpca import XI_FLOOR
from covariance.pipeline import PipelineSettings, choose_basis, estimate, fit_stage
from datamanager.dataset_loader import load_dataset, parse_domain
from decorators.command_decorators import handle_command_errors
from helpers.logger import logger
from helpers.output_helpers import create_success_document, write_columns, write_json, \
    write_matrix


def knots_argument(text):
    """--knots accepts a method name or a fixed number of interior knots."""
    text = text.strip().lower()
    if text.isdigit():
        return int(text)
    if text not in KNOT_METHODS:
        raise ValueError(text)
    return text


def add_data_arguments(parser):
    parser.add_argument("input", help="CSV file, one row per subject")
    location = parser.add_mutually_exclusive_group()
    location.add_argument("--grid-header", action="store_true",
                          help="first row is the observation grid in original units")
    location.add_argument("--domain", type=parse_domain, metavar="A,B",
                          help="original domain of the grid")
    parser.add_argument("--out", default="covband_output", help="output directory")
    parser.add_argument("--order", type=int, default=4, help="spline order p (default 4, cubic)")
    parser.add_argument("--knots", type=knots_argument, default="formula",
                        help="formula, gcv, bic or a fixed number of interior knots")
    parser.add_argument("--knot-c", type=float, default=0.8)
    parser.add_argument("--knot-gamma", type=float, default=0.375)


def add_band_arguments(parser):
    parser.add_argument("--h0", type=float, default=0.5, help="largest lag on the unit scale")
    parser.add_argument("--alpha", type=float, action="append", dest="alphas",
                        help="significance level; repeat for several (default 0.05 and 0.01)")
    parser.add_argument("--reps", type=int, default=1000, help="simulated zeta paths")
    parser.add_argument("--seed", type=int, default=0, help="root seed of the zeta simulation")
    parser.add_argument("--fve", type=float, default=0.95,
                        help="fraction of variance explained selecting kappa")
    parser.add_argument("--quad-points", type=int, default=None,
                        help="trapezoid abscissae per lag (default N)")


def settings_from_args(args):
    """PipelineSettings from parsed flags; all problems are reported together."""
    values = {"order": args.order, "knots": args.knots, "knot_c": args.knot_c,
              "knot_gamma": args.knot_gamma}
    if hasattr(args, "h0"):
        values.update(h0=args.h0, fve=args.fve, zeta_reps=args.reps,
                      alphas=tuple(args.alphas or (0.05, 0.01)), quad_points=args.quad_points)
    return PipelineSettings(**values)


def _load(args, manifest):
    data = load_dataset(args.input, grid_header=args.grid_header, domain=args.domain)
    manifest.add_input(args.input)
    return data


def _data_summary(data, basis):
    return {
        "n": data.n,
        "N": data.N,
        "domain": list(data.domain) if data.domain else None,
        "lag_scale": data.lag_scale,
        "order": basis.order,
        "interior_knots": basis.interior_knots,
        "knots": basis.knots,
    }


def _new_manifest(args, command):
    return RunManifest(command=command, argv=list(getattr(args, "argv", [])))


@handle_command_errors()
def cmd_fit(args):
    """
    Fit every trajectory and write the mean curve (and optionally every fitted curve).

    Outputs: fit.json, mean.csv, curves.csv (with --curves), manifest.json.
    """
    manifest = _new_manifest(args, "fit")
    settings = settings_from_args(args)
    data = _load(args, manifest)
    basis = choose_basis(data, settings)
    fits = fit_stage(data, basis)
    out = Path(args.out)

    mean = eval_fit(fits, "mean", data.grid)
    manifest.add_output(write_columns(out / "mean.csv", {
        "x": data.grid, "x_original": data.original_grid, "mean": mean}))
    if args.curves:
        curves = np.stack([eval_fit(fits, "trajectory", data.grid, i) for i in range(data.n)])
        manifest.add_output(write_matrix(out / "curves.csv", curves))
    summary = _data_summary(data, basis)
    summary["mean_coeffs"] = fits.mean_coeffs
    manifest.add_output(write_json(out / "fit.json", create_success_document(
        f"fitted {data.n} curves with {basis.dimension} basis functions", summary)))

    manifest.config = {"settings": settings.to_dict(), "grid_header": args.grid_header,
                       "domain": args.domain, "curves": args.curves}
    manifest.write(out)


def _band_outputs(result, args, manifest):
    out = Path(args.out)
    data = result.data
    h_grid = result.h_grid
    columns = {"h": h_grid, "h_original": h_grid * data.lag_scale,
               "C_hat": result.c_hat.values, "Xi_hat": result.xi.values}
    bands = []
    for alpha, (simultaneous, pointwise) in result.bands.items():
        label = f"{100 * (1 - alpha):g}"
        columns[f"lower_{label}"] = simultaneous.lower.values
        columns[f"upper_{label}"] = simultaneous.upper.values
        columns[f"pointwise_lower_{label}"] = pointwise.lower.values
        columns[f"pointwise_upper_{label}"] = pointwise.upper.values
        bands.extend([simultaneous.to_dict(), pointwise.to_dict()])
    manifest.add_output(write_columns(out / "band.csv", columns))

    summary = _data_summary(data, result.basis)
    summary.update({
        "kappa": result.kappa,
        "lambdas": result.fpca.lambdas[:result.kappa],
        "fourth_moments": result.fpca.fourth_moments,
        "h_grid": h_grid,
        "h_original": h_grid * data.lag_scale,
        "Xi_hat": result.xi.values,
        "flagged_lags": h_grid[result.xi.values <= XI_FLOOR],
        "critical_values": {f"{a:g}": q for a, q in result.critical_values().items()},
        "bands": bands,
    })
    manifest.add_output(write_json(out / "band.json", create_success_document(
        f"covariance bands at levels {', '.join(f'{1 - a:g}' for a in result.bands)}", summary)))

    if args.envelope:
        # pairs (x, x') on the grid whose lag stays within h0
        points = data.grid[:len(h_grid)]
        for alpha, (simultaneous, _) in result.bands.items():
            lower, upper = sce_surface(simultaneous, points)
            label = f"{100 * (1 - alpha):g}"
            manifest.add_output(write_matrix(out / f"envelope_{label}_lower.csv", lower))
            manifest.add_output(write_matrix(out / f"envelope_{label}_upper.csv", upper))
    if args.omega:
        manifest.add_output(write_matrix(
            out / "omega.csv", omega_hat(result.fpca, result.c_hat, grams=result.grams)))


@handle_command_errors()
def cmd_band(args):
    """
    Estimate C(h) and its simultaneous and pointwise bands.

    Outputs: band.json, band.csv, envelope_*.csv (with --envelope), omega.csv (with --omega),
    manifest.json.
    """
    manifest = _new_manifest(args, "band")
    settings = settings_from_args(args)
    data = _load(args, manifest)
    result = estimate(data, settings, seed=args.seed)
    _band_outputs(result, args, manifest)
    manifest.config = {"settings": settings.to_dict(), "grid_header": args.grid_header,
                       "domain": args.domain, "envelope": args.envelope, "omega": args.omega}
    manifest.seed = args.seed
    manifest.write(args.out)


@handle_command_errors()
def cmd_test(args):
    """
    Test each ``--model`` against the band of the data.

    Model lags are in original units; unit lags are converted with the data's lag scale.

    Outputs: test.json, manifest.json.
    """
    manifest = _new_manifest(args, "test")
    models = [parse_model_spec(text) for text in args.models]
    settings = settings_from_args(args)
    data = _load(args, manifest)
    result = estimate(data, settings, seed=args.seed)

    tests = []
    for model in models:
        outcome = gof_test(result.c_hat, result.xi, data.n, model, result.zeta,
                           lag_scale=data.lag_scale)
        logger.info(f"{model}: T={outcome.statistic:.4g}, p={outcome.p_value:.4g}")
        tests.append(outcome.to_dict())
    summary = _data_summary(data, result.basis)
    summary.update({
        "kappa": result.kappa,
        "zeta_reps": settings.zeta_reps,
        "lag_range": [0.0, result.c_hat.h0 * data.lag_scale],
        "tests": tests,
    })
    path = write_json(Path(args.out) / "test.json", create_success_document(
        f"tested {len(models)} covariance model(s)", summary))
    manifest.add_output(path)
    manifest.config = {"settings": settings.to_dict(), "grid_header": args.grid_header,
                       "domain": args.domain, "models": [str(m) for m in models]}
    manifest.seed = args.seed
    manifest.write(args.out)
