"""
This module builds the argument parser of the command line and registers
every sub-command with its handler.
"""
import argparse

from commands.estimation_commands import add_band_arguments, add_data_arguments, cmd_band, \
    cmd_fit, cmd_test
from commands.rerun_commands import add_rerun_arguments, cmd_rerun
from commands.simulation_commands import add_simulation_arguments, cmd_simulate
from covariance import __version__


def build_parser():
    """
    Create the parser with the fit, band, test, simulate and rerun sub-commands.

    Returns:
        argparse.ArgumentParser: Each sub-parser sets ``func`` to its handler.
    """
    parser = argparse.ArgumentParser(
        prog="covband",
        description="Stationary covariance estimation with simultaneous confidence bands.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="override COVBAND_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    fit = commands.add_parser("fit", help="spline fits and the mean curve")
    add_data_arguments(fit)
    fit.add_argument("--curves", action="store_true", help="also write every fitted curve")
    fit.set_defaults(func=cmd_fit)

    band = commands.add_parser("band", help="covariance estimate with confidence bands")
    add_data_arguments(band)
    add_band_arguments(band)
    band.add_argument("--envelope", action="store_true",
                      help="write the 2-D confidence envelope for lags within h0")
    band.add_argument("--omega", action="store_true", help="write the Omega_hat diagnostic")
    band.set_defaults(func=cmd_band)

    test = commands.add_parser("test", help="goodness-of-fit test of covariance models")
    add_data_arguments(test)
    add_band_arguments(test)
    test.add_argument("--model", action="append", dest="models", required=True,
                      help="model spec, e.g. matern:sill=2,range=1,nu=3 (repeatable)")
    test.set_defaults(func=cmd_test)

    simulate = commands.add_parser("simulate", help="Monte-Carlo replication study")
    add_simulation_arguments(simulate)
    simulate.set_defaults(func=cmd_simulate)

    rerun = commands.add_parser("rerun", help="replay a run from its manifest")
    add_rerun_arguments(rerun)
    rerun.set_defaults(func=cmd_rerun)
    return parser
