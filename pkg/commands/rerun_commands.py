"""
This module defines the ``rerun`` command, which replays the command line
recorded in a run manifest. Outputs are deterministic functions of the
recorded arguments and inputs, so a replay reproduces them byte for byte.
Relative paths in the manifest resolve against the current directory.
"""
from commands.manifest import load_manifest
from covariance.errors import InvalidParameterError
from decorators.command_decorators import handle_command_errors
from helpers.logger import logger


def add_rerun_arguments(parser):
    parser.add_argument("manifest", help="manifest.json written by an earlier run")


@handle_command_errors()
def cmd_rerun(args):
    """Replay the recorded command; its errors surface with their own exit codes."""
    from commands.parser import build_parser  # the parser registers this command

    manifest = load_manifest(args.manifest)
    argv = [str(arg) for arg in manifest["argv"]]
    try:
        replay = build_parser().parse_args(argv)
    except SystemExit as err:
        raise InvalidParameterError(
            f"manifest {args.manifest} records an invalid command line") from err
    if replay.command == "rerun":
        raise InvalidParameterError(f"manifest {args.manifest} records another rerun")
    logger.info(f"Replaying: {' '.join(argv)}")
    replay.argv = argv
    replay.func.__wrapped__(replay)
