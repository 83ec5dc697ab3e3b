"""
Main module of the covband command line.

This module parses the command line, applies the log level and dispatches to
the sub-command handlers in ``commands/``. The process exit code is the
handler's: 0 success, 2 usage error, 3 data error, 4 numerical failure,
1 anything unexpected.

Usage:
    python app.py band data.csv --alpha 0.05 --seed 1 --out results/
"""
import sys

from commands.parser import build_parser
from helpers.logger import set_level


def main(argv=None):
    """
    Run one command.

    Args:
        argv (list, optional): Arguments after the program name; defaults to ``sys.argv[1:]``.

    Returns:
        int: The exit code.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return exit_request.code if isinstance(exit_request.code, int) else 2
    if args.log_level:
        try:
            set_level(args.log_level)
        except ValueError as err:
            parser.print_usage(sys.stderr)
            print(f"error: {err}", file=sys.stderr)
            return 2
    args.argv = argv
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
