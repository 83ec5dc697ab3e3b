"""
This module defines decorators for the command handlers of the command line.

Decorators:
    handle_command_errors: Turns exceptions into exit codes and one-line messages.
"""

from functools import wraps

from commands.error_handlers import EXIT_OK, handle_project_error, handle_unexpected_error, \
    write_error_document
from covariance.errors import CovbandError
from helpers.logger import logger


def handle_command_errors():
    """
    A decorator to handle exceptions and standardize command exit codes.

    The wrapped command takes the parsed arguments and returns nothing on
    success; the wrapper returns the exit code (0 on success). When the
    arguments name an output directory, a failure also writes ``error.json``
    there.

    Returns:
        Function: The wrapped function with error handling.
    """
    def decorator(func):
        @wraps(func)
        def wrapper(args, *rest, **kwargs):
            try:
                func(args, *rest, **kwargs)
                logger.info(f"Command {func.__name__} finished")
                return EXIT_OK
            except CovbandError as e:
                logger.error(f"Error in {func.__name__}: {str(e)}")
                error, exit_code = e, handle_project_error(e)
            except Exception as e:
                logger.error(f"Error in {func.__name__}: {str(e)}")
                error, exit_code = e, handle_unexpected_error(e)
            out_dir = getattr(args, "out", None)
            if out_dir:
                write_error_document(out_dir, error, exit_code)
            return exit_code
        return wrapper
    return decorator
