"""
This module defines the error handlers of the command line.

Each handler logs the error, prints a one-line message to stderr and returns
the process exit code:

    - project errors: their own exit code (2 usage, 3 data, 4 numerical, 1 other)
    - anything unexpected: 1

A command that fails after its output directory is known also leaves an
``error.json`` document there.
"""
import sys
from pathlib import Path

from helpers.logger import logger
from helpers.output_helpers import create_error_document, write_json

EXIT_OK = 0
EXIT_UNEXPECTED = 1

ERROR_FILE = "error.json"


def handle_project_error(e):
    """
    Handles errors raised by the covariance, simulation and storage code.

    Args:
        e (CovbandError): The error.

    Returns:
        int: The exit code of the error.
    """
    label = f"error[{e.stage}]" if e.stage else "error"
    logger.error(f"{label}: {e}")
    print(f"{label}: {e}", file=sys.stderr)
    for problem in getattr(e, "problems", [])[1:]:
        print(f"  - {problem}", file=sys.stderr)
    return e.exit_code


def handle_unexpected_error(e):
    """
    Handles any other exception.

    Args:
        e (Exception): The error.

    Returns:
        int: EXIT_UNEXPECTED.
    """
    logger.exception(f"Unexpected error: {e}")
    print(f"error: unexpected {type(e).__name__}: {e}", file=sys.stderr)
    return EXIT_UNEXPECTED


def write_error_document(out_dir, e, exit_code):
    """
    Write ``error.json`` describing a failed command into ``out_dir``.

    Returns:
        Path: The document, or None when it could not be written.
    """
    data = {
        "error": type(e).__name__,
        "stage": getattr(e, "stage", None),
        "exit_code": exit_code,
        "problems": list(getattr(e, "problems", [])) or [str(e)],
    }
    try:
        return write_json(Path(out_dir) / ERROR_FILE, create_error_document(str(e), data))
    except OSError as err:
        logger.warning(f"Could not write {ERROR_FILE} to {out_dir}: {err}")
        return None
