"""
Environment-level settings, read from the process environment or a ``.env`` file.

    COVBAND_WORKERS   default number of worker processes for ``simulate``
    COVBAND_STORE     default SQLite file of the replicate store (unset: no store)

Logging variables (``COVBAND_LOG_LEVEL``, ``COVBAND_LOG_FILE``) are read by
``helpers.logger``.
"""
import os

from dotenv import load_dotenv

from covariance.errors import InvalidParameterError


def default_workers():
    """
    Worker count from ``COVBAND_WORKERS``, else the number of CPUs.

    Raises:
        InvalidParameterError: If the variable is not a positive integer.
    """
    load_dotenv()
    raw = os.getenv("COVBAND_WORKERS")
    if raw is None or not raw.strip():
        return os.cpu_count() or 1
    try:
        workers = int(raw)
    except ValueError as err:
        raise InvalidParameterError(f"COVBAND_WORKERS must be an integer, got '{raw}'") from err
    if workers < 1:
        raise InvalidParameterError(f"COVBAND_WORKERS must be at least 1, got {workers}")
    return workers


def default_store_path():
    """Replicate store path from ``COVBAND_STORE``, or None when unset."""
    load_dotenv()
    raw = os.getenv("COVBAND_STORE")
    return raw.strip() if raw and raw.strip() else None
