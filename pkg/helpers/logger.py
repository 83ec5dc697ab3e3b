"""
This module provides a centralized logging configuration for the application.

The logger writes to a rotating file handler, ensuring that log files do not
grow indefinitely, and mirrors warnings to stderr so command-line users see
them. Messages carry a timestamp. Level and file name are read from the
environment (``COVBAND_LOG_LEVEL``, ``COVBAND_LOG_FILE``), optionally through a
``.env`` file.

Exports:
    logger: A pre-configured logger instance ready for use in other modules.
"""

import logging
import os
from logging.handlers import RotatingFileHandler

from dotenv import load_dotenv

LOGGER_NAME = "covband"


def configure_logger():
    """
    Configures and returns the application logger.

    Returns:
        logging.Logger: Configured logger instance.
    """
    load_dotenv()
    level = getattr(logging, os.getenv("COVBAND_LOG_LEVEL", "WARNING").upper(), logging.WARNING)
    log_file = os.getenv("COVBAND_LOG_FILE", "covband.log")

    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)

    formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s', datefmt='%Y-%m-%d %H:%M:%S'
    )

    if not logger.handlers:  # Avoid duplicate handlers
        file_handler = RotatingFileHandler(log_file, maxBytes=10000, backupCount=1, delay=True)
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

        stream_handler = logging.StreamHandler()
        stream_handler.setLevel(max(level, logging.WARNING))
        stream_handler.setFormatter(formatter)
        logger.addHandler(stream_handler)

    return logger


def set_level(level_name):
    """Change the level of the logger and all of its handlers."""
    level = getattr(logging, str(level_name).upper(), None)
    if not isinstance(level, int):
        raise ValueError(f"unknown log level '{level_name}'")
    logger.setLevel(level)
    for handler in logger.handlers:
        if isinstance(handler, RotatingFileHandler):
            handler.setLevel(level)
        else:
            handler.setLevel(max(level, logging.WARNING))


# Export the logger for use in other modules
logger = configure_logger()
