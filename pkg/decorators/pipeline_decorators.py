"""
This module provides decorators for the stages of the estimation pipeline.

Decorators:
    stage: Labels a pipeline stage, logs its entry and tags any project error
    raised inside it with the stage name before re-raising.

Usage:
    @stage("fpca")
    def run_fpca_stage(...):
        ...
"""
from functools import wraps

from covariance.errors import CovbandError
from helpers.logger import logger


def stage(label):
    """
    Decorator naming a pipeline stage.

    Errors raised by the wrapped function keep their type; a project error
    without a stage label gets ``label``. Unexpected exceptions are logged and
    re-raised untouched.

    Args:
        label (str): Stage name shown in error messages (e.g. ``knots``, ``band``).

    Returns:
        A wrapped function with stage labelling.
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            logger.debug(f"Entering stage '{label}' ({func.__name__})")
            try:
                return func(*args, **kwargs)
            except CovbandError as e:
                if e.stage is None:
                    e.stage = label
                logger.error(f"Error in stage '{e.stage}' ({func.__name__}): {str(e)}")
                raise e
            except Exception as e:
                logger.error(f"Unexpected error in stage '{label}' ({func.__name__}): {str(e)}")
                raise e

        return wrapper

    return decorator
