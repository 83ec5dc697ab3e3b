"""
Decorators for replicate-store methods.

Decorators:
    transactional: Commits a store write, or rolls it back and reports the
    database failure as a StorageError.
    requires_run: Resolves the run key argument of a store method to its
    SimulationRun row.
"""
from functools import wraps

from sqlalchemy import select
from sqlalchemy.exc import SQLAlchemyError

from covariance.errors import StorageError
from datamanager.models import SimulationRun
from helpers.logger import logger


def transactional(session):
    """
    Run a store method inside a transaction on ``session``.

    Database errors are rolled back and re-raised as ``StorageError``; any
    other exception is rolled back and propagates unchanged.

    Args:
        session: The SQLAlchemy (scoped) session.
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                result = func(*args, **kwargs)
                session.commit()
            except SQLAlchemyError as e:
                session.rollback()
                logger.error(f"Database error in {func.__name__}: {e}")
                raise StorageError(f"replicate store failed in {func.__name__}: {e}",
                                   stage="store") from e
            except Exception:
                session.rollback()
                logger.debug(f"Rolled back {func.__name__}")
                raise
            return result

        return wrapper

    return decorator


def requires_run(session, missing=None):
    """
    Look up the run named by a method's ``run_key`` argument.

    The wrapped method is called as ``func(self, run, *args, **kwargs)`` with
    the SimulationRun row in place of the key.

    Args:
        session: The SQLAlchemy (scoped) session.
        missing (callable): Produces the return value for an unknown run.
            When None, an unknown run raises KeyError.
    """

    def decorator(func):
        @wraps(func)
        def wrapper(self, run_key, *args, **kwargs):
            run = session.execute(
                select(SimulationRun).filter_by(run_key=run_key)
            ).scalar_one_or_none()
            if run is None:
                if missing is None:
                    raise KeyError(f"run {run_key[:12]} is not registered")
                return missing()
            return func(self, run, *args, **kwargs)

        return wrapper

    return decorator
