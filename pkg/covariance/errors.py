"""
This module defines the exception hierarchy used across the covariance package.

Every error may carry a ``stage`` label naming the pipeline stage that raised it
(set by the ``stage`` decorator), and maps to a process exit code:

    - InvalidParameterError and subclasses: 2 (usage error)
    - DataError and subclasses: 3 (data error)
    - NumericalError and subclasses: 4 (numerical failure)
    - anything else, StorageError included: 1
"""


class CovbandError(Exception):
    """Base class for all errors raised by this project."""

    exit_code = 1

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class InvalidParameterError(CovbandError, ValueError):
    """An argument or setting is outside its admissible range."""

    exit_code = 2


class ModelSpecError(InvalidParameterError):
    """A covariance model specification string could not be parsed."""


class LagRangeError(InvalidParameterError):
    """A requested lag lies outside the estimated range [0, h0]."""


class ConfigError(InvalidParameterError):
    """One or more configuration problems; all of them are kept in ``problems``."""

    def __init__(self, problems, stage=None):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems), stage=stage)


class DataError(CovbandError, ValueError):
    """Input data is malformed (ragged rows, non-numeric cells, missing values)."""

    exit_code = 3


class UnderdeterminedDesignError(DataError):
    """The grid has fewer points than the spline basis has functions."""


class NumericalError(CovbandError, ArithmeticError):
    """A numerical procedure failed."""

    exit_code = 4


class SingularDesignError(NumericalError):
    """The spline design matrix is rank deficient."""


class FactorizationError(NumericalError):
    """A Cholesky factorization failed even after the allowed jitter."""


class SimulationAbortedError(NumericalError):
    """Too many Monte-Carlo replicates failed."""


class StorageError(CovbandError):
    """The replicate store could not be read or written."""
