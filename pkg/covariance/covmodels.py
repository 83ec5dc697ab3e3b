"""
This module defines the parametric stationary covariance families used for
simulation and goodness-of-fit testing:

    - spherical (M1): sill * {1 - 1.5 h/range + 0.5 (h/range)^3} for h <= range, else 0
    - matern (M2):    sill * 2^(1-nu) / Gamma(nu) * u^nu K_nu(u),  u = 2 sqrt(nu) h / range
    - gaussian (M3):  sill * exp(-h^2 / range^2)

It also provides the effective range, Gaussian-process sampling on a grid,
and parsing of model specifications such as ``matern:sill=2,range=1,nu=3``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize, special

from covariance.errors import FactorizationError, InvalidParameterError, ModelSpecError
from helpers.logger import logger
from helpers.rng import substream

FAMILIES = ("spherical", "matern", "gaussian")

JITTER_START = 1e-10
JITTER_RETRIES = 3


@dataclass(frozen=True)
class CovModelSpec:
    """
    A parametric covariance model.

    Attributes:
        family (str): spherical, matern or gaussian.
        sill (float): Variance C(0) > 0.
        range (float): Range parameter theta > 0, in lag units.
        smoothness (float): Matern nu > 0; None for the other families.
    """
    family: str
    sill: float
    range: float
    smoothness: float = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelSpecError(
                f"unknown covariance family '{self.family}'; expected one of {', '.join(FAMILIES)}")
        if not self.sill > 0:
            raise ModelSpecError(f"sill must be positive, got {self.sill}")
        if not self.range > 0:
            raise ModelSpecError(f"range must be positive, got {self.range}")
        if self.family == "matern":
            if self.smoothness is None or not self.smoothness > 0:
                raise ModelSpecError("matern model needs a positive smoothness nu")
        elif self.smoothness is not None:
            raise ModelSpecError(f"smoothness nu only applies to the matern family, not {self.family}")

    def to_dict(self):
        result = {"family": self.family, "sill": self.sill, "range": self.range}
        if self.smoothness is not None:
            result["nu"] = self.smoothness
        return result

    def __str__(self):
        params = f"sill={self.sill:g},range={self.range:g}"
        if self.smoothness is not None:
            params += f",nu={self.smoothness:g}"
        return f"{self.family}:{params}"


_PARAMETER_NAMES = {"sill": "sill", "range": "range", "nu": "smoothness"}


def parse_model_spec(text):
    """
    Parse ``family:key=value,...`` into a CovModelSpec.

    Raises:
        ModelSpecError: Naming the offending token.
    """
    family, sep, params = str(text).strip().partition(":")
    family = family.strip().lower()
    if not sep:
        raise ModelSpecError(f"model spec '{text}' must look like 'family:sill=...,range=...'")
    if family not in FAMILIES:
        raise ModelSpecError(f"unknown covariance family '{family}' in '{text}'")

    values = {}
    for token in filter(None, (t.strip() for t in params.split(","))):
        key, eq, raw = token.partition("=")
        key = key.strip().lower()
        if not eq or key not in _PARAMETER_NAMES:
            raise ModelSpecError(f"bad token '{token}' in model spec '{text}'")
        if _PARAMETER_NAMES[key] in values:
            raise ModelSpecError(f"duplicate token '{token}' in model spec '{text}'")
        try:
            values[_PARAMETER_NAMES[key]] = float(raw)
        except ValueError as err:
            raise ModelSpecError(f"bad token '{token}' in model spec '{text}'") from err

    missing = [name for name in ("sill", "range") if name not in values]
    if missing:
        raise ModelSpecError(f"model spec '{text}' is missing {', '.join(missing)}")
    return CovModelSpec(family=family, **values)


def bessel_k(nu, x):
    """
    Modified Bessel function of the second kind K_nu(x).

    Raises:
        InvalidParameterError: If x <= 0 or nu <= 0.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise InvalidParameterError("K_nu(x) is only defined here for x > 0")
    if not nu > 0:
        raise InvalidParameterError(f"order nu must be positive, got {nu}")
    result = special.kv(nu, x)
    return float(result) if result.ndim == 0 else result


def _matern(spec, h):
    nu = spec.smoothness
    values = np.full(h.shape, spec.sill)
    positive = h > 0
    u = 2.0 * np.sqrt(nu) * h[positive] / spec.range
    # kve(nu, u) = K_nu(u) e^u keeps large u from underflowing before the product
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        computed = (spec.sill * 2.0 ** (1.0 - nu) / special.gamma(nu)
                    * u ** nu * special.kve(nu, u) * np.exp(-u))
    # u so small that u^nu underflows: the h -> 0 limit
    values[positive] = np.where(np.isfinite(computed), computed, spec.sill)
    return values


def eval_model(spec, h):
    """
    Evaluate the covariance model at lag(s) ``h`` >= 0.

    Returns:
        float or np.ndarray: C(h), same shape as ``h``.
    """
    h_array = np.asarray(h, dtype=float)
    if np.any(~np.isfinite(h_array)) or np.any(h_array < 0):
        raise InvalidParameterError("covariance lags must be finite and non-negative")
    ratio = h_array / spec.range
    if spec.family == "spherical":
        values = np.where(ratio <= 1.0, spec.sill * (1.0 - 1.5 * ratio + 0.5 * ratio ** 3), 0.0)
    elif spec.family == "gaussian":
        values = spec.sill * np.exp(-ratio ** 2)
    else:
        values = _matern(spec, np.atleast_1d(h_array)).reshape(h_array.shape)
    return float(values) if np.ndim(values) == 0 else values


def correlation(spec, h):
    """rho(h) = C(h) / C(0)."""
    return eval_model(spec, h) / spec.sill


def effective_range(spec, rho0=0.05):
    """
    The lag s at which the correlation falls to ``rho0``.

    Solved by bisection to 1e-12 in lag; rho0 = 1 returns 0.
    """
    if not 0 < rho0 <= 1:
        raise InvalidParameterError(f"rho0 must lie in (0, 1], got {rho0}")
    if rho0 == 1:
        return 0.0
    upper = spec.range
    while correlation(spec, upper) > rho0:
        upper *= 2.0
    return optimize.bisect(lambda h: correlation(spec, h) - rho0, 0.0, upper, xtol=1e-12)


def covariance_matrix(spec, grid):
    """Sigma_{jj'} = C(|x_j - x_j'|)."""
    grid = np.asarray(grid, dtype=float)
    return eval_model(spec, np.abs(grid[:, None] - grid[None, :]))


def _cholesky_with_jitter(sigma, scale):
    try:
        return linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError:
        pass
    jitter = JITTER_START * scale
    for attempt in range(JITTER_RETRIES + 1):
        logger.warning(f"Cholesky failed; retrying with jitter {jitter:.1e} (attempt {attempt + 1})")
        try:
            return linalg.cholesky(sigma + jitter * np.eye(sigma.shape[0]), lower=True)
        except linalg.LinAlgError:
            jitter *= 10.0
    raise FactorizationError(
        f"covariance matrix is not positive definite even with jitter {jitter / 10.0:.1e}")


def sample_gp(spec, grid, n, seed):
    """
    Draw n zero-mean Gaussian-process paths on ``grid``.

    Subject i uses the substream derived from (seed, i), so the draw for a
    subject does not depend on how many subjects are requested.

    Args:
        spec (CovModelSpec): Covariance model.
        grid (array_like): Strictly increasing abscissae in model units.
        n (int): Number of paths, n >= 1.
        seed (int or sequence of int): Root entropy.

    Returns:
        np.ndarray: n x len(grid) matrix.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("GP grid must be a non-empty strictly increasing vector")
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"number of GP paths must be >= 1, got {n}")
    lower = _cholesky_with_jitter(covariance_matrix(spec, grid), spec.sill)
    draws = np.stack([substream(seed, i).standard_normal(grid.size) for i in range(int(n))])
    return draws @ lower.T
