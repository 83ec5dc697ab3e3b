"""
This module builds simultaneous and pointwise confidence bands for the
stationary covariance function and tests parametric covariance models
against them.

The critical value Q_{1-alpha} is the (1 - alpha) quantile of
sup_h |zeta(h)| Xi(h)^-1/2, where zeta is the limiting Gaussian process

    zeta(h) = sum_{k<k'} e_kk' {A_kk'(h) + A_k'k(h)} + sum_k e_k A_kk(h) (m4_k - 1)^1/2

simulated with independent standard normals e. The coupling of e_kk' and
e_k'k into a single draw makes the variance of zeta equal the rewritten form
of the asymptotic variance.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from covariance.covest import CovCurve, check_lags, stationary_surface
from covariance.covmodels import eval_model
from covariance.errors import InvalidParameterError, LagRangeError, NumericalError
from covariance.fpca import XI_FLOOR, _unfloored_variance, lag_products
from helpers.logger import logger
from helpers.rng import substream

MIN_ZETA_REPS = 100

# Replicates drawn from one substream; replicate r always lands in block r // ZETA_BLOCK.
ZETA_BLOCK = 1024

GOF_LEVELS = (0.2, 0.1, 0.05, 0.01)

BAND_KINDS = ("simultaneous", "pointwise")


@dataclass(frozen=True)
class BandResult:
    """
    A confidence band C_hat(h) +/- n^-1/2 q Xi(h)^1/2.

    Attributes:
        level (float): Confidence level 1 - alpha.
        q (float): Critical value (Q_{1-alpha} or z_{1-alpha/2}).
        lower (CovCurve): Lower edge.
        upper (CovCurve): Upper edge.
        center (CovCurve): The covariance estimate.
        n (int): Sample size in the n^-1/2 scaling.
        kind (str): simultaneous or pointwise.
    """
    level: float
    q: float
    lower: CovCurve = field(repr=False)
    upper: CovCurve = field(repr=False)
    center: CovCurve = field(repr=False)
    n: int
    kind: str = "simultaneous"

    @property
    def h_grid(self):
        return self.center.h_grid

    @property
    def width(self):
        """Average width over the lag grid."""
        return float(np.mean(self.upper.values - self.lower.values))

    def contains(self, values):
        """True when ``values`` (on the band's lag grid) lie inside the band at every lag."""
        values = np.asarray(values, dtype=float)
        return bool(np.all((values >= self.lower.values) & (values <= self.upper.values)))

    def to_dict(self):
        return {
            "kind": self.kind,
            "level": self.level,
            "q": self.q,
            "n": self.n,
            "width": self.width,
            "h_grid": self.h_grid.tolist(),
            "center": self.center.values.tolist(),
            "lower": self.lower.values.tolist(),
            "upper": self.upper.values.tolist(),
        }


@dataclass(frozen=True)
class GofResult:
    """
    Outcome of testing a parametric covariance model against the band.

    Attributes:
        statistic (float): sup_h sqrt(n) |C_hat(h) - C0(h)| Xi(h)^-1/2.
        p_value (float): Add-one Monte-Carlo p-value.
        reject_at (dict): alpha -> True when the model is rejected at that level.
        model (CovModelSpec): The null model.
        flagged_lags (np.ndarray): Lags excluded from the sup because Xi_hat was floored.
    """
    statistic: float
    p_value: float
    reject_at: dict
    model: object
    flagged_lags: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    def to_dict(self):
        return {
            "model": self.model.to_dict(),
            "model_spec": str(self.model),
            "statistic": self.statistic,
            "p_value": self.p_value,
            "decisions": {f"{alpha:g}": reject for alpha, reject in self.reject_at.items()},
            "flagged_lags": self.flagged_lags.tolist(),
        }


def zeta_loadings(fpca, h_grid, quad_points=None, grams=None):
    """
    Matrix W with zeta(h) = W(h) . e for a standard normal vector e.

    Columns are the pairs k < k' followed by the diagonal terms k.

    Returns:
        np.ndarray: len(h_grid) x (kappa(kappa - 1)/2 + kappa).
    """
    lags = lag_products(fpca, h_grid, quad_points, grams)
    kappa = lags.shape[1]
    rows, cols = np.triu_indices(kappa, k=1)
    pairs = lags[:, rows, cols] + lags[:, cols, rows]
    excess = np.sqrt(np.clip(np.asarray(fpca.fourth_moments, dtype=float) - 1.0, 0.0, None))
    diagonal = np.diagonal(lags, axis1=1, axis2=2) * excess
    return np.concatenate([pairs, diagonal], axis=1)


def simulate_zeta(fpca, h_grid, reps=1000, seed=0, quad_points=None, grams=None):
    """
    Simulate ``reps`` paths of the Gaussian process zeta on ``h_grid``.

    Args:
        fpca (FpcaResult): Completed FPCA with kappa >= 1.
        h_grid (array_like): Lag grid.
        reps (int): Number of replicates, at least 100.
        seed (int or sequence of int): Root entropy.
        quad_points (int, optional): Trapezoid abscissae per lag; defaults to N of the fit.
        grams (np.ndarray, optional): Precomputed lag Gram matrices.

    Returns:
        np.ndarray: reps x len(h_grid) matrix.
    """
    if reps < MIN_ZETA_REPS:
        raise InvalidParameterError(
            f"at least {MIN_ZETA_REPS} zeta replicates are needed, got {reps}")
    if fpca.kappa is None or fpca.kappa < 1:
        raise InvalidParameterError("zeta simulation needs kappa >= 1")
    h_grid = check_lags(h_grid)
    loadings = zeta_loadings(fpca, h_grid, quad_points, grams)
    blocks = []
    for block in range(math.ceil(reps / ZETA_BLOCK)):
        rows = min(ZETA_BLOCK, reps - block * ZETA_BLOCK)
        draws = substream(seed, block).standard_normal((rows, loadings.shape[1]))
        blocks.append(draws @ loadings.T)
    return np.concatenate(blocks, axis=0)


def zeta_variance(fpca, h_grid, quad_points=None, grams=None):
    """
    Closed-form variance of the simulated process:
    sum_k (m4_k - 1)+ A_kk^2 + sum_{k<k'} (A_kk' + A_k'k)^2.
    """
    loadings = zeta_loadings(fpca, check_lags(h_grid), quad_points, grams)
    return np.sum(loadings ** 2, axis=1)


def omega_hat(fpca, c_hat, quad_points=None, grams=None):
    """
    Diagnostic covariance Omega_hat(h, h') of the limiting process.

    Omega(h, h') = sum_{k,k'} A_kk'(h) A_kk'(h') + sum_k (m4_k - 3) A_kk(h) A_kk(h')
                   + C_hat(h) C_hat(h')

    Its diagonal is the unfloored variance function. It is reported only and
    does not enter the band construction.
    """
    lags = lag_products(fpca, c_hat.h_grid, quad_points, grams)
    flat = lags.reshape(lags.shape[0], -1)
    diagonal = np.diagonal(lags, axis1=1, axis2=2)
    fourth = np.asarray(fpca.fourth_moments, dtype=float) - 3.0
    omega = (flat @ flat.T + (diagonal * fourth) @ diagonal.T
             + np.outer(c_hat.values, c_hat.values))
    if not np.allclose(np.diag(omega), _unfloored_variance(fpca, c_hat, lags)):
        logger.warning("Omega_hat diagonal disagrees with the variance function")
    return omega


def _usable_lags(xi):
    usable = xi.values > XI_FLOOR
    if not np.any(usable):
        raise NumericalError("variance function is degenerate at every lag")
    if not np.all(usable):
        logger.warning(f"{int(np.sum(~usable))} lags with floored variance excluded from the sup")
    return usable


def sup_statistics(zeta, xi):
    """Per-replicate maxima M_r = max_h |zeta_r(h)| Xi(h)^-1/2 over usable lags."""
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    if zeta.shape[1] != xi.h_grid.size:
        raise InvalidParameterError(
            f"simulated paths have {zeta.shape[1]} lags but the variance has {xi.h_grid.size}")
    usable = _usable_lags(xi)
    return np.max(np.abs(zeta[:, usable]) / np.sqrt(xi.values[usable]), axis=1)


def critical_value(zeta, xi, alpha):
    """
    Empirical (1 - alpha) quantile of the sup statistics, order statistic ceil((1 - alpha) R).

    Raises:
        InvalidParameterError: If alpha is outside (0, 1).
    """
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    maxima = np.sort(sup_statistics(zeta, xi))
    rank = max(1, math.ceil((1.0 - alpha) * maxima.size - 1e-9))
    return float(maxima[rank - 1])


def _check_grids(c_hat, xi):
    if c_hat.h_grid.shape != xi.h_grid.shape or not np.allclose(c_hat.h_grid, xi.h_grid):
        raise InvalidParameterError("covariance curve and variance function use different lag grids")


def _band(c_hat, xi, q, n, level, kind):
    _check_grids(c_hat, xi)
    if q < 0:
        raise InvalidParameterError(f"critical value must be non-negative, got {q}")
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"sample size must be a positive integer, got {n}")
    half_width = q * np.sqrt(np.clip(xi.values, 0.0, None)) / math.sqrt(n)
    return BandResult(
        level=level,
        q=float(q),
        lower=CovCurve(c_hat.h_grid, c_hat.values - half_width, kind="band_edge"),
        upper=CovCurve(c_hat.h_grid, c_hat.values + half_width, kind="band_edge"),
        center=c_hat,
        n=int(n),
        kind=kind,
    )


def scb(c_hat, xi, q, n, level=None):
    """Simultaneous band C_hat(h) +/- n^-1/2 q Xi_hat(h)^1/2."""
    return _band(c_hat, xi, q, n, level, "simultaneous")


def pointwise_band(c_hat, xi, alpha, n):
    """Pointwise band with z_{1-alpha/2} in place of Q_{1-alpha}."""
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return _band(c_hat, xi, float(norm.ppf(1.0 - alpha / 2.0)), n, 1.0 - alpha, "pointwise")


def sce_surface(band, x_grid):
    """Lower and upper envelope surfaces L(|x - x'|), U(|x - x'|) on ``x_grid``."""
    return stationary_surface(band.lower, x_grid), stationary_surface(band.upper, x_grid)


def gof_test(c_hat, xi, n, model, zeta, lag_scale=1.0, levels=GOF_LEVELS):
    """
    Test H0: C = C0 for a parametric model C0 using the simulated sup statistics.

    Args:
        c_hat (CovCurve): Covariance estimate (unit lags).
        xi (CovCurve): Variance function on the same lags.
        n (int): Number of trajectories.
        model (CovModelSpec): Null model, in original lag units.
        zeta (np.ndarray): Simulated paths from ``simulate_zeta``.
        lag_scale (float): Original-unit length of the unit interval.
        levels (tuple): Significance levels to report decisions for.

    Returns:
        GofResult: Statistic, add-one p-value and decisions.
    """
    _check_grids(c_hat, xi)
    if not lag_scale > 0:
        raise LagRangeError(f"lag scale must be positive, got {lag_scale}")
    null_values = eval_model(model, c_hat.h_grid * lag_scale)
    if np.any(~np.isfinite(null_values)):
        raise LagRangeError(f"model {model} is undefined at some lag of the grid")
    usable = _usable_lags(xi)
    deviation = np.abs(c_hat.values - null_values)[usable] / np.sqrt(xi.values[usable])
    statistic = float(math.sqrt(n) * np.max(deviation))
    maxima = sup_statistics(zeta, xi)
    p_value = (1.0 + np.count_nonzero(maxima >= statistic)) / (maxima.size + 1.0)
    return GofResult(
        statistic=statistic,
        p_value=float(p_value),
        reject_at={alpha: bool(p_value < alpha) for alpha in levels},
        model=model,
        flagged_lags=c_hat.h_grid[~usable],
    )
