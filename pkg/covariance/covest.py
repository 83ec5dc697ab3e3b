"""
This module implements the two-stage covariance estimator for dense
functional data.

Each trajectory is smoothed by least-squares B-splines, the spline mean is
subtracted, and the stationary covariance C(h) is estimated by integrating
lagged products of the residual curves:

    C_hat(h) = (1 - h)^-1 * int_0^{1-h} n^-1 sum_i Z_i(x) Z_i(x + h) dx

All integrals use the composite trapezoid rule on equally spaced abscissae
of [0, 1 - h]. Because residuals are splines, the integrand is written as
B(x)^T beta B(x + h), and the lag Gram matrices int B(x) B(x + h)^T are
shared by the covariance curve and the FPC lag integrals.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from covariance.bspline import basis_matrix, design_matrix, lsq_fit
from covariance.errors import DataError, InvalidParameterError, LagRangeError

CURVE_KINDS = ("C_hat", "C_tilde", "Xi_hat", "model", "band_edge")

DEFAULT_H0 = 0.5


@dataclass(frozen=True)
class FunctionalDataset:
    """
    n trajectories observed on the regular grid j/N, j = 1..N.

    Attributes:
        Y (np.ndarray): n x N observation matrix.
        domain (tuple, optional): Original-unit interval (a, b) mapped affinely onto [0, 1].
    """
    Y: np.ndarray = field(repr=False)
    domain: tuple = None

    def __post_init__(self):
        y_matrix = np.asarray(self.Y, dtype=float)
        if y_matrix.ndim != 2:
            raise DataError("observations must form an n x N matrix")
        if np.any(~np.isfinite(y_matrix)):
            row, col = np.argwhere(~np.isfinite(y_matrix))[0]
            raise DataError(f"missing or non-finite value at row {row + 1}, column {col + 1}")
        if y_matrix.shape[0] < 2:
            raise DataError(f"need at least 2 trajectories, got {y_matrix.shape[0]}")
        if y_matrix.shape[1] < 2:
            raise DataError(f"need at least 2 grid points, got {y_matrix.shape[1]}")
        if self.domain is not None:
            low, high = (float(v) for v in self.domain)
            if not high > low:
                raise DataError(f"domain must satisfy a < b, got ({low}, {high})")
            object.__setattr__(self, "domain", (low, high))
        object.__setattr__(self, "Y", y_matrix)

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def N(self):
        return self.Y.shape[1]

    @property
    def grid(self):
        """Unit grid 1/N, ..., 1."""
        return np.arange(1, self.N + 1) / self.N

    @property
    def lag_scale(self):
        """Length of the original domain; unit lags times this give original-unit lags."""
        if self.domain is None:
            return 1.0
        return self.domain[1] - self.domain[0]

    @property
    def original_grid(self):
        low = 0.0 if self.domain is None else self.domain[0]
        return low + self.grid * self.lag_scale


@dataclass(frozen=True)
class TrajectoryFits:
    """
    Spline coefficients of the fitted trajectories, their mean and the residuals.

    Attributes:
        basis (SplineBasis): Shared basis.
        coeffs (np.ndarray): n x (J_s + p), row i fits trajectory i.
        mean_coeffs (np.ndarray): Coefficients of the mean curve.
        resid_coeffs (np.ndarray): n x (J_s + p), coefficients of Z_i = eta_i - m.
        grid_size (int, optional): N of the grid the fits came from.
    """
    basis: object
    coeffs: np.ndarray = field(repr=False)
    mean_coeffs: np.ndarray = field(repr=False)
    resid_coeffs: np.ndarray = field(repr=False)
    grid_size: int = None

    @property
    def n(self):
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class CovCurve:
    """
    A function of the lag sampled on an increasing grid starting at 0.

    Attributes:
        h_grid (np.ndarray): Lags in [0, h0], h0 < 1 (unit scale).
        values (np.ndarray): Function values at the lags.
        kind (str): One of C_hat, C_tilde, Xi_hat, model, band_edge.
    """
    h_grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    kind: str = "C_hat"

    def __post_init__(self):
        h_grid = check_lags(self.h_grid)
        values = np.asarray(self.values, dtype=float)
        if h_grid[0] != 0.0:
            raise InvalidParameterError("lag grid must start at 0")
        if values.shape != h_grid.shape:
            raise InvalidParameterError(
                f"{values.size} values given for a lag grid of {h_grid.size} points")
        if self.kind not in CURVE_KINDS:
            raise InvalidParameterError(f"unknown curve kind '{self.kind}'")
        object.__setattr__(self, "h_grid", h_grid)
        object.__setattr__(self, "values", values)

    @property
    def h0(self):
        return float(self.h_grid[-1])

    def at(self, lags):
        """Linear interpolation of the curve at ``lags`` (all within [0, h0])."""
        lags = np.asarray(lags, dtype=float)
        if np.any(lags < 0) or np.any(lags > self.h0 + 1e-12):
            raise LagRangeError(
                f"lag {float(np.max(lags)):.6g} outside the estimated range [0, {self.h0:.6g}]")
        return np.interp(lags, self.h_grid, self.values)


@dataclass(frozen=True)
class CovSurface:
    """
    The spline covariance surface G(x, x') = B(x)^T beta B(x').

    Attributes:
        basis (SplineBasis): Shared basis.
        beta (np.ndarray): Symmetric (J_s + p) x (J_s + p) coefficient matrix.
    """
    basis: object
    beta: np.ndarray = field(repr=False)

    def evaluate(self, x, x_prime=None):
        """Matrix of G(x_j, x'_k) for the given abscissae."""
        left = basis_matrix(self.basis, x)
        right = left if x_prime is None else basis_matrix(self.basis, x_prime)
        return left @ self.beta @ right.T


def check_lags(h_grid):
    """Validate a lag grid: 1-D, non-empty, increasing, within [0, 1)."""
    h_grid = np.atleast_1d(np.asarray(h_grid, dtype=float))
    if h_grid.ndim != 1 or h_grid.size == 0:
        raise InvalidParameterError("lag grid must be a non-empty 1-D array")
    if np.any(h_grid < 0):
        raise InvalidParameterError("lags must be non-negative")
    if np.any(h_grid >= 1):
        raise InvalidParameterError(f"lags must be < 1, got {float(h_grid.max())}")
    if np.any(np.diff(h_grid) <= 0):
        raise InvalidParameterError("lag grid must be strictly increasing")
    return h_grid


def default_h_grid(n_points, h0=DEFAULT_H0):
    """Lags 0, 1/N, ..., floor(h0 N)/N aligned with the observation grid."""
    if not 0 < h0 < 1:
        raise InvalidParameterError(f"h0 must lie in (0, 1), got {h0}")
    return np.arange(int(np.floor(h0 * n_points + 1e-9)) + 1) / n_points


def _quadrature_nodes(h, quad_points):
    return np.linspace(0.0, 1.0 - h, quad_points)


def _check_quad_points(quad_points):
    if int(quad_points) != quad_points or quad_points < 2:
        raise InvalidParameterError(f"quad_points must be an integer >= 2, got {quad_points}")
    return int(quad_points)


def lag_gram(basis, h_grid, quad_points):
    """
    Lag Gram matrices M(h)_{st} = (1 - h)^-1 int_0^{1-h} B_s(x) B_t(x + h) dx.

    Returns:
        np.ndarray: Array of shape (len(h_grid), J_s + p, J_s + p).
    """
    h_grid = check_lags(h_grid)
    quad_points = _check_quad_points(quad_points)
    grams = np.empty((h_grid.size, basis.dimension, basis.dimension))
    for index, h in enumerate(h_grid):
        x = _quadrature_nodes(h, quad_points)
        left = basis_matrix(basis, x)
        right = basis_matrix(basis, x + h)
        grams[index] = trapezoid(left[:, :, None] * right[:, None, :], x, axis=0) / (1.0 - h)
    return grams


def fit_trajectories(data, basis):
    """
    Fit every trajectory by least squares and split into mean and residuals.

    Args:
        data (FunctionalDataset): The observations.
        basis (SplineBasis): Shared spline basis.

    Returns:
        TrajectoryFits: Coefficients of eta_i, m and Z_i.
    """
    design = design_matrix(basis, data.N)
    coeffs = lsq_fit(design, data.Y)
    mean_coeffs = coeffs.mean(axis=0)
    return TrajectoryFits(
        basis=basis,
        coeffs=coeffs,
        mean_coeffs=mean_coeffs,
        resid_coeffs=coeffs - mean_coeffs,
        grid_size=data.N,
    )


def eval_fit(fits, which, x_grid, index=None):
    """
    Evaluate a stored spline.

    Args:
        fits (TrajectoryFits): The fits.
        which (str): 'trajectory', 'mean' or 'residual'.
        x_grid (array_like): Abscissae in [0, 1].
        index (int, optional): Trajectory index (0-based) for 'trajectory' and 'residual'.

    Returns:
        np.ndarray: Values at ``x_grid``.
    """
    if which == "mean":
        coef = fits.mean_coeffs
    elif which in ("trajectory", "residual"):
        if index is None or not 0 <= index < fits.n:
            raise InvalidParameterError(
                f"trajectory index {index} out of range for {fits.n} trajectories")
        coef = fits.coeffs[index] if which == "trajectory" else fits.resid_coeffs[index]
    else:
        raise InvalidParameterError(
            f"unknown curve '{which}'; expected trajectory, mean or residual")
    return basis_matrix(fits.basis, x_grid) @ coef


def covariance_surface(fits):
    """beta = n^-1 sum_i a_i a_i^T over residual coefficient vectors a_i."""
    resid = fits.resid_coeffs
    beta = resid.T @ resid / resid.shape[0]
    return CovSurface(basis=fits.basis, beta=(beta + beta.T) / 2.0)


def covariance_curve(fits, h_grid, quad_points=None, grams=None):
    """
    The two-stage estimator C_hat(h) on ``h_grid``.

    Args:
        fits (TrajectoryFits): Residual splines.
        h_grid (array_like): Lags in [0, h0], h0 < 1.
        quad_points (int, optional): Trapezoid abscissae per lag; defaults to the
            grid size N of the fits.
        grams (np.ndarray, optional): Precomputed ``lag_gram`` output for the same grid.

    Returns:
        CovCurve: kind 'C_hat'.
    """
    h_grid = check_lags(h_grid)
    if grams is None:
        quad_points = quad_points or fits.grid_size
        if quad_points is None:
            raise InvalidParameterError("quad_points is needed when the grid size is unknown")
        grams = lag_gram(fits.basis, h_grid, quad_points)
    beta = covariance_surface(fits).beta
    values = np.einsum("st,hst->h", beta, grams)
    return CovCurve(h_grid=h_grid, values=values, kind="C_hat")


def _interpolation_weights(n_points, x):
    """Piecewise-linear interpolation on the grid j/N, extended linearly on [0, 1/N)."""
    position = np.asarray(x, dtype=float) * n_points
    left = np.clip(np.floor(position).astype(int), 1, n_points - 1)
    weight = position - left
    return left - 1, weight


def interpolate_grid_values(values, x):
    """Evaluate rows of ``values`` (given on j/N) at ``x`` by linear interpolation."""
    values = np.atleast_2d(values)
    left, weight = _interpolation_weights(values.shape[1], x)
    return values[:, left] * (1.0 - weight) + values[:, left + 1] * weight


def oracle_covariance(z_matrix, h_grid, quad_points=None):
    """
    The infeasible estimator C_tilde(h) from the true latent curves.

    Args:
        z_matrix (array_like): n x N true Z_i(j/N), extended piecewise linearly.
        h_grid (array_like): Lags in [0, h0].
        quad_points (int, optional): Trapezoid abscissae per lag; defaults to N.

    Returns:
        CovCurve: kind 'C_tilde'.
    """
    z_matrix = np.atleast_2d(np.asarray(z_matrix, dtype=float))
    h_grid = check_lags(h_grid)
    if z_matrix.shape[1] < 2:
        raise InvalidParameterError("latent curves need at least 2 grid points")
    quad_points = _check_quad_points(quad_points or z_matrix.shape[1])
    values = np.empty(h_grid.size)
    for index, h in enumerate(h_grid):
        x = _quadrature_nodes(h, quad_points)
        products = interpolate_grid_values(z_matrix, x) * interpolate_grid_values(z_matrix, x + h)
        values[index] = trapezoid(products.mean(axis=0), x) / (1.0 - h)
    return CovCurve(h_grid=h_grid, values=values, kind="C_tilde")


def stationary_surface(curve, x_grid):
    """
    The stationary surface G(x, x') = C(|x - x'|) on ``x_grid`` x ``x_grid``.

    Raises:
        LagRangeError: If some |x - x'| exceeds the curve's h0.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    lags = np.abs(x_grid[:, None] - x_grid[None, :])
    return curve.at(lags)
