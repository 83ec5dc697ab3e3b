"""
This module provides clamped B-spline bases on [0, 1] with equally spaced
interior knots, the design matrix of spline regression on the grid j/N,
penalty-free least-squares fitting, and selection of the number of interior
knots by formula, GCV or BIC.

Classes:
    SplineBasis: order, interior knot count and the full clamped knot vector.
    DesignMatrix: basis functions evaluated on the observation grid.

Functions:
    make_basis, eval_basis, design_matrix, lsq_fit, fitted_values,
    gcv_score, bic_score, knot_formula, select_knots
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.interpolate import BSpline

from covariance.errors import (
    InvalidParameterError, SingularDesignError, UnderdeterminedDesignError)
from helpers.logger import logger

# Abscissae within this distance of [0, 1] are clipped onto it (round-off in x + h).
BOUNDARY_TOL = 1e-12

# Above this Gram condition number the fit switches to a QR solve.
GRAM_CONDITION_LIMIT = 1e10

KNOT_METHODS = ("formula", "gcv", "bic")


@dataclass(frozen=True)
class SplineBasis:
    """
    A clamped B-spline basis on [0, 1].

    Attributes:
        order (int): Spline order p (degree p - 1).
        interior_knots (int): Number J_s of equally spaced interior knots.
        knots (np.ndarray): Knot vector of length J_s + 2p.
    """
    order: int
    interior_knots: int
    knots: np.ndarray = field(repr=False)

    @property
    def degree(self):
        return self.order - 1

    @property
    def dimension(self):
        """Number of basis functions, J_s + p."""
        return self.interior_knots + self.order


@dataclass(frozen=True)
class DesignMatrix:
    """
    Basis functions evaluated on the grid x_j = j/N, j = 1..N.

    Attributes:
        basis (SplineBasis): The basis the columns belong to.
        grid (np.ndarray): The N evaluation abscissae.
        matrix (np.ndarray): N x (J_s + p) array of B_l(x_j).
    """
    basis: SplineBasis
    grid: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)

    @property
    def rows(self):
        return self.matrix.shape[0]

    @property
    def cols(self):
        return self.matrix.shape[1]


def make_basis(p, interior_knots):
    """
    Build the clamped uniform knot vector of order p with J_s interior knots.

    Args:
        p (int): Spline order, p >= 1.
        interior_knots (int): Number of interior knots J_s >= 0.

    Returns:
        SplineBasis: Basis with knots p x 0, l/(J_s+1) for l = 1..J_s, p x 1.

    Raises:
        InvalidParameterError: If p < 1 or J_s < 0.
    """
    if int(p) != p or p < 1:
        raise InvalidParameterError(f"spline order must be an integer >= 1, got {p}")
    if int(interior_knots) != interior_knots or interior_knots < 0:
        raise InvalidParameterError(
            f"number of interior knots must be an integer >= 0, got {interior_knots}")
    p, interior_knots = int(p), int(interior_knots)
    interior = np.arange(1, interior_knots + 1) / (interior_knots + 1)
    knots = np.concatenate([np.zeros(p), interior, np.ones(p)])
    return SplineBasis(order=p, interior_knots=interior_knots, knots=knots)


def _checked_abscissae(x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise InvalidParameterError("abscissae must be a scalar or a 1-D array")
    if np.any(~np.isfinite(x)):
        raise InvalidParameterError("abscissae must be finite")
    if np.any(x < -BOUNDARY_TOL) or np.any(x > 1.0 + BOUNDARY_TOL):
        bad = x[(x < -BOUNDARY_TOL) | (x > 1.0 + BOUNDARY_TOL)][0]
        raise InvalidParameterError(
            f"B-splines are only evaluated on [0, 1]; got x = {bad!r}")
    return np.clip(x, 0.0, 1.0)


def basis_matrix(basis, x):
    """
    Evaluate every basis function at every abscissa.

    Uses the de Boor-Cox recursion of ``scipy.interpolate.BSpline``; at x = 1
    the left limit is taken so the last basis function equals 1 there.

    Args:
        basis (SplineBasis): The basis.
        x (array_like): Abscissae in [0, 1].

    Returns:
        np.ndarray: len(x) x (J_s + p) matrix.
    """
    x = _checked_abscissae(x)
    return BSpline.design_matrix(x, basis.knots, basis.degree).toarray()


def eval_basis(basis, x):
    """
    Evaluate all B_{l,p} at a single abscissa.

    Args:
        basis (SplineBasis): The basis.
        x (float): A point of [0, 1].

    Returns:
        np.ndarray: Vector of length J_s + p.

    Raises:
        InvalidParameterError: If x lies outside [0, 1].
    """
    return basis_matrix(basis, [x])[0]


def design_matrix(basis, n_points):
    """
    Build the N x (J_s + p) design matrix on the grid 1/N, 2/N, ..., 1.

    Raises:
        UnderdeterminedDesignError: If N < J_s + p.
    """
    if n_points < basis.dimension:
        raise UnderdeterminedDesignError(
            f"grid of N={n_points} points cannot determine {basis.dimension} spline "
            f"coefficients (order {basis.order}, {basis.interior_knots} interior knots)")
    grid = np.arange(1, n_points + 1) / n_points
    return DesignMatrix(basis=basis, grid=grid, matrix=basis_matrix(basis, grid))


def _qr_solve(matrix, y):
    q, r = linalg.qr(matrix, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise SingularDesignError("design matrix is rank deficient")
    return linalg.solve_triangular(r, q.T @ y, lower=False)


def lsq_fit(design, y):
    """
    Least-squares spline coefficients for one or many trajectories.

    The normal system is solved by a Cholesky factorization; when the Gram
    matrix is ill conditioned the solve falls back to a QR factorization of
    the design. No explicit inverse is formed.

    Args:
        design (DesignMatrix): The design.
        y (array_like): Vector of length N, or n x N matrix (one row per trajectory).

    Returns:
        np.ndarray: Coefficients, shape (J_s + p,) or n x (J_s + p).

    Raises:
        SingularDesignError: If the design is rank deficient.
    """
    y = np.asarray(y, dtype=float)
    matrix = design.matrix
    if y.shape[-1] != design.rows:
        raise InvalidParameterError(
            f"expected {design.rows} observations per trajectory, got {y.shape[-1]}")
    rhs = y.T  # N x n (or N,)
    gram = matrix.T @ matrix
    if np.linalg.cond(gram) > GRAM_CONDITION_LIMIT:
        logger.warning("Gram matrix ill conditioned; using QR least squares")
        coef = _qr_solve(matrix, rhs)
    else:
        try:
            factor = linalg.cho_factor(gram, lower=True)
        except linalg.LinAlgError as err:
            raise SingularDesignError(f"Gram matrix is not positive definite: {err}") from err
        coef = linalg.cho_solve(factor, matrix.T @ rhs)
    return coef.T


def fitted_values(design, coef):
    """Spline values on the design grid for coefficient vector(s) ``coef``."""
    return np.asarray(coef) @ design.matrix.T


def _residual_sum_of_squares(design, y_matrix):
    y_matrix = np.atleast_2d(np.asarray(y_matrix, dtype=float))
    coef = lsq_fit(design, y_matrix)
    residuals = y_matrix - fitted_values(design, coef)
    return float(np.sum(residuals ** 2)), y_matrix.size


def gcv_score(design, y_matrix):
    """
    Joint generalized cross-validation score over all trajectories.

    GCV = {sum_i RSS_i / (nN)} / (1 - (J_s + p)/N)^2

    Raises:
        InvalidParameterError: If J_s + p >= N (degenerate denominator).
    """
    if design.cols >= design.rows:
        raise InvalidParameterError(
            f"GCV needs fewer basis functions ({design.cols}) than grid points ({design.rows})")
    rss, size = _residual_sum_of_squares(design, y_matrix)
    return (rss / size) / (1.0 - design.cols / design.rows) ** 2


def bic_score(design, y_matrix):
    """Least-squares BIC: nN log(RSS/(nN)) + (J_s + p) log(nN)."""
    rss, size = _residual_sum_of_squares(design, y_matrix)
    rss = max(rss, np.finfo(float).tiny)
    return size * math.log(rss / size) + design.cols * math.log(size)


def knot_formula(n_points, c=0.8, gamma=0.375):
    """
    Number of interior knots floor(c N^gamma (log log N)^gamma).

    Raises:
        InvalidParameterError: If c <= 0, gamma outside (0, 1) or N <= e.
    """
    if c <= 0:
        raise InvalidParameterError(f"knot constant c must be positive, got {c}")
    if not 0 < gamma < 1:
        raise InvalidParameterError(f"knot exponent gamma must lie in (0, 1), got {gamma}")
    if n_points <= math.e:
        raise InvalidParameterError(
            f"N={n_points} is too small for the knot formula (log log N undefined)")
    return int(math.floor(c * n_points ** gamma * math.log(math.log(n_points)) ** gamma))


def knot_candidates(n_curves):
    """Candidate pool {1, ..., min(10, floor(n/4))} for criterion-based selection."""
    upper = min(10, n_curves // 4)
    if upper < 1:
        raise InvalidParameterError(
            f"criterion-based knot selection needs at least 4 curves, got n={n_curves}")
    return list(range(1, upper + 1))


def select_knots(y_matrix, p=4, method="formula", c=0.8, gamma=0.375):
    """
    Choose the number of interior knots J_s.

    Args:
        y_matrix (array_like): n x N observations.
        p (int): Spline order.
        method (str): One of 'formula', 'gcv', 'bic'.
        c (float): Formula constant.
        gamma (float): Formula exponent.

    Returns:
        int: The selected J_s.
    """
    y_matrix = np.atleast_2d(np.asarray(y_matrix, dtype=float))
    n_curves, n_points = y_matrix.shape
    if method == "formula":
        return knot_formula(n_points, c, gamma)
    if method not in KNOT_METHODS:
        raise InvalidParameterError(
            f"unknown knot selection method '{method}'; expected one of {', '.join(KNOT_METHODS)}")

    score = gcv_score if method == "gcv" else bic_score
    candidates = [j for j in knot_candidates(n_curves) if j + p < n_points]
    if not candidates:
        raise InvalidParameterError(
            f"no admissible knot count for N={n_points} with spline order {p}")
    scores = [score(design_matrix(make_basis(p, j), n_points), y_matrix) for j in candidates]
    best = candidates[int(np.argmin(scores))]
    logger.debug(f"{method} selected J_s={best} from {candidates}")
    return best
