"""
This module performs functional principal component analysis of the spline
covariance surface and builds the plug-in variance function of the
covariance estimator.

The eigenproblem of G_hat is reduced through the Cholesky factor of B^T B:
with B^T B = L L^T, the eigenvalues of N^-1 L^T beta L are the eigenvalues of
the discretized covariance operator, and gamma_k = sqrt(N) (L^T)^-1 v_k gives
eigenfunctions with N^-1 sum_j psi_k(j/N)^2 = 1.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from covariance.bspline import basis_matrix
from covariance.covest import CovCurve, check_lags, lag_gram
from covariance.errors import FactorizationError, InvalidParameterError, NumericalError

# Eigenvalues at or below this fraction of the largest one are reported as 0.
EIGEN_CLIP = 1e-12

# Floor applied to the variance function before inverse square roots.
XI_FLOOR = 1e-12


@dataclass(frozen=True)
class FpcaResult:
    """
    Spectral decomposition of the spline covariance surface.

    Attributes:
        basis (SplineBasis): Basis of the eigenfunction coefficients.
        lambdas (np.ndarray): Eigenvalues, non-increasing, clipped at 0.
        psi_coeffs (np.ndarray): Row k holds the spline coefficients of psi_k.
        phi_coeffs (np.ndarray): Row k holds the coefficients of phi_k = sqrt(lambda_k) psi_k.
        kappa (int): Truncation level (None until selected).
        scores (np.ndarray): n x kappa FPC scores (None until computed).
        fourth_moments (np.ndarray): n^-1 sum_i xi_ik^4 for k <= kappa.
        grid_size (int): N of the grid the surface was decomposed on; the
            default number of trapezoid abscissae per lag.
    """
    basis: object
    lambdas: np.ndarray = field(repr=False)
    psi_coeffs: np.ndarray = field(repr=False)
    phi_coeffs: np.ndarray = field(repr=False)
    kappa: int = None
    scores: np.ndarray = field(default=None, repr=False)
    fourth_moments: np.ndarray = field(default=None, repr=False)
    grid_size: int = None

    @property
    def leading_phi(self):
        """Coefficients of phi_1..phi_kappa."""
        return self.phi_coeffs[:self._require_kappa()]

    def resolve_quad_points(self, quad_points=None):
        """``quad_points`` when given, otherwise the grid size of the decomposition."""
        if quad_points is not None:
            return quad_points
        if self.grid_size is None:
            raise InvalidParameterError("quad_points is needed when the grid size is unknown")
        return self.grid_size

    def _require_kappa(self):
        if self.kappa is None:
            raise InvalidParameterError("truncation level kappa has not been selected")
        return self.kappa

    def eigenfunctions(self, x, scaled=True):
        """kappa x len(x) values of phi_k (or psi_k when ``scaled`` is False)."""
        coef = self.phi_coeffs if scaled else self.psi_coeffs
        return coef[:self._require_kappa()] @ basis_matrix(self.basis, x).T


def _fix_signs(gammas):
    for row in gammas:
        nonzero = np.flatnonzero(np.abs(row) > 1e-12 * max(np.abs(row).max(), 1e-300))
        if nonzero.size and row[nonzero[0]] < 0:
            row *= -1.0
    return gammas


def eigen_decompose(surface, design):
    """
    Eigenvalues and eigenfunctions of the covariance surface.

    Args:
        surface (CovSurface): beta coefficients of G_hat.
        design (DesignMatrix): Design on the grid j/N.

    Returns:
        FpcaResult: Eigen part only (kappa, scores, fourth moments unset).

    Raises:
        FactorizationError: If B^T B is not positive definite.
    """
    n_points = design.rows
    try:
        lower = linalg.cholesky(design.matrix.T @ design.matrix, lower=True)
    except linalg.LinAlgError as err:
        raise FactorizationError(f"Cholesky of B^T B failed (rank-deficient design): {err}") \
            from err

    reduced = lower.T @ surface.beta @ lower / n_points
    eigenvalues, eigenvectors = linalg.eigh((reduced + reduced.T) / 2.0)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    scale = max(abs(eigenvalues[0]), abs(eigenvalues[-1]))
    eigenvalues = np.where(eigenvalues > EIGEN_CLIP * scale, eigenvalues, 0.0)

    gammas = np.sqrt(n_points) * linalg.solve_triangular(lower.T, eigenvectors, lower=False)
    gammas = _fix_signs(np.ascontiguousarray(gammas.T))
    return FpcaResult(
        basis=surface.basis,
        lambdas=eigenvalues,
        psi_coeffs=gammas,
        phi_coeffs=np.sqrt(eigenvalues)[:, None] * gammas,
        grid_size=n_points,
    )


def select_kappa(lambdas, fve=0.95):
    """
    Smallest kappa whose leading eigenvalues explain ``fve`` of the total.

    Raises:
        NumericalError: If no eigenvalue is positive.
    """
    if not 0 < fve <= 1:
        raise InvalidParameterError(f"fraction of variance explained must lie in (0, 1], got {fve}")
    positive = np.clip(np.asarray(lambdas, dtype=float), 0.0, None)
    cumulative = np.cumsum(positive)
    if cumulative.size == 0 or cumulative[-1] <= 0:
        raise NumericalError("covariance surface has no positive eigenvalue")
    return int(np.argmax(cumulative >= fve * cumulative[-1])) + 1


def fpc_scores(data, fits, fpca):
    """
    FPC scores xi_ik = N^-1 sum_j lambda_k^-1 {Y_ij - m(j/N)} phi_k(j/N).

    Returns:
        np.ndarray: n x kappa matrix.
    """
    kappa = fpca._require_kappa()
    lambdas = fpca.lambdas[:kappa]
    if np.any(lambdas <= 0):
        raise NumericalError(f"cannot score on a zero eigenvalue (kappa={kappa})")
    grid = data.grid
    design_values = basis_matrix(fits.basis, grid)
    centered = data.Y - design_values @ fits.mean_coeffs
    phi_values = fpca.phi_coeffs[:kappa] @ design_values.T
    return centered @ phi_values.T / (data.N * lambdas)


def run_fpca(data, fits, surface, design, fve=0.95):
    """Eigen decomposition, kappa selection, scores and fourth moments in one call."""
    fpca = eigen_decompose(surface, design)
    fpca = replace(fpca, kappa=select_kappa(fpca.lambdas, fve))
    scores = fpc_scores(data, fits, fpca)
    return replace(fpca, scores=scores, fourth_moments=np.mean(scores ** 4, axis=0))


def lag_products(fpca, h_grid, quad_points=None, grams=None):
    """
    A_{kk'}(h) = (1 - h)^-1 int_0^{1-h} phi_k(x) phi_k'(x + h) dx for k, k' <= kappa.

    Without ``grams`` the integrals use ``quad_points`` abscissae, or N of the fit.

    Returns:
        np.ndarray: Array of shape (len(h_grid), kappa, kappa).
    """
    if grams is None:
        grams = lag_gram(fpca.basis, h_grid, fpca.resolve_quad_points(quad_points))
    phi = fpca.leading_phi
    return np.einsum("ks,hst,lt->hkl", phi, grams, phi)


def _unfloored_variance(fpca, c_hat, lags):
    fourth = np.asarray(fpca.fourth_moments, dtype=float)
    diagonal = np.diagonal(lags, axis1=1, axis2=2)
    return (np.sum(lags ** 2, axis=(1, 2)) + c_hat.values ** 2
            + np.sum((fourth - 3.0) * diagonal ** 2, axis=1))


def variance_function(fpca, c_hat, h_grid=None, quad_points=None, grams=None):
    """
    Plug-in variance function Xi_hat(h), floored at ``XI_FLOOR``.

    Xi_hat(h) = sum_{k,k'} A_{kk'}(h)^2 + C_hat(h)^2 + sum_k (m4_k - 3) A_kk(h)^2

    Args:
        fpca (FpcaResult): Completed FPCA (kappa and fourth moments set).
        c_hat (CovCurve): The covariance estimate on the same lag grid.
        h_grid (array_like, optional): Defaults to the grid of ``c_hat``.
        quad_points (int, optional): Trapezoid abscissae per lag; defaults to N.
        grams (np.ndarray, optional): Precomputed lag Gram matrices.

    Returns:
        CovCurve: kind 'Xi_hat'.
    """
    h_grid = c_hat.h_grid if h_grid is None else check_lags(h_grid)
    if h_grid.shape != c_hat.h_grid.shape or not np.allclose(h_grid, c_hat.h_grid):
        raise InvalidParameterError("variance function and covariance curve use different lag grids")
    if fpca.kappa is None or fpca.kappa < 1 or fpca.fourth_moments is None:
        raise InvalidParameterError("variance function needs kappa >= 1 and fourth moments")
    lags = lag_products(fpca, h_grid, quad_points, grams)
    values = np.maximum(_unfloored_variance(fpca, c_hat, lags), XI_FLOOR)
    return CovCurve(h_grid=h_grid, values=values, kind="Xi_hat")
