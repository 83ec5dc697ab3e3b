"""
This module generates the synthetic functional datasets of the Monte-Carlo
experiments together with the truth they were drawn from.

Fourier design:
    Y_ij = m(j/N) + sum_k xi_ik phi_k(j/N) + sigma(j/N) eps_ij
    m(x) = sin{2 pi (x - 1/2)}, phi_k = sqrt(lambda_k) psi_k, lambda_k = (1/4)^floor(k/2),
    psi_{2m-1} = sqrt(2) cos(2 m pi x), psi_{2m} = sqrt(2) sin(2 m pi x)

Spatial design:
    grid x_j = s j / N on [0, s] with s the effective range of the model,
    Z_i a zero-mean Gaussian process with the model covariance.

Replicate r of seed s draws from the substreams (s, r, <purpose>) only, so
replicates are independent of each other and of the number requested.
"""
from dataclasses import dataclass, field

import numpy as np

from covariance.covest import FunctionalDataset, check_lags
from covariance.covmodels import covariance_matrix, effective_range, eval_model, sample_gp
from covariance.errors import InvalidParameterError
from helpers.rng import substream

# Terms of the eigen-series used for truth quantities (tail below 1e-12).
TRUTH_TERMS = 50

SCORE_STREAM = 1
NOISE_STREAM = 2
PROCESS_STREAM = 3


@dataclass(frozen=True)
class Truth:
    """
    The quantities a replicate is scored against.

    Attributes:
        mean (np.ndarray): m on the unit grid.
        lambdas (np.ndarray): True eigenvalues, non-increasing.
        phi (np.ndarray): Row k holds phi_k on the unit grid.
        surface (np.ndarray): N x N true covariance surface on the grid.
        z (np.ndarray): n x N realized latent curves (for the oracle estimator).
        generator (str): fourier or spatial.
        model (CovModelSpec): Spatial model, None for fourier.
        lag_scale (float): Original-unit length of the unit interval.
    """
    mean: np.ndarray = field(repr=False)
    lambdas: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    surface: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    generator: str = "fourier"
    model: object = None
    lag_scale: float = 1.0

    def covariance(self, h_grid):
        """True C(h) at unit lags."""
        h_grid = check_lags(h_grid)
        if self.model is None:
            return fourier_covariance(h_grid)
        return eval_model(self.model, h_grid * self.lag_scale)


def mean_function(x):
    return np.sin(2.0 * np.pi * (np.asarray(x, dtype=float) - 0.5))


def noise_scale(x, sigma_eps, shape=None):
    """sigma(x) for homogeneous (shape None) or heteroscedastic noise."""
    x = np.asarray(x, dtype=float)
    if shape is None:
        return np.full(x.shape, float(sigma_eps))
    if shape == "exp5":
        level, growth = 5.0, np.exp(x)
    elif shape == "exp5_half":
        level, growth = 5.0, np.exp(x / 2.0)
    elif shape == "exp30_half":
        level, growth = 30.0, np.exp(x / 2.0)
    else:
        raise InvalidParameterError(f"unknown variance shape '{shape}'")
    return sigma_eps * (level - growth) / (level + growth)


def fourier_lambdas(n_terms):
    k = np.arange(1, n_terms + 1)
    return 0.25 ** (k // 2)


def fourier_psi(n_terms, x):
    """Row k - 1 holds psi_k at ``x``."""
    x = np.asarray(x, dtype=float)
    k = np.arange(1, n_terms + 1)
    frequency = 2.0 * np.pi * ((k + 1) // 2)
    angles = frequency[:, None] * x[None, :]
    return np.sqrt(2.0) * np.where((k % 2 == 1)[:, None], np.cos(angles), np.sin(angles))


def _integral_cos(c, d, length):
    """int_0^length cos(c x + d) dx, elementwise; c may be 0."""
    zero = c == 0
    safe = np.where(zero, 1.0, c)
    return np.where(zero, length * np.cos(d), (np.sin(safe * length + d) - np.sin(d)) / safe)


def _integral_sin(c, d, length):
    zero = c == 0
    safe = np.where(zero, 1.0, c)
    return np.where(zero, length * np.sin(d), (np.cos(d) - np.cos(safe * length + d)) / safe)


def fourier_lag_matrix(h, n_terms=TRUTH_TERMS):
    """
    A_kk'(h) = (1 - h)^-1 int_0^{1-h} phi_k(x) phi_k'(x + h) dx for the Fourier design.

    Uses product-to-sum identities, so every integral is exact.

    Returns:
        np.ndarray: n_terms x n_terms matrix.
    """
    h = float(check_lags([h])[0])
    k = np.arange(1, n_terms + 1)
    a = (2.0 * np.pi * ((k + 1) // 2))[:, None]
    b = (2.0 * np.pi * ((k + 1) // 2))[None, :]
    left_cos = (k % 2 == 1)[:, None]
    right_cos = (k % 2 == 1)[None, :]
    length = 1.0 - h

    diff_c, diff_d = a - b, -b * h
    sum_c, sum_d = a + b, b * h
    cos_diff = _integral_cos(diff_c, diff_d, length)
    cos_sum = _integral_cos(sum_c, sum_d, length)
    sin_diff = _integral_sin(diff_c, diff_d, length)
    sin_sum = _integral_sin(sum_c, sum_d, length)

    # psi_k(x) psi_k'(x + h) = 2 trig(a x) trig(b (x + h)), split by product-to-sum
    integrals = np.select(
        [left_cos & right_cos, left_cos & ~right_cos, ~left_cos & right_cos],
        [cos_diff + cos_sum, sin_sum - sin_diff, sin_sum + sin_diff],
        default=cos_diff - cos_sum,
    )
    root = np.sqrt(fourier_lambdas(n_terms))
    return np.outer(root, root) * integrals / length


def fourier_covariance(h_grid, n_terms=TRUTH_TERMS):
    """True C(h) = sum_k A_kk(h) for the Fourier design."""
    return np.array([np.trace(fourier_lag_matrix(h, n_terms)) for h in check_lags(h_grid)])


def fourier_truth_variance(h_grid, n_terms=TRUTH_TERMS):
    """
    Asymptotic variance Xi(h) for Gaussian scores (E xi^4 = 3):
    sum_{k,k'} A_kk'(h)^2 + C(h)^2.
    """
    values = []
    for h in check_lags(h_grid):
        lags = fourier_lag_matrix(h, n_terms)
        values.append(np.sum(lags ** 2) + np.trace(lags) ** 2)
    return np.array(values)


def _noisy_dataset(config, replicate, signal, noise_x, domain=None):
    noise = substream(config.seed, replicate, NOISE_STREAM).standard_normal(signal.shape)
    y_matrix = signal + noise_scale(noise_x, config.sigma_eps, config.shape) * noise
    return FunctionalDataset(Y=y_matrix, domain=domain)


def gen_fourier_data(config, replicate):
    """
    One Fourier-design dataset and its truth.

    Returns:
        tuple: (FunctionalDataset, Truth).
    """
    grid = np.arange(1, config.N + 1) / config.N
    scores = substream(config.seed, replicate, SCORE_STREAM).standard_normal(
        (config.n, config.series_terms))
    phi_all = np.sqrt(fourier_lambdas(config.series_terms))[:, None] \
        * fourier_psi(config.series_terms, grid)
    z_matrix = scores @ phi_all
    mean = mean_function(grid)
    data = _noisy_dataset(config, replicate, mean + z_matrix, grid)

    terms = min(TRUTH_TERMS, config.series_terms)
    phi = phi_all[:terms]
    truth = Truth(
        mean=mean,
        lambdas=fourier_lambdas(terms),
        phi=phi,
        surface=phi.T @ phi,
        z=z_matrix,
        generator="fourier",
    )
    return data, truth


def discretized_eigen(surface):
    """
    Eigenvalues and eigenfunctions of the operator N^-1 [G(x_j, x_j')].

    Returns:
        tuple: (lambdas, phi) with phi rows normalized so N^-1 sum_j psi_k^2 = 1,
        scaled by sqrt(lambda_k), signs fixed so the first nonzero entry is positive.
    """
    n_points = surface.shape[0]
    eigenvalues, eigenvectors = np.linalg.eigh(surface / n_points)
    order = np.argsort(eigenvalues)[::-1]
    lambdas = np.clip(eigenvalues[order], 0.0, None)
    psi = np.sqrt(n_points) * eigenvectors[:, order].T
    for row in psi:
        nonzero = np.flatnonzero(np.abs(row) > 1e-12)
        if nonzero.size and row[nonzero[0]] < 0:
            row *= -1.0
    return lambdas, np.sqrt(lambdas)[:, None] * psi


def gen_spatial_data(config, replicate):
    """
    One spatial-design dataset and its truth.

    The grid spans [0, s] for the effective range s of the model; the dataset
    records the domain (0, s) so unit lags map back to model units.

    Returns:
        tuple: (FunctionalDataset, Truth).
    """
    spec = config.model_spec
    span = effective_range(spec)
    unit_grid = np.arange(1, config.N + 1) / config.N
    grid = span * unit_grid
    z_matrix = sample_gp(spec, grid, config.n, seed=[config.seed, replicate, PROCESS_STREAM])
    mean = mean_function(unit_grid)
    data = _noisy_dataset(config, replicate, mean + z_matrix, grid, domain=(0.0, span))

    surface = covariance_matrix(spec, grid)
    lambdas, phi = discretized_eigen(surface)
    terms = min(TRUTH_TERMS, config.N)
    truth = Truth(
        mean=mean,
        lambdas=lambdas[:terms],
        phi=phi[:terms],
        surface=surface,
        z=z_matrix,
        generator="spatial",
        model=spec,
        lag_scale=span,
    )
    return data, truth


def generate(config, replicate):
    """Dataset and truth of replicate ``replicate`` for the configured generator."""
    if config.generator == "fourier":
        return gen_fourier_data(config, replicate)
    return gen_spatial_data(config, replicate)
