import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy import integrate

from covariance.covmodels import effective_range, parse_model_spec
from covariance.errors import InvalidParameterError
from helpers.rng import entropy, substream
from simulation.config import build_config
from simulation.generators import (fourier_covariance, fourier_lag_matrix, fourier_lambdas,
                                   fourier_psi, fourier_truth_variance, gen_fourier_data,
                                   gen_spatial_data, generate, mean_function, noise_scale)


def lag_integral(k, l, h):
    """A_kl(h) by adaptive quadrature."""
    lambdas = fourier_lambdas(max(k, l) + 1)

    def integrand(x):
        return fourier_psi(max(k, l) + 1, [x])[k, 0] * fourier_psi(max(k, l) + 1, [x + h])[l, 0]

    value, _ = integrate.quad(integrand, 0.0, 1.0 - h, epsabs=1e-13, limit=200)
    return math.sqrt(lambdas[k] * lambdas[l]) * value / (1.0 - h)


def test_fourier_spectrum():
    npt.assert_allclose(fourier_lambdas(5), [1.0, 0.25, 0.25, 0.0625, 0.0625])
    psi = fourier_psi(4, [0.25])
    npt.assert_allclose(psi[:, 0], np.sqrt(2) * np.array([0.0, 1.0, -1.0, 0.0]), atol=1e-12)


@pytest.mark.parametrize("h", [0.0, 0.13, 0.25, 0.5])
@pytest.mark.parametrize("k, l", [(0, 0), (0, 1), (1, 2), (2, 1), (3, 4), (4, 4), (1, 5)])
def test_lag_matrix_matches_quadrature(k, l, h):
    assert fourier_lag_matrix(h, 6)[k, l] == pytest.approx(lag_integral(k, l, h), abs=1e-10)


def test_true_covariance_at_zero():
    # sum of 50 eigenvalues of the geometric spectrum
    assert fourier_covariance([0.0])[0] == pytest.approx(np.sum(fourier_lambdas(50)))
    assert fourier_covariance([0.0])[0] == pytest.approx(5 / 3, abs=1e-12)


def test_truth_variance_at_zero():
    lags = fourier_lag_matrix(0.0)
    expected = np.sum(lags ** 2) + np.trace(lags) ** 2
    assert fourier_truth_variance([0.0])[0] == pytest.approx(expected)


def test_noise_shapes():
    x = np.array([0.0, 1.0])
    npt.assert_allclose(noise_scale(x, 0.5), [0.5, 0.5])
    npt.assert_allclose(noise_scale(x, 1.0, "exp5"), (5 - np.exp(x)) / (5 + np.exp(x)))
    npt.assert_allclose(noise_scale(x, 1.0, "exp30_half"), (30 - np.exp(x / 2)) / (30 + np.exp(x / 2)))
    with pytest.raises(InvalidParameterError):
        noise_scale(x, 1.0, "linear")


def test_noiseless_fourier_data_is_mean_plus_signal():
    config = build_config({"N": 40, "sigma_eps": 0.0, "seed": 3, "series_terms": 200})
    data, truth = gen_fourier_data(config, 0)
    assert (data.n, data.N) == (32, 40)
    npt.assert_allclose(data.Y, mean_function(data.grid) + truth.z)
    npt.assert_allclose(truth.surface, truth.phi.T @ truth.phi)
    assert truth.phi.shape == (50, 40)


def test_replicates_use_distinct_streams():
    config = build_config({"N": 20, "seed": 3})
    first, _ = generate(config, 0)
    again, _ = generate(config, 0)
    second, _ = generate(config, 1)
    npt.assert_array_equal(first.Y, again.Y)
    assert not np.array_equal(first.Y, second.Y)


def test_spatial_data_spans_the_effective_range():
    config = build_config({"generator": "spatial", "model": "spherical:sill=2,range=1",
                           "N": 30, "seed": 5})
    data, truth = gen_spatial_data(config, 0)
    span = effective_range(parse_model_spec("spherical:sill=2,range=1"))
    assert data.domain == (0.0, pytest.approx(0.81140, abs=1e-4))
    assert truth.lag_scale == pytest.approx(span)
    npt.assert_allclose(data.original_grid[-1], span)
    npt.assert_allclose(truth.covariance([0.0, 0.5]),
                        [2.0, 2.0 * (1 - 1.5 * 0.5 * span + 0.5 * (0.5 * span) ** 3)])
    assert np.all(np.diff(truth.lambdas) <= 1e-12)


def test_spatial_eigenfunctions_reproduce_the_surface():
    config = build_config({"generator": "spatial", "model": "gaussian:sill=2,range=3",
                           "N": 25, "seed": 5})
    _, truth = gen_spatial_data(config, 0)
    npt.assert_allclose(truth.phi.T @ truth.phi, truth.surface, atol=1e-8)


def test_entropy_distinguishes_trailing_zeros():
    assert entropy(1, 2) != entropy(1, 2, 0)
    assert not np.array_equal(substream(1, 2).standard_normal(3),
                              substream(1, 2, 0).standard_normal(3))
    assert entropy([4, 2], 7) == entropy(4, 2, 7)


@pytest.mark.parametrize("seed", [None, -1, 1.5])
def test_entropy_rejects_bad_seeds(seed):
    with pytest.raises(ValueError):
        entropy(seed)
