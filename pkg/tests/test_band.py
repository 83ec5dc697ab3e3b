import math
from dataclasses import replace

import numpy as np
import numpy.testing as npt
import pytest

from covariance.band import (critical_value, gof_test, omega_hat, pointwise_band, sce_surface,
                             scb, simulate_zeta, sup_statistics, zeta_variance)
from covariance.bspline import make_basis
from covariance.covest import CovCurve
from covariance.covmodels import eval_model, parse_model_spec
from covariance.errors import InvalidParameterError, NumericalError
from covariance.fpca import XI_FLOOR, _unfloored_variance, lag_products
from tests.conftest import make_fpca

H_GRID = np.array([0.0, 0.1, 0.2, 0.3])


def unit_variance(h_grid=H_GRID):
    return CovCurve(h_grid=h_grid, values=np.ones(len(h_grid)), kind="Xi_hat")


def test_single_component_zeta_variance():
    fpca = make_fpca(np.ones((1, 7)), [5.0])
    zeta = simulate_zeta(fpca, H_GRID, reps=50000, seed=1)
    assert zeta.shape == (50000, H_GRID.size)
    npt.assert_allclose(zeta.var(axis=0), 4.0, rtol=0.03)
    assert np.all(np.abs(zeta.mean(axis=0)) < 4 * 2.0 / math.sqrt(50000))


def test_zeta_variance_closed_form():
    rng = np.random.default_rng(4)
    fpca = make_fpca(rng.standard_normal((3, 9)), [2.5, 3.2, 4.0], basis=make_basis(4, 5))
    lags = lag_products(fpca, H_GRID, 200)
    expected = sum((m4 - 1) * lags[:, k, k] ** 2 for k, m4 in enumerate([2.5, 3.2, 4.0]))
    for k in range(3):
        for l in range(k + 1, 3):
            expected = expected + (lags[:, k, l] + lags[:, l, k]) ** 2
    npt.assert_allclose(zeta_variance(fpca, H_GRID), expected, rtol=1e-10)
    zeta = simulate_zeta(fpca, H_GRID, reps=100000, seed=9)
    npt.assert_allclose(zeta.var(axis=0), expected, rtol=0.05)


def test_fourth_moment_below_one_is_clipped():
    fpca = make_fpca(np.ones((1, 7)), [0.5])
    npt.assert_allclose(zeta_variance(fpca, H_GRID), 0.0)


def test_zeta_is_reproducible_and_block_stable():
    fpca = make_fpca(np.ones((2, 7)) * [[1.0], [0.5]], [3.0, 3.0])
    first = simulate_zeta(fpca, H_GRID, reps=3000, seed=[4, 2])
    npt.assert_array_equal(first, simulate_zeta(fpca, H_GRID, reps=3000, seed=[4, 2]))
    # the first blocks are shared by a shorter run
    npt.assert_array_equal(first[:1024], simulate_zeta(fpca, H_GRID, reps=1024, seed=[4, 2]))
    assert not np.array_equal(first, simulate_zeta(fpca, H_GRID, reps=3000, seed=[4, 3]))


def test_simulate_zeta_rejects_bad_arguments():
    fpca = make_fpca(np.ones((1, 7)), [3.0])
    with pytest.raises(InvalidParameterError):
        simulate_zeta(fpca, H_GRID, reps=99)
    with pytest.raises(InvalidParameterError):
        simulate_zeta(replace(fpca, kappa=None), H_GRID)


def test_critical_value_of_a_single_normal():
    zeta = np.random.default_rng(0).standard_normal((100000, 1))
    q = critical_value(zeta, unit_variance([0.0]), 0.05)
    assert q == pytest.approx(1.96, abs=0.05)


def test_critical_value_is_the_order_statistic():
    zeta = np.random.default_rng(1).standard_normal((101, 2))
    maxima = np.sort(np.max(np.abs(zeta), axis=1))
    xi = unit_variance([0.0, 0.1])
    assert critical_value(zeta, xi, 0.5) == maxima[math.ceil(0.5 * 101) - 1]
    assert critical_value(zeta, xi, 0.01) == maxima[math.ceil(0.99 * 101) - 1]


def test_critical_value_is_monotone_in_the_level():
    zeta = np.random.default_rng(2).standard_normal((2000, 4))
    xi = unit_variance()
    assert critical_value(zeta, xi, 0.05) >= critical_value(zeta, xi, 0.2)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1])
def test_critical_value_rejects_bad_levels(alpha):
    with pytest.raises(InvalidParameterError):
        critical_value(np.zeros((200, 4)), unit_variance(), alpha)


def test_sup_statistics_skip_floored_lags():
    xi = CovCurve(h_grid=H_GRID, values=[1.0, XI_FLOOR, 4.0, 1.0], kind="Xi_hat")
    zeta = np.array([[1.0, 100.0, 4.0, -0.5]])
    npt.assert_allclose(sup_statistics(zeta, xi), [2.0])
    with pytest.raises(NumericalError):
        sup_statistics(zeta, CovCurve(h_grid=H_GRID, values=np.full(4, XI_FLOOR), kind="Xi_hat"))


def test_simultaneous_band_shape():
    c_hat = CovCurve(h_grid=H_GRID, values=[1.0, 0.8, 0.5, 0.2])
    xi = CovCurve(h_grid=H_GRID, values=[4.0, 4.0, 1.0, 0.0], kind="Xi_hat")
    band = scb(c_hat, xi, 2.5, 25, level=0.95)
    npt.assert_allclose(band.upper.values - c_hat.values, [1.0, 1.0, 0.5, 0.0])
    npt.assert_allclose(c_hat.values - band.lower.values, [1.0, 1.0, 0.5, 0.0])
    assert band.kind == "simultaneous"
    assert band.contains(c_hat.values)
    assert not band.contains(c_hat.values + [0, 0, 0, 0.1])
    wider = scb(c_hat, xi, 2.5, 100)
    npt.assert_allclose(wider.upper.values - c_hat.values,
                        (band.upper.values - c_hat.values) / 2)


def test_band_rejects_mismatched_grids():
    c_hat = CovCurve(h_grid=H_GRID, values=np.ones(4))
    with pytest.raises(InvalidParameterError):
        scb(c_hat, unit_variance([0.0, 0.1]), 2.0, 10)
    with pytest.raises(InvalidParameterError):
        scb(c_hat, unit_variance(), 2.0, 0)


def test_pointwise_band_multiplier():
    c_hat = CovCurve(h_grid=H_GRID, values=np.ones(4))
    band = pointwise_band(c_hat, unit_variance(), 0.05, 16)
    assert band.q == pytest.approx(1.959964, abs=1e-6)
    assert band.level == pytest.approx(0.95)
    assert band.kind == "pointwise"


def test_pointwise_band_lies_inside_the_simultaneous_band():
    c_hat = CovCurve(h_grid=H_GRID, values=[1.0, 0.5, 0.2, 0.1])
    xi = unit_variance()
    simultaneous = scb(c_hat, xi, 2.4, 30)
    pointwise = pointwise_band(c_hat, xi, 0.05, 30)
    assert np.all(pointwise.lower.values >= simultaneous.lower.values)
    assert np.all(pointwise.upper.values <= simultaneous.upper.values)


def test_envelope_surfaces():
    c_hat = CovCurve(h_grid=H_GRID, values=[1.0, 0.5, 0.2, 0.1])
    band = scb(c_hat, unit_variance(), 2.0, 4)
    lower, upper = sce_surface(band, [0.0, 0.1, 0.2])
    npt.assert_allclose(np.diag(lower), band.lower.values[0])
    npt.assert_allclose(np.diag(upper), band.upper.values[0])
    npt.assert_allclose(lower, lower.T)
    assert lower[0, 2] == pytest.approx(band.lower.values[2])


def test_omega_diagonal_is_the_variance():
    rng = np.random.default_rng(6)
    fpca = make_fpca(rng.standard_normal((2, 7)), [2.0, 4.0])
    c_hat = CovCurve(h_grid=H_GRID, values=[1.0, 0.6, 0.3, 0.1])
    omega = omega_hat(fpca, c_hat)
    npt.assert_allclose(omega, omega.T, atol=1e-12)
    npt.assert_allclose(np.diag(omega),
                        _unfloored_variance(fpca, c_hat, lag_products(fpca, H_GRID, 200)))


def test_gof_accepts_the_estimate_itself():
    model = parse_model_spec("gaussian:sill=2,range=0.5")
    c_hat = CovCurve(h_grid=H_GRID, values=eval_model(model, H_GRID))
    zeta = np.random.default_rng(7).standard_normal((500, H_GRID.size))
    result = gof_test(c_hat, unit_variance(), 50, model, zeta)
    assert result.statistic == pytest.approx(0.0, abs=1e-12)
    assert result.p_value == 1.0
    assert not any(result.reject_at.values())


def test_gof_rejects_a_distant_model():
    model = parse_model_spec("spherical:sill=1,range=0.5")
    c_hat = CovCurve(h_grid=H_GRID, values=eval_model(model, H_GRID) + 100.0)
    zeta = np.random.default_rng(8).standard_normal((500, H_GRID.size))
    result = gof_test(c_hat, unit_variance(), 50, model, zeta)
    assert result.p_value == pytest.approx(1 / 501)
    assert all(result.reject_at.values())
    document = result.to_dict()
    assert document["model_spec"] == "spherical:sill=1,range=0.5"
    assert set(document["decisions"]) == {"0.2", "0.1", "0.05", "0.01"}


def test_gof_scales_lags_to_model_units():
    model = parse_model_spec("gaussian:sill=1,range=3")
    c_hat = CovCurve(h_grid=H_GRID, values=eval_model(model, H_GRID * 5.0))
    zeta = np.random.default_rng(9).standard_normal((200, H_GRID.size))
    assert gof_test(c_hat, unit_variance(), 20, model, zeta, lag_scale=5.0).statistic \
        == pytest.approx(0.0, abs=1e-12)


def test_gof_reports_flagged_lags():
    model = parse_model_spec("gaussian:sill=1,range=1")
    c_hat = CovCurve(h_grid=H_GRID, values=eval_model(model, H_GRID))
    xi = CovCurve(h_grid=H_GRID, values=[1.0, 1.0, XI_FLOOR, 1.0], kind="Xi_hat")
    zeta = np.random.default_rng(10).standard_normal((200, H_GRID.size))
    npt.assert_allclose(gof_test(c_hat, xi, 20, model, zeta).flagged_lags, [0.2])
