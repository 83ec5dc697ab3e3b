"""
Monte-Carlo runs of the simulation designs. Minutes each; run with

    pytest -m slow
"""
from pathlib import Path

import numpy as np
import pytest

from covariance.band import gof_test
from covariance.bspline import design_matrix, make_basis, select_knots
from covariance.covest import (covariance_curve, covariance_surface, default_h_grid, eval_fit,
                               fit_trajectories, oracle_covariance)
from covariance.covmodels import parse_model_spec
from covariance.fpca import run_fpca
from covariance.pipeline import PipelineSettings, estimate
from helpers.settings import default_workers
from simulation.config import build_config, load_config
from simulation.generators import gen_spatial_data, generate
from simulation.harness import run_replications

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

pytestmark = pytest.mark.slow


@pytest.fixture
def workers(monkeypatch):
    monkeypatch.delenv("COVBAND_WORKERS")
    return default_workers()


@pytest.fixture(scope="module")
def fourier_reports():
    """200-replicate reports of the homogeneous Fourier design for N = 50, 100, 200."""
    with pytest.MonkeyPatch.context() as patch:
        patch.delenv("COVBAND_WORKERS", raising=False)
        workers = default_workers()
    return {N: run_replications(load_config(CONFIG_DIR / f"fourier_N{N}.toml", seed=2024),
                                workers=workers)
            for N in (50, 100, 200)}


def fourier_config(N, seed, **values):
    return build_config({"generator": "fourier", "N": N, "seed": seed, **values})


def fitted(data, method="formula"):
    return fit_trajectories(data, make_basis(4, select_knots(data.Y, 4, method)))


def test_fourier_design_small_grid(fourier_reports):
    report = fourier_reports[50]
    assert 0.025 <= report.amse["amse_C"] <= 0.040
    assert 0.84 <= report.cr["0.05"] <= 0.94
    assert 0.75 <= report.wd["0.05"] <= 0.92


def test_fourier_design_large_grid(fourier_reports):
    report = fourier_reports[200]
    assert 0.91 <= report.cr["0.05"] <= 0.99
    assert 0.38 <= report.wd["0.05"] <= 0.48


def test_band_narrows_as_the_grid_grows(fourier_reports):
    widths = [fourier_reports[N].wd["0.05"] for N in (50, 100, 200)]
    assert widths[0] > widths[1] > widths[2]


@pytest.mark.parametrize("N", [50, 100, 200])
def test_spline_and_oracle_estimators_agree(fourier_reports, N):
    amse = fourier_reports[N].amse
    assert 1 / 1.3 <= amse["amse_C"] / amse["amse_Ctilde"] <= 1.3


def test_spherical_design(workers):
    report = run_replications(load_config(CONFIG_DIR / "spatial_spherical.toml", seed=2024),
                              workers=workers)
    assert 0.06 <= report.amse["amse_C"] <= 0.11
    assert 0.85 <= report.cr["0.05"] <= 0.96


def test_fourier_truth_variance_at_zero(workers):
    report = run_replications(load_config(CONFIG_DIR / "fourier_N200.toml", seed=7, reps=100),
                              workers=workers)
    assert report.xi_zero == pytest.approx(report.xi_zero_truth, rel=0.15)


def test_mean_estimate_is_consistent():
    config = fourier_config(100, seed=41)
    smoothing_ok = 0
    for replicate in range(100):
        data, truth = generate(config, replicate)
        m_hat = eval_fit(fitted(data), "mean", data.grid)
        # the sample mean of the latent curves is what the spline mean can recover
        smoothing_ok += np.max(np.abs(m_hat - truth.mean - truth.z.mean(axis=0))) < 0.1
    assert smoothing_ok >= 95

    def median_sup_error(N):
        config = fourier_config(N, seed=43)
        errors = []
        for replicate in range(30):
            data, truth = generate(config, replicate)
            errors.append(np.max(np.abs(eval_fit(fitted(data), "mean", data.grid) - truth.mean)))
        return np.median(errors)

    assert median_sup_error(200) < median_sup_error(50)


def test_leading_scores_have_unit_variance():
    config = fourier_config(200, seed=47)
    within = 0
    for replicate in range(50):
        data, _ = generate(config, replicate)
        fits = fitted(data)
        fpca = run_fpca(data, fits, covariance_surface(fits), design_matrix(fits.basis, data.N))
        within += 0.8 <= np.var(fpca.scores[:, 0]) <= 1.2
    assert within >= 45


def test_gcv_knots_track_the_formula():
    config = fourier_config(100, seed=53)
    formula_knots, gcv_knots, amse_ratio = [], [], []
    h_grid = default_h_grid(100)
    for replicate in range(30):
        data, truth = generate(config, replicate)
        formula_knots.append(select_knots(data.Y, 4, "formula"))
        gcv_knots.append(select_knots(data.Y, 4, "gcv"))
        true_c = truth.covariance(h_grid)
        amse = [np.mean((covariance_curve(fitted(data, method), h_grid).values - true_c) ** 2)
                for method in ("formula", "gcv")]
        amse_ratio.append(amse[1] / amse[0])
    assert np.median(gcv_knots) >= np.median(formula_knots)
    assert 1 / 1.3 <= np.mean(amse_ratio) <= 1.3


def test_spline_estimate_approaches_the_oracle():
    def median_gap(N):
        config = fourier_config(N, seed=59)
        h_grid = default_h_grid(N)
        gaps = []
        for replicate in range(30):
            data, truth = generate(config, replicate)
            c_hat = covariance_curve(fitted(data), h_grid)
            gaps.append(np.max(np.abs(c_hat.values - oracle_covariance(truth.z, h_grid).values)))
        return np.median(gaps)

    assert median_gap(200) < median_gap(50)


def gof_rejections(model_text, N, runs, seed):
    config = build_config({"generator": "spatial", "model": "gaussian:sill=2,range=3",
                           "N": N, "seed": seed})
    model = parse_model_spec(model_text)
    rejected = 0
    for replicate in range(runs):
        data, _ = gen_spatial_data(config, replicate)
        result = estimate(data, PipelineSettings(zeta_reps=1000), seed=[seed, replicate])
        outcome = gof_test(result.c_hat, result.xi, data.n, model, result.zeta,
                           lag_scale=data.lag_scale)
        rejected += outcome.reject_at[0.05]
    return rejected / runs


def test_gof_null_rejection_rate():
    assert 0.005 <= gof_rejections("gaussian:sill=2,range=3", 200, 200, seed=31) <= 0.12


def test_gof_power_against_a_wrong_family():
    assert gof_rejections("spherical:sill=2,range=1", 200, 30, seed=37) >= 0.8
