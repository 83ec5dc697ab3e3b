import os

import hypothesis
import numpy as np
import pytest

from covariance.bspline import make_basis
from covariance.fpca import FpcaResult
from simulation.config import build_config
from simulation.generators import gen_fourier_data

np.seterr(all="warn")

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    """Keep tests away from a developer's .env store and worker settings."""
    monkeypatch.setenv("COVBAND_STORE", "")
    monkeypatch.setenv("COVBAND_WORKERS", "1")


@pytest.fixture
def fourier_config():
    return build_config({"name": "test", "generator": "fourier", "N": 50, "zeta_reps": 200,
                         "reps": 2, "seed": 11})


@pytest.fixture
def fourier_replicate(fourier_config):
    return gen_fourier_data(fourier_config, 0)


@pytest.fixture
def fourier_dataset(fourier_replicate):
    return fourier_replicate[0]


def make_fpca(phi_coeffs, fourth_moments, basis=None, grid_size=200):
    """Hand-built FPCA result with kappa = number of rows of ``phi_coeffs``."""
    phi_coeffs = np.atleast_2d(np.asarray(phi_coeffs, dtype=float))
    kappa = phi_coeffs.shape[0]
    basis = basis or make_basis(4, phi_coeffs.shape[1] - 4)
    return FpcaResult(
        basis=basis,
        lambdas=np.ones(kappa),
        psi_coeffs=phi_coeffs,
        phi_coeffs=phi_coeffs,
        kappa=kappa,
        scores=None,
        fourth_moments=np.asarray(fourth_moments, dtype=float),
        grid_size=grid_size,
    )
