"""
This module runs the estimation pipeline end to end:

    knots -> trajectory fits -> C_hat -> FPCA -> Xi_hat -> zeta simulation -> bands

Every stage is wrapped by ``@stage`` so errors leaving the pipeline carry the
name of the stage that failed. ``PipelineSettings`` holds the tuning constants
shared by the command line and the simulation harness.
"""
from dataclasses import asdict, dataclass, field

import numpy as np

from covariance.band import critical_value, pointwise_band, scb, simulate_zeta
from covariance.bspline import KNOT_METHODS, design_matrix, make_basis, select_knots
from covariance.covest import covariance_curve, covariance_surface, default_h_grid, \
    fit_trajectories, lag_gram
from covariance.errors import ConfigError
from covariance.fpca import run_fpca, variance_function
from decorators.pipeline_decorators import stage
from helpers.logger import logger

# Substream key separating the zeta draws from data-generating draws of the same seed.
ZETA_STREAM = 7


@dataclass(frozen=True)
class PipelineSettings:
    """
    Tuning constants of the estimator and the band.

    Attributes:
        order (int): Spline order p.
        knots (str or int): Knot selection method (formula, gcv, bic) or a fixed J_s.
        knot_c (float): Constant c of the knot formula.
        knot_gamma (float): Exponent gamma of the knot formula.
        h0 (float): Largest lag, in (0, 1).
        fve (float): Fraction of variance explained that selects kappa.
        zeta_reps (int): Number of simulated zeta paths.
        alphas (tuple): Significance levels of the bands.
        quad_points (int): Trapezoid abscissae per lag; None means N.
    """
    order: int = 4
    knots: object = "formula"
    knot_c: float = 0.8
    knot_gamma: float = 0.375
    h0: float = 0.5
    fve: float = 0.95
    zeta_reps: int = 1000
    alphas: tuple = (0.05, 0.01)
    quad_points: int = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def problems(self):
        """Every invalid setting, as messages."""
        problems = []
        if not isinstance(self.order, int) or self.order < 1:
            problems.append(f"order must be an integer >= 1, got {self.order!r}")
        if isinstance(self.knots, bool) or not (
                self.knots in KNOT_METHODS or (isinstance(self.knots, int) and self.knots >= 0)):
            problems.append(
                f"knots must be one of {', '.join(KNOT_METHODS)} or an integer >= 0, "
                f"got {self.knots!r}")
        if not self.knot_c > 0:
            problems.append(f"knot_c must be positive, got {self.knot_c!r}")
        if not 0 < self.knot_gamma < 1:
            problems.append(f"knot_gamma must lie in (0, 1), got {self.knot_gamma!r}")
        if not 0 < self.h0 < 1:
            problems.append(f"h0 must lie in (0, 1), got {self.h0!r}")
        if not 0 < self.fve <= 1:
            problems.append(f"fve must lie in (0, 1], got {self.fve!r}")
        if not isinstance(self.zeta_reps, int) or self.zeta_reps < 100:
            problems.append(f"zeta_reps must be an integer >= 100, got {self.zeta_reps!r}")
        if not self.alphas or any(not 0 < a < 1 for a in self.alphas):
            problems.append(f"alphas must be a non-empty list in (0, 1), got {list(self.alphas)}")
        if self.quad_points is not None and (
                not isinstance(self.quad_points, int) or self.quad_points < 2):
            problems.append(f"quad_points must be an integer >= 2, got {self.quad_points!r}")
        return problems

    def to_dict(self):
        result = asdict(self)
        result["alphas"] = list(self.alphas)
        return result


@dataclass(frozen=True)
class PipelineResult:
    """
    Everything the pipeline computed for one dataset.

    ``bands`` maps each alpha to a (simultaneous, pointwise) pair of BandResult.
    """
    data: object = field(repr=False)
    settings: PipelineSettings
    basis: object
    fits: object = field(repr=False)
    surface: object = field(repr=False)
    c_hat: object = field(repr=False)
    fpca: object = field(repr=False)
    xi: object = field(repr=False)
    zeta: np.ndarray = field(repr=False)
    bands: dict = field(repr=False)
    grams: np.ndarray = field(repr=False)

    @property
    def h_grid(self):
        return self.c_hat.h_grid

    @property
    def kappa(self):
        return self.fpca.kappa

    def critical_values(self):
        return {alpha: simultaneous.q for alpha, (simultaneous, _) in self.bands.items()}


@stage("knots")
def choose_basis(data, settings):
    """Spline basis with J_s from the configured method (or the fixed count)."""
    if isinstance(settings.knots, int):
        interior = settings.knots
    else:
        interior = select_knots(data.Y, settings.order, settings.knots,
                                settings.knot_c, settings.knot_gamma)
    logger.debug(f"Using order {settings.order} with {interior} interior knots")
    return make_basis(settings.order, interior)


@stage("fit")
def fit_stage(data, basis):
    return fit_trajectories(data, basis)


@stage("covariance")
def covariance_stage(data, fits, settings):
    h_grid = default_h_grid(data.N, settings.h0)
    grams = lag_gram(fits.basis, h_grid, settings.quad_points or data.N)
    return covariance_curve(fits, h_grid, grams=grams), covariance_surface(fits), grams


@stage("fpca")
def fpca_stage(data, fits, surface, settings):
    return run_fpca(data, fits, surface, design_matrix(fits.basis, data.N), settings.fve)


@stage("variance")
def variance_stage(fpca, c_hat, grams):
    return variance_function(fpca, c_hat, grams=grams)


@stage("simulate")
def simulation_stage(fpca, c_hat, grams, settings, seed):
    return simulate_zeta(fpca, c_hat.h_grid, settings.zeta_reps, seed, grams=grams)


@stage("band")
def band_stage(c_hat, xi, zeta, n, alphas):
    bands = {}
    for alpha in sorted(alphas, reverse=True):
        q = critical_value(zeta, xi, alpha)
        bands[alpha] = (scb(c_hat, xi, q, n, level=1.0 - alpha),
                        pointwise_band(c_hat, xi, alpha, n))
    return bands


def zeta_seed(seed):
    """Entropy of the zeta substream for a root seed (int or sequence)."""
    root = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    return root + [ZETA_STREAM]


def estimate(data, settings=None, seed=0):
    """
    Run the full pipeline on a dataset.

    Args:
        data (FunctionalDataset): The observations.
        settings (PipelineSettings, optional): Defaults to ``PipelineSettings()``.
        seed (int or sequence of int): Root entropy of the zeta simulation.

    Returns:
        PipelineResult: Fits, estimates, simulated paths and bands.
    """
    settings = settings or PipelineSettings()
    basis = choose_basis(data, settings)
    fits = fit_stage(data, basis)
    c_hat, surface, grams = covariance_stage(data, fits, settings)
    fpca = fpca_stage(data, fits, surface, settings)
    xi = variance_stage(fpca, c_hat, grams)
    zeta = simulation_stage(fpca, c_hat, grams, settings, zeta_seed(seed))
    bands = band_stage(c_hat, xi, zeta, data.n, settings.alphas)
    logger.info(f"Pipeline finished: n={data.n}, N={data.N}, J_s={basis.interior_knots}, "
                f"kappa={fpca.kappa}")
    return PipelineResult(
        data=data, settings=settings, basis=basis, fits=fits, surface=surface,
        c_hat=c_hat, fpca=fpca, xi=xi, zeta=zeta, bands=bands, grams=grams,
    )
