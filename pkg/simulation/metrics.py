"""
This module scores one replicate against its truth: average mean squared
errors of the estimates, band coverage and band width.
"""
from dataclasses import asdict, dataclass, field

import numpy as np

from covariance.band import scb
from covariance.covest import CovCurve


@dataclass(frozen=True)
class ReplicateOutcome:
    """
    Metrics of one replicate, or the reason it failed.

    Coverage and width maps are keyed by alpha formatted with ``:g`` so the
    outcome survives a JSON round trip unchanged.
    """
    index: int
    amse_C: float = None
    amse_Ctilde: float = None
    amse_lambda: float = None
    amse_G: float = None
    amse_phi: float = None
    amse_phi_unaligned: float = None
    coverage: dict = field(default_factory=dict)
    coverage_tilde: dict = field(default_factory=dict)
    width: dict = field(default_factory=dict)
    kappa: int = None
    interior_knots: int = None
    xi_zero: float = None
    error: str = None

    @property
    def failed(self):
        return self.error is not None

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, values):
        return cls(**values)


def alpha_key(alpha):
    return f"{alpha:g}"


def amse_curve(estimate, truth):
    """Mean over the lag grid of the squared error."""
    return float(np.mean((np.asarray(estimate) - np.asarray(truth)) ** 2))


def amse_lambda(lambdas_hat, lambdas_true, kappa):
    """Mean over k <= kappa of (lambda_hat_k - lambda_k)^2; missing true values count as 0."""
    truth = np.zeros(kappa)
    available = min(kappa, len(lambdas_true))
    truth[:available] = lambdas_true[:available]
    return float(np.mean((np.asarray(lambdas_hat[:kappa]) - truth) ** 2))


def amse_surface(surface_hat, surface_true):
    """Mean over the N x N grid of the squared error."""
    return float(np.mean((surface_hat - surface_true) ** 2))


def amse_phi(phi_hat, phi_true, align=True):
    """
    Mean over k <= kappa and the grid of (phi_hat_k - phi_k)^2.

    With ``align`` each phi_hat_k is flipped when that brings it closer to phi_k.
    """
    kappa = phi_hat.shape[0]
    truth = np.zeros_like(phi_hat)
    available = min(kappa, phi_true.shape[0])
    truth[:available] = phi_true[:available]
    if align:
        signs = np.where(np.sum(phi_hat * truth, axis=1) < 0, -1.0, 1.0)
        phi_hat = phi_hat * signs[:, None]
    return float(np.mean((phi_hat - truth) ** 2))


def score_replicate(index, result, truth, c_tilde):
    """
    Metrics of one finished pipeline run.

    Args:
        index (int): Replicate index.
        result (PipelineResult): The estimates.
        truth (Truth): What the data were drawn from.
        c_tilde (CovCurve): The oracle estimate on the same lags.

    Returns:
        ReplicateOutcome: The scored replicate.
    """
    h_grid = result.h_grid
    true_c = truth.covariance(h_grid)
    grid = result.data.grid
    fpca = result.fpca
    phi_hat = fpca.eigenfunctions(grid)

    coverage, coverage_tilde, width = {}, {}, {}
    for alpha, (simultaneous, _) in result.bands.items():
        key = alpha_key(alpha)
        coverage[key] = simultaneous.contains(true_c)
        oracle_band = scb(CovCurve(h_grid, c_tilde.values, kind="C_hat"), result.xi,
                          simultaneous.q, simultaneous.n)
        coverage_tilde[key] = oracle_band.contains(true_c)
        width[key] = simultaneous.width

    return ReplicateOutcome(
        index=index,
        amse_C=amse_curve(result.c_hat.values, true_c),
        amse_Ctilde=amse_curve(c_tilde.values, true_c),
        amse_lambda=amse_lambda(fpca.lambdas, truth.lambdas, fpca.kappa),
        amse_G=amse_surface(result.surface.evaluate(grid), truth.surface),
        amse_phi=amse_phi(phi_hat, truth.phi, align=True),
        amse_phi_unaligned=amse_phi(phi_hat, truth.phi, align=False),
        coverage=coverage,
        coverage_tilde=coverage_tilde,
        width=width,
        kappa=int(fpca.kappa),
        interior_knots=int(result.basis.interior_knots),
        xi_zero=float(result.xi.values[0]),
    )
