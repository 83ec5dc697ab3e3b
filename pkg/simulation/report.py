"""
This module aggregates replicate outcomes into a simulation report and lays
it out as JSON, as a one-row CSV summary table, and
as a Markdown summary.
"""
from dataclasses import dataclass, field

import numpy as np

from simulation.metrics import alpha_key

TABLE_COLUMNS = ("name", "N", "n", "sigma_eps", "AMSE_Chat", "AMSE_Ctilde",
                 "CR95", "WD95", "CR99", "WD99")

AMSE_FIELDS = ("amse_C", "amse_Ctilde", "amse_lambda", "amse_G", "amse_phi", "amse_phi_unaligned")


@dataclass(frozen=True)
class SimReport:
    """
    Averages over the successful replicates of one configuration.

    Attributes:
        config (SimConfig): The experiment.
        reps_done (int): Successful replicates.
        failures (list): (index, message) of failed replicates.
        amse (dict): Field name -> mean AMSE.
        cr (dict): alpha -> coverage of the band centred at C_hat.
        cr_tilde (dict): alpha -> coverage of the band centred at C_tilde.
        wd (dict): alpha -> mean band width.
        mean_kappa (float), mean_knots (float): Average selected kappa and J_s.
        xi_zero (float): Mean plug-in Xi_hat(0).
        xi_zero_truth (float): Theoretical Xi(0) (Fourier design only).
    """
    config: object = field(repr=False)
    reps_done: int
    failures: list
    amse: dict
    cr: dict
    cr_tilde: dict
    wd: dict
    mean_kappa: float
    mean_knots: float
    xi_zero: float
    xi_zero_truth: float = None

    @property
    def seed(self):
        return self.config.seed

    def to_dict(self):
        return {
            "config": self.config.report_dict(),
            "run_key": self.config.run_key(),
            "seed": self.seed,
            "reps_requested": self.config.reps,
            "reps_done": self.reps_done,
            "failures": [{"index": index, "error": message} for index, message in self.failures],
            "amse": self.amse,
            "cr": self.cr,
            "cr_tilde": self.cr_tilde,
            "wd": self.wd,
            "mean_kappa": self.mean_kappa,
            "mean_knots": self.mean_knots,
            "xi_zero": self.xi_zero,
            "xi_zero_truth": self.xi_zero_truth,
        }

    def table_row(self):
        """Values for ``TABLE_COLUMNS``; levels missing from the run are left empty."""
        config = self.config
        return [
            config.name, config.N, config.n, config.sigma_eps,
            self.amse["amse_C"], self.amse["amse_Ctilde"],
            self.cr.get(alpha_key(0.05), ""), self.wd.get(alpha_key(0.05), ""),
            self.cr.get(alpha_key(0.01), ""), self.wd.get(alpha_key(0.01), ""),
        ]


def _mean(values):
    return float(np.mean(values)) if values else None


def summarize(config, outcomes, xi_zero_truth=None):
    """
    Reduce outcomes (in replicate order) to a SimReport.

    Args:
        config (SimConfig): The experiment.
        outcomes (list of ReplicateOutcome): One per replicate, sorted by index.
        xi_zero_truth (float, optional): Theoretical Xi(0).
    """
    done = [o for o in sorted(outcomes, key=lambda o: o.index) if not o.failed]
    failures = [(o.index, o.error) for o in sorted(outcomes, key=lambda o: o.index) if o.failed]
    keys = [alpha_key(alpha) for alpha in config.alphas]
    return SimReport(
        config=config,
        reps_done=len(done),
        failures=failures,
        amse={name: _mean([getattr(o, name) for o in done]) for name in AMSE_FIELDS},
        cr={key: _mean([float(o.coverage[key]) for o in done]) for key in keys},
        cr_tilde={key: _mean([float(o.coverage_tilde[key]) for o in done]) for key in keys},
        wd={key: _mean([o.width[key] for o in done]) for key in keys},
        mean_kappa=_mean([o.kappa for o in done]),
        mean_knots=_mean([o.interior_knots for o in done]),
        xi_zero=_mean([o.xi_zero for o in done]),
        xi_zero_truth=xi_zero_truth,
    )
