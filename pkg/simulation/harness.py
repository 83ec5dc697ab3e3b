"""
This module runs Monte-Carlo replications of the estimation pipeline.

Replicate r generates its data from the substreams of (seed, r), runs the
full pipeline, and is scored against the truth. Replicates run in a process
pool; outcomes are reduced in replicate order, so the report does not depend
on the worker count. With a replicate store, finished replicates are reused
and new ones are saved as they complete.
"""
from concurrent.futures import ProcessPoolExecutor

from covariance.covest import oracle_covariance
from covariance.errors import DataError, NumericalError, SimulationAbortedError
from covariance.pipeline import estimate
from helpers.logger import logger
from simulation.generators import fourier_truth_variance, generate
from simulation.metrics import ReplicateOutcome, score_replicate
from simulation.report import summarize

# Largest tolerated fraction of failed replicates.
MAX_FAILURE_RATE = 0.05


def run_replicate(config, index):
    """
    Generate, estimate and score replicate ``index``.

    Data and numerical failures are returned as a failed outcome; anything
    else propagates.
    """
    try:
        data, truth = generate(config, index)
        result = estimate(data, config.pipeline_settings(), seed=[config.seed, index])
        c_tilde = oracle_covariance(truth.z, result.h_grid, quad_points=config.quad_points)
        return score_replicate(index, result, truth, c_tilde)
    except (DataError, NumericalError) as err:
        logger.warning(f"Replicate {index} failed: {err}")
        return ReplicateOutcome(index=index, error=f"{type(err).__name__}: {err}")


def _compute(config, indices, workers, on_outcome):
    if not indices:
        return []
    if workers <= 1 or len(indices) == 1:
        outcomes = []
        for index in indices:
            outcome = run_replicate(config, index)
            on_outcome(outcome)
            outcomes.append(outcome)
        return outcomes
    outcomes = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for outcome in pool.map(run_replicate, [config] * len(indices), indices):
            on_outcome(outcome)
            outcomes.append(outcome)
    return outcomes


def run_replications(config, workers=1, store=None):
    """
    Run ``config.reps`` replicates and summarize them.

    Args:
        config (SimConfig): The experiment.
        workers (int): Worker processes; 1 runs in-process.
        store (ReplicateStoreInterface, optional): Reuse and save replicate outcomes.

    Returns:
        SimReport: The aggregated report.

    Raises:
        SimulationAbortedError: If more than 5% of the replicates failed.
    """
    indices = list(range(config.reps))
    cached = {}
    run_key = config.run_key()
    if store is not None:
        store.register_run(run_key, config.to_dict())
        cached = {index: ReplicateOutcome.from_dict(values)
                  for index, values in store.get_outcomes(run_key, indices).items()}
        logger.info(f"Reusing {len(cached)} stored replicates of run {run_key[:12]}")

    def on_outcome(outcome):
        if store is not None:
            store.save_outcome(run_key, outcome.index, outcome.to_dict())

    missing = [index for index in indices if index not in cached]
    outcomes = list(cached.values()) + _compute(config, missing, workers, on_outcome)

    failed = sum(outcome.failed for outcome in outcomes)
    if failed > MAX_FAILURE_RATE * config.reps:
        raise SimulationAbortedError(
            f"{failed} of {config.reps} replicates failed (limit {MAX_FAILURE_RATE:.0%})",
            stage="simulate")
    if failed:
        logger.warning(f"{failed} of {config.reps} replicates failed and were excluded")

    xi_zero_truth = None
    if config.generator == "fourier":
        xi_zero_truth = float(fourier_truth_variance([0.0])[0])
    return summarize(config, outcomes, xi_zero_truth=xi_zero_truth)
