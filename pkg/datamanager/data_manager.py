"""
This module defines an abstract interface for storing Monte-Carlo replicate
outcomes. A store lets an interrupted or extended simulation reuse the
replicates it already computed. Implementations of this interface must define
all abstract methods to interact with the underlying data store.
"""

from abc import ABC, abstractmethod


class ReplicateStoreInterface(ABC):
    """
    Abstract base class for replicate storage.

    Outcomes are plain dictionaries (``ReplicateOutcome.to_dict()``), keyed by
    the run key of the configuration and the replicate index.
    """

    @abstractmethod
    def register_run(self, run_key, config):
        """
        Record a run configuration if it is not stored yet.

        :param run_key: SHA-256 identifying the configuration.
        :param config: The configuration as a dictionary.
        :return: True when the run was new.
        """
        pass

    @abstractmethod
    def get_outcomes(self, run_key, indices):
        """
        Retrieve stored outcomes of a run.

        :param run_key: The run key.
        :param indices: Replicate indices of interest.
        :return: A dict mapping each stored index to its outcome dictionary.
        """
        pass

    @abstractmethod
    def save_outcome(self, run_key, index, outcome):
        """
        Store the outcome of one replicate.

        :param run_key: The run key (the run must be registered).
        :param index: The replicate index.
        :param outcome: The outcome dictionary.
        """
        pass

    @abstractmethod
    def delete_run(self, run_key):
        """
        Delete a run and all of its replicates.

        :param run_key: The run key.
        :return: True when a run was deleted.
        """
        pass
