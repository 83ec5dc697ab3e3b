"""
This module provides the implementation of the ReplicateStoreInterface using SQLite as the database.
It stores simulation runs and the outcome of every replicate so that a
simulation can be resumed or extended without recomputing finished replicates.

Classes:
    SQLiteReplicateStore (ReplicateStoreInterface):
                      A class that handles replicate outcomes in an SQLite database.
"""
import json
from pathlib import Path

from sqlalchemy import create_engine, select

from datamanager.data_manager import ReplicateStoreInterface
from datamanager.models import Base, ReplicateRecord, SimulationRun, db_session
from decorators.db_decorators import requires_run, transactional
from helpers.logger import logger


class SQLiteReplicateStore(ReplicateStoreInterface):
    """
    A class that implements the ReplicateStoreInterface using SQLite as the database.
    """

    def __init__(self, path):
        """
        Initializes the store, creating the database file and tables if needed.

        Args:
            path (str or Path): Location of the SQLite file.
        """
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.engine = create_engine(f"sqlite:///{self.path}")
        Base.metadata.create_all(self.engine)
        db_session.remove()
        db_session.configure(bind=self.engine)
        self.session = db_session
        logger.debug(f"Replicate store opened at {self.path}")

    def close(self):
        """Release the session and the engine."""
        self.session.remove()
        self.engine.dispose()

    @transactional(db_session)
    def register_run(self, run_key, config):
        """
        Adds a run to the database if it does not already exist.

        Args:
            run_key (str): The run key.
            config (dict): The configuration.

        Returns:
            bool: True when the run was new.
        """
        exists = self.session.execute(
            select(SimulationRun.id).filter_by(run_key=run_key)
        ).first()
        if exists is not None:
            return False
        self.session.add(SimulationRun(
            run_key=run_key, config_json=json.dumps(config, sort_keys=True)))
        return True

    @requires_run(db_session, missing=dict)
    def get_outcomes(self, run, indices):
        """
        Retrieves the stored outcomes of a run for the given replicate indices.

        Args:
            run_key (str): The run key.
            indices (iterable of int): Replicate indices of interest.

        Returns:
            dict: Replicate index -> outcome dictionary, for stored indices only.
        """
        wanted = list(indices)
        records = self.session.execute(
            select(ReplicateRecord)
            .filter(ReplicateRecord.run_id == run.id)
            .filter(ReplicateRecord.replicate_index.in_(wanted))
        ).scalars().all()
        return {record.replicate_index: record.outcome for record in records}

    @transactional(db_session)
    @requires_run(db_session)
    def save_outcome(self, run, index, outcome):
        """
        Stores (or replaces) the outcome of one replicate.

        Args:
            run_key (str): The run key of a registered run.
            index (int): The replicate index.
            outcome (dict): The outcome dictionary.

        Raises:
            KeyError: If the run is not registered.
        """
        record = self.session.execute(
            select(ReplicateRecord).filter_by(run_id=run.id, replicate_index=index)
        ).scalar_one_or_none()
        payload = json.dumps(outcome, sort_keys=True)
        if record is None:
            self.session.add(ReplicateRecord(run=run, replicate_index=index, outcome_json=payload))
        else:
            record.outcome_json = payload

    @transactional(db_session)
    @requires_run(db_session, missing=lambda: False)
    def delete_run(self, run):
        """
        Deletes a run and (by cascade) all of its replicates.

        Args:
            run_key (str): The run key.

        Returns:
            bool: True when a run was deleted.
        """
        self.session.delete(run)
        return True
