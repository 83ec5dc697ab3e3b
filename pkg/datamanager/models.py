"""
This module defines the database models of the replicate store:
- SimulationRun: one simulation configuration, identified by its run key.
- ReplicateRecord: the stored metrics of one replicate of a run.

``db_session`` is the scoped session shared by the store and the
``transactional`` decorator; ``SQLiteReplicateStore`` binds it to an engine.
"""
import json

from sqlalchemy import Column, DateTime, ForeignKey, Integer, String, Text, UniqueConstraint, func
from sqlalchemy.orm import declarative_base, relationship, scoped_session, sessionmaker

Base = declarative_base()

db_session = scoped_session(sessionmaker())


class BaseModel(Base):
    """
    A base model that provides a `to_dict` method for all child classes.
    """
    __abstract__ = True  # Mark this class as abstract; it won't be created as a table.

    def to_dict(self):
        """
        Converts all column attributes of the model into a dictionary.
        """
        return {column.name: getattr(self, column.name) for column in self.__table__.columns}


class SimulationRun(BaseModel):
    """
    A simulation configuration whose replicates are stored.

    Attributes:
        id (int): The unique identifier of the run.
        run_key (str): SHA-256 of the canonical configuration.
        config_json (str): The configuration as canonical JSON.
        created_at (datetime): When the run was first registered.
    """
    __tablename__ = 'simulation_runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_key = Column(String(64), nullable=False, unique=True)
    config_json = Column(Text, nullable=False)
    created_at = Column(DateTime, default=func.now())

    # Relationship to ReplicateRecord with cascading delete behavior
    replicates = relationship(
        'ReplicateRecord',
        back_populates='run',
        cascade="all, delete-orphan"
    )

    @property
    def config(self):
        return json.loads(self.config_json)


class ReplicateRecord(BaseModel):
    """
    The outcome of one replicate.

    Attributes:
        id (int): The unique identifier of the record.
        run_id (int): The run the replicate belongs to.
        replicate_index (int): Index r of the replicate within the run.
        outcome_json (str): The ReplicateOutcome as JSON.
    """
    __tablename__ = 'replicate_records'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('simulation_runs.id', ondelete="CASCADE"), nullable=False)
    replicate_index = Column(Integer, nullable=False)
    outcome_json = Column(Text, nullable=False)

    run = relationship('SimulationRun', back_populates='replicates')

    # One record per replicate of a run
    __table_args__ = (
        UniqueConstraint('run_id', 'replicate_index', name='unique_run_replicate'),
    )

    @property
    def outcome(self):
        return json.loads(self.outcome_json)
