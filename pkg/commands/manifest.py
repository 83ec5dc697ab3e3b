"""
This module defines the run manifest written next to every command output.

A manifest records the exact command line, the resolved configuration with
all defaults filled in, the seed, the tool version, digests of the input
files and the outputs written. ``rerun`` replays the recorded command line.
"""
import hashlib
import platform
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from covariance import __version__
from covariance.errors import DataError, InvalidParameterError
from helpers.logger import logger
from helpers.output_helpers import create_success_document, read_json, write_json

MANIFEST_NAME = "manifest.json"


def file_digest(path):
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """
    Provenance of one command run.

    Attributes:
        command (str): Sub-command name.
        argv (list): Arguments after the program name, as given.
        inputs (dict): Input path -> SHA-256.
        config (dict): Resolved configuration.
        seed (object): Root seed.
        version (str): Tool version.
        python (str): Interpreter version.
        started_at (str): UTC start time, ISO 8601.
        wall_clock_seconds (float): Elapsed time.
        outputs (list): Paths written.
    """
    command: str
    argv: list
    inputs: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    seed: object = None
    version: str = __version__
    python: str = field(default_factory=platform.python_version)
    started_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    wall_clock_seconds: float = None
    outputs: list = field(default_factory=list)
    _clock: float = field(default_factory=time.perf_counter, repr=False)

    def add_input(self, path):
        self.inputs[str(path)] = file_digest(path)

    def add_output(self, path):
        self.outputs.append(str(path))

    def to_dict(self):
        values = asdict(self)
        values.pop("_clock")
        return values

    def write(self, out_dir):
        """Stop the clock and write ``manifest.json`` into ``out_dir``."""
        self.wall_clock_seconds = round(time.perf_counter() - self._clock, 3)
        path = Path(out_dir) / MANIFEST_NAME
        write_json(path, create_success_document(f"{self.command} run manifest", self.to_dict()))
        logger.info(f"Manifest written to {path}")
        return path


def load_manifest(path):
    """
    Read a manifest and check that its inputs are unchanged.

    Returns:
        dict: The manifest fields.

    Raises:
        InvalidParameterError: If the file is not a manifest.
        DataError: If an input file is missing or changed since the run.
    """
    try:
        document = read_json(path)
    except (OSError, ValueError) as err:
        raise InvalidParameterError(f"cannot read manifest {path}: {err}") from err
    manifest = document.get("data") if isinstance(document, dict) else None
    if not isinstance(manifest, dict) or not isinstance(manifest.get("argv"), list):
        raise InvalidParameterError(f"{path} is not a run manifest")
    for input_path, digest in manifest.get("inputs", {}).items():
        if not Path(input_path).exists():
            raise DataError(f"input {input_path} recorded in the manifest no longer exists")
        if file_digest(input_path) != digest:
            raise DataError(f"input {input_path} changed since the recorded run")
    return manifest
