"""
This module defines the ``simulate`` command: Monte-Carlo replication of the
estimation pipeline from a configuration file.

Outputs: report.json, table.csv (one summary row), report.md,
manifest.json.
"""
from pathlib import Path

from commands.manifest import RunManifest
from datamanager.sqlite_data_manager import SQLiteReplicateStore
from decorators.command_decorators import handle_command_errors
from helpers.logger import logger
from helpers.output_helpers import create_success_document, write_csv, write_json
from helpers.report_helpers import write_report
from helpers.settings import default_store_path, default_workers
from simulation.config import load_config
from simulation.harness import run_replications
from simulation.report import TABLE_COLUMNS
from storage import PATH as STORE_PATH


def add_simulation_arguments(parser):
    parser.add_argument("--config", required=True, help="TOML, JSON or key=value config file")
    parser.add_argument("--seed", type=int, help="root seed (required unless set in the config)")
    parser.add_argument("--reps", type=int, help="override the number of replications")
    parser.add_argument("--workers", type=int, help="worker processes (default COVBAND_WORKERS)")
    parser.add_argument("--store", nargs="?", const=STORE_PATH,
                        help="SQLite replicate store; bare --store uses storage/replicates.sqlite "
                             "(default COVBAND_STORE)")
    parser.add_argument("--no-store", action="store_true", help="ignore COVBAND_STORE")
    parser.add_argument("--out", default="covband_output", help="output directory")


def _open_store(args):
    path = None if args.no_store else (args.store or default_store_path())
    if path is None:
        return None
    logger.info(f"Using replicate store {path}")
    return SQLiteReplicateStore(path)


@handle_command_errors()
def cmd_simulate(args):
    """Run the configured replications and write the report files."""
    manifest = RunManifest(command="simulate", argv=list(getattr(args, "argv", [])))
    config = load_config(args.config, seed=args.seed, reps=args.reps, workers=args.workers)
    manifest.add_input(args.config)
    workers = config.workers or default_workers()

    store = _open_store(args)
    try:
        report = run_replications(config, workers=workers, store=store)
    finally:
        if store is not None:
            store.close()

    out = Path(args.out)
    manifest.add_output(write_json(out / "report.json", create_success_document(
        f"{report.reps_done} of {config.reps} replications of '{config.name}'", report.to_dict())))
    manifest.add_output(write_csv(out / "table.csv", TABLE_COLUMNS, [report.table_row()]))
    manifest.add_output(write_report(out / "report.md", "simulation_report.md.j2",
                                     report=report, run_key=config.run_key(), shape=config.shape))
    manifest.config = config.to_dict()
    manifest.seed = config.seed
    manifest.write(out)
