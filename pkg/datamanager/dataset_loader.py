"""
This module reads functional datasets from CSV files.

One row per subject, N numeric columns. An optional first row gives the
observation grid in original units (``--grid-header``); it must be equally
spaced. Alternatively the original domain is given as ``(a, b)``. Either way
the data are analysed on the unit grid 1/N, ..., 1.

Every malformed cell is reported with its 1-based row and column.
"""
import csv
import math
from pathlib import Path

import numpy as np

from covariance.covest import FunctionalDataset
from covariance.errors import DataError, InvalidParameterError
from helpers.logger import logger

# Relative tolerance on the spacing of a header grid.
GRID_SPACING_RTOL = 1e-6


def _parse_cell(text, row, column):
    text = text.strip()
    if not text or text.lower() in ("na", "nan"):
        raise DataError(f"missing value at row {row}, column {column}")
    try:
        value = float(text)
    except ValueError as err:
        raise DataError(f"non-numeric value '{text}' at row {row}, column {column}") from err
    if not math.isfinite(value):
        raise DataError(f"non-finite value '{text}' at row {row}, column {column}")
    return value


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            return [(number, row) for number, row in enumerate(csv.reader(handle), start=1)
                    if any(cell.strip() for cell in row)]
    except OSError as err:
        raise DataError(f"cannot read dataset {path}: {err.strerror}") from err


def grid_domain(grid):
    """
    Original-unit domain (x_1 - delta, x_N) of an equally spaced grid x_1 < ... < x_N.

    Raises:
        DataError: If the grid is not strictly increasing and equally spaced.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise DataError("grid header needs at least 2 points")
    steps = np.diff(grid)
    if np.any(steps <= 0):
        raise DataError("grid header must be strictly increasing")
    delta = float(np.mean(steps))
    if not np.allclose(steps, delta, rtol=GRID_SPACING_RTOL, atol=0.0):
        raise DataError("grid header must be equally spaced")
    return float(grid[0] - delta), float(grid[-1])


def parse_domain(text):
    """Parse ``a,b`` into a (a, b) tuple with a < b."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        low, high = (float(p) for p in parts)
    except ValueError as err:
        raise InvalidParameterError(f"domain must look like 'a,b', got '{text}'") from err
    if not high > low:
        raise InvalidParameterError(f"domain must satisfy a < b, got '{text}'")
    return low, high


def load_dataset(path, grid_header=False, domain=None):
    """
    Load a FunctionalDataset from CSV.

    Args:
        path (str or Path): CSV file.
        grid_header (bool): The first row holds the grid in original units.
        domain (tuple, optional): Original domain (a, b); exclusive with ``grid_header``.

    Returns:
        FunctionalDataset: The observations, with domain metadata when given.

    Raises:
        DataError: On ragged rows, non-numeric or missing cells, a bad header grid.
    """
    if grid_header and domain is not None:
        raise InvalidParameterError("give either a grid header or a domain, not both")
    path = Path(path)
    rows = _read_rows(path)
    if grid_header:
        if not rows:
            raise DataError(f"dataset {path} is empty")
        number, header = rows.pop(0)
        grid = [_parse_cell(cell, number, column) for column, cell in enumerate(header, start=1)]
        domain = grid_domain(grid)
    if not rows:
        raise DataError(f"dataset {path} has no observation rows")

    width = len(rows[0][1])
    values = []
    for number, row in rows:
        if len(row) != width:
            raise DataError(f"ragged row {number}: {len(row)} values, expected {width}")
        values.append([_parse_cell(cell, number, column) for column, cell in enumerate(row, start=1)])
    if grid_header and width != len(grid):
        raise DataError(f"grid header has {len(grid)} points but rows have {width} values")

    data = FunctionalDataset(Y=np.array(values), domain=domain)
    logger.info(f"Loaded {data.n} curves on {data.N} points from {path}")
    return data


def save_dataset(path, data, grid_header=False):
    """Write a FunctionalDataset as CSV, optionally with its original grid as header."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        if grid_header:
            writer.writerow([repr(float(x)) for x in data.original_grid])
        for row in data.Y:
            writer.writerow([repr(float(v)) for v in row])
