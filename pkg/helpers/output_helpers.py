"""
This module defines helper functions for writing the result files of the
command line. JSON documents share one envelope so every output reads the
same way:

    {"status": "success" | "error", "message": ..., "data": ...}

Floats are written with ``repr`` (shortest round-trip form), so reading a
file back gives the exact same doubles and reruns produce identical bytes.
"""
import csv
import json
from pathlib import Path

import numpy as np


def create_success_document(message=None, data=None):
    """
    Create a standardized success document.

    Args:
        message (str, optional): A message describing the result. Defaults to None.
        data (any, optional): The result payload. Defaults to None.

    Returns:
        dict: A document with a success status.
    """
    return create_document('success', message, data)


def create_error_document(message=None, data=None):
    """
    Create a standardized error document.

    Args:
        message (str, optional): A message describing the error. Defaults to None.
        data (any, optional): Additional data to include. Defaults to None.

    Returns:
        dict: A document with an error status.
    """
    return create_document('error', message, data)


def create_document(status, message=None, data=None):
    """
    Create a standardized document with a given status.

    Args:
        status (str): The status of the document, e.g., 'success' or 'error'.
        message (str, optional): A message describing the document. Defaults to None.
        data (any, optional): The payload. Defaults to None.

    Returns:
        dict: The document, with numpy values converted to plain Python.
    """
    document = {'status': status}
    if message:
        document['message'] = message
    if data is not None:
        document['data'] = to_builtin(data)
    return document


def to_builtin(value):
    """Recursively convert numpy scalars/arrays and tuples into JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_json(path, document):
    """Write ``document`` as indented JSON with a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_builtin(document), indent=2, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def write_csv(path, header, rows):
    """Write a header and rows; floats use their shortest round-trip form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    return path


def write_columns(path, columns):
    """Write a dict of equal-length columns (name -> sequence) as CSV."""
    names = list(columns)
    return write_csv(path, names, zip(*(columns[name] for name in names)))


def write_matrix(path, matrix):
    """Write a 2-D array as header-less CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for row in np.asarray(matrix, dtype=float):
            writer.writerow([repr(float(v)) for v in row])
    return path
