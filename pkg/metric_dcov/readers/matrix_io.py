"""Readers for distance matrices, point files and graph edge lists.

Supported layouts:

    matrix.csv      square numeric grid, no header
    matrix.json     {"n": 3, "d": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]}
    points.csv      one observation per row, numeric columns are coordinates,
                    optional header row
    labels.csv      one label per row (discrete and graph metrics)
    edges.csv       u,v[,w] per row, optional header; w defaults to 1
"""

import csv
import json
import logging
import pathlib
import re

import numpy as np
import pandas as pd

from ..errors import InputError
from .utils import convert_to_number, is_number

logger = logging.getLogger(__name__)


def _check_field_counts(file_path: pathlib.Path):
    """Every non-blank line must have as many fields as the first one."""
    with open(file_path, newline="") as f:
        reader = csv.reader(f)
        expected = None
        for row in reader:
            if row in ([], [""]):
                continue
            if expected is None:
                expected = len(row)
            elif len(row) != expected:
                raise InputError(
                    f"Ragged row in {file_path} at line {reader.line_num}:"
                    f" expected {expected} fields, found {len(row)}"
                )


def _read_csv_cells(file_path: pathlib.Path) -> pd.DataFrame:
    """Read a CSV file as a frame of raw strings; ragged rows are refused with their line."""
    if not file_path.exists():
        raise FileNotFoundError(f"No such file: {file_path}")
    _check_field_counts(file_path)
    try:
        return pd.read_csv(
            file_path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError:
        raise InputError(f"Empty file: {file_path}")
    except pd.errors.ParserError as e:
        line = re.search(r"line (\d+)", str(e))
        location = f" at line {line.group(1)}" if line else ""
        raise InputError(f"Malformed CSV in {file_path}{location}: {e}")


def _numeric_grid(cells: pd.DataFrame, file_path, first_line: int = 1) -> np.ndarray:
    """Convert a frame of text cells to floats, locating the first bad cell."""
    values = np.empty(cells.shape, dtype=float)
    for row_idx, row in enumerate(cells.itertuples(index=False)):
        for col_idx, cell in enumerate(row):
            if not is_number(cell):
                raise InputError(
                    f"Parse error in {file_path} at line {row_idx + first_line},"
                    f" column {col_idx + 1}: {cell!r} is not a finite number"
                )
            values[row_idx, col_idx] = convert_to_number(cell)
    return values


def read_matrix_csv(file_path) -> np.ndarray:
    file_path = pathlib.Path(file_path)
    cells = _read_csv_cells(file_path)
    values = _numeric_grid(cells, file_path)
    if values.shape[0] != values.shape[1]:
        raise InputError(
            f"Matrix in {file_path} is not square: {values.shape[0]} rows"
            f" x {values.shape[1]} columns"
        )
    logger.debug(f"loaded {values.shape[0]}x{values.shape[1]} matrix from {file_path}")
    return values


def read_matrix_json(file_path) -> np.ndarray:
    file_path = pathlib.Path(file_path)
    if not file_path.exists():
        raise FileNotFoundError(f"No such file: {file_path}")
    try:
        with open(file_path, "r") as f:
            content = json.load(f)
    except json.JSONDecodeError as e:
        raise InputError(
            f"Parse error in {file_path} at line {e.lineno}, column {e.colno}: {e.msg}"
        )
    return matrix_from_dict(content, source=file_path)


def matrix_from_dict(content, source="<json>") -> np.ndarray:
    """Validate the ``{"n": int, "d": [[...]]}`` schema (a bare nested list is also accepted)."""
    if isinstance(content, list):
        content = {"n": len(content), "d": content}
    if not isinstance(content, dict) or "d" not in content:
        raise InputError(f'{source}: expected an object with keys "n" and "d"')

    rows = content["d"]
    n = content.get("n", len(rows))
    if not isinstance(rows, list) or len(rows) != n:
        raise InputError(f'{source}: "n" is {n} but "d" has {len(rows)} rows')
    for row_idx, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise InputError(
                f"{source}: row {row_idx} has"
                f" {len(row) if isinstance(row, list) else 'no'} entries, expected {n}"
            )
        for col_idx, value in enumerate(row):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InputError(
                    f"{source}: entry ({row_idx}, {col_idx}) is not a number: {value!r}"
                )
    return np.array(rows, dtype=float).reshape(n, n)


def read_matrix(file_path, file_format: str = None) -> np.ndarray:
    """Read a square matrix; ``file_format`` is "csv" or "json" (inferred from the suffix if None)."""
    file_path = pathlib.Path(file_path)
    file_format = (file_format or file_path.suffix.lstrip(".") or "csv").lower()
    if file_format == "csv":
        return read_matrix_csv(file_path)
    elif file_format == "json":
        return read_matrix_json(file_path)
    else:
        raise InputError(
            f'Unsupported matrix format: {file_format} - must be "csv" or "json"'
        )


def read_points_csv(file_path) -> tuple:
    """Read an observation-per-row coordinate file.

    Returns:
        tuple: (coords (n x p ndarray), column names or None)
    """
    file_path = pathlib.Path(file_path)
    cells = _read_csv_cells(file_path)

    header = None
    first = cells.iloc[0].tolist()
    if not all(is_number(c) for c in first if isinstance(c, str)):
        header = [str(c).strip() for c in first]
        cells = cells.iloc[1:].reset_index(drop=True)
        if cells.empty:
            raise InputError(f"{file_path} has a header but no observations")

    coords = _numeric_grid(cells, file_path, first_line=2 if header else 1)
    logger.debug(
        f"loaded {coords.shape[0]} points of dimension {coords.shape[1]} from {file_path}"
    )
    return coords, header


def read_labels_csv(file_path, header: bool = False) -> list:
    """Read one label per row (first column)."""
    file_path = pathlib.Path(file_path)
    cells = _read_csv_cells(file_path)
    labels = [str(c).strip() for c in cells.iloc[:, 0].tolist()]
    if header:
        labels = labels[1:]
    for row_idx, label in enumerate(labels):
        if not label:
            raise InputError(
                f"Empty label in {file_path} at line {row_idx + 1 + int(header)}"
            )
    return labels


def read_edges_csv(file_path) -> list:
    """Read a ``u,v[,w]`` edge list into ``[(u, v, w), ...]`` with string vertex names."""
    file_path = pathlib.Path(file_path)
    cells = _read_csv_cells(file_path)
    if cells.shape[1] not in (2, 3):
        raise InputError(
            f"Edge list {file_path} must have 2 or 3 columns, found {cells.shape[1]}"
        )

    first_line = 1
    if cells.shape[1] == 3 and not is_number(cells.iloc[0, 2]):
        cells = cells.iloc[1:].reset_index(drop=True)
        first_line = 2

    edges = []
    for row_idx, row in enumerate(cells.itertuples(index=False)):
        u, v = str(row[0]).strip(), str(row[1]).strip()
        w = row[2] if len(row) == 3 else "1"
        if not isinstance(w, str) or not is_number(w):
            raise InputError(
                f"Parse error in {file_path} at line {row_idx + first_line},"
                f" column 3: {w!r} is not a finite number"
            )
        edges.append((u, v, convert_to_number(w)))
    return edges
