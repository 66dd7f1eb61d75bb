"""Result emission: JSON documents on stdout (or a file) and CSV tables."""

import json
import logging
import pathlib
import sys

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

# 17 significant digits round-trip any float64
CSV_FLOAT_FORMAT = "%.17g"


class NumpyEncoder(json.JSONEncoder):
    """Extension of json.JSONEncoder class for numpy scalars and arrays"""

    def default(self, o):
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, pathlib.PurePath):
            return str(o)
        return super(NumpyEncoder, self).default(o)


def to_json(payload: dict) -> str:
    return json.dumps(payload, cls=NumpyEncoder, indent=2)


def write_json(payload: dict, output=None):
    """Write ``payload`` to ``output`` (a path), or to stdout when None."""
    text = to_json(payload)
    if output is None:
        sys.stdout.write(text + "\n")
        sys.stdout.flush()
        return
    output = pathlib.Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text + "\n")
    logger.info(f"wrote {output}")


def write_csv(table, output):
    """Write a table (DataFrame, or dict of equal-length columns) with round-trip float precision."""
    frame = table if isinstance(table, pd.DataFrame) else pd.DataFrame(table)
    output = pathlib.Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(output, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.info(f"wrote {len(frame)} rows to {output}")
