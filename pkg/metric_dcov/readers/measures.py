"""Readers for finite-support measures.

Measure file:

    {"support": <space>, "weights": [w_1, ..., w_k]}

Joint measure file:

    {"spaceX": <space>, "spaceY": <space>, "weights": [[...], ...]}

where <space> is one of

    {"n": 2, "d": [[0, 1], [1, 0]]}                      precomputed matrix
    [[0, 1], [1, 0]]                                     bare matrix
    {"points": [[0.0], [3.0]], "metric": "euclidean"}    points + metric
    {"points": ["a", "b"], "metric": {"kind": "graph", "edges": [["a", "b", 1]]}}
"""

import json
import logging
import pathlib

import numpy as np

from ..errors import InputError
from ..metric_core import DistanceMatrix, MetricSpec, Point, build_distance_matrix
from ..population import FiniteJointMeasure, FiniteSignedMeasure
from .matrix_io import matrix_from_dict

logger = logging.getLogger(__name__)


def _read_json(file_path) -> dict:
    file_path = pathlib.Path(file_path)
    if not file_path.exists():
        raise FileNotFoundError(f"No such file: {file_path}")
    try:
        with open(file_path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InputError(
            f"Parse error in {file_path} at line {e.lineno}, column {e.colno}: {e.msg}"
        )


def metric_from_dict(content) -> MetricSpec:
    if content is None:
        return MetricSpec()
    if isinstance(content, str):
        return MetricSpec.parse(content)
    if isinstance(content, dict) and "kind" in content:
        return MetricSpec(
            kind=content["kind"],
            p=content.get("p"),
            edges=tuple(content.get("edges", ())),
        )
    raise InputError(f"Invalid metric specification: {content!r}")


def space_from_dict(content, source="<json>") -> DistanceMatrix:
    """Build the support space of a measure from its JSON description."""
    if isinstance(content, dict) and "points" in content:
        spec = metric_from_dict(content.get("metric"))
        points = [
            Point(label=p) if isinstance(p, str) else Point(coords=p)
            for p in content["points"]
        ]
        return build_distance_matrix(points, spec)
    return DistanceMatrix(matrix_from_dict(content, source))


def _weights(content, source):
    if not isinstance(content, dict) or "weights" not in content:
        raise InputError(f'{source}: missing "weights"')
    try:
        return np.array(content["weights"], dtype=float)
    except (TypeError, ValueError):
        raise InputError(f'{source}: "weights" must be a (nested) list of numbers')


def measure_from_dict(content, source="<json>") -> FiniteSignedMeasure:
    if not isinstance(content, dict) or "support" not in content:
        raise InputError(
            f'{source}: expected an object with keys "support" and "weights"'
        )
    space = space_from_dict(content["support"], source)
    return FiniteSignedMeasure(space, _weights(content, source))


def joint_measure_from_dict(content, source="<json>") -> FiniteJointMeasure:
    if not isinstance(content, dict) or not {"spaceX", "spaceY"} <= set(content):
        raise InputError(f'{source}: expected keys "spaceX", "spaceY" and "weights"')
    return FiniteJointMeasure(
        space_from_dict(content["spaceX"], source),
        space_from_dict(content["spaceY"], source),
        _weights(content, source),
    )


def load_measure(file_path) -> FiniteSignedMeasure:
    measure = measure_from_dict(_read_json(file_path), source=file_path)
    logger.debug(f"loaded measure on {measure.k} support points from {file_path}")
    return measure


def load_joint_measure(file_path) -> FiniteJointMeasure:
    joint = joint_measure_from_dict(_read_json(file_path), source=file_path)
    logger.debug(
        f"loaded joint measure on {joint.space_x.n} x {joint.space_y.n} atoms from {file_path}"
    )
    return joint
