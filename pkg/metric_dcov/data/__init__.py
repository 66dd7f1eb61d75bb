"""Bundled fixtures.

    k23.csv                     shortest-path metric of K(2,3), not of negative type
    cycle4.csv                  4-cycle with unit edges, negative but not strong negative type
    two_point.csv               two points at distance 4
    euclid_x.csv, euclid_y.csv  small paired Euclidean sample (n = 12)
    constant_y.csv              constant Y paired with euclid_x.csv
    counterexample_joint.json   dependent joint measure with zero distance covariance
"""

import pathlib
from importlib import resources

FIXTURES = (
    "k23.csv",
    "cycle4.csv",
    "two_point.csv",
    "euclid_x.csv",
    "euclid_y.csv",
    "constant_y.csv",
    "counterexample_joint.json",
)


def fixture_path(name: str) -> pathlib.Path:
    """Path of a bundled fixture file, e.g. fixture_path("k23.csv")."""
    if name not in FIXTURES:
        raise FileNotFoundError(
            f"No bundled fixture named {name!r} - must be one of {FIXTURES}"
        )
    return pathlib.Path(resources.files(__package__) / name)
