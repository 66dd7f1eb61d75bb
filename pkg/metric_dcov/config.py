"""Runtime configuration.

Values are layered: documented defaults, then a local JSON file
(``./mdcov_local_conf.json`` or the path in ``MDCOV_CONFIG``), then ``MDCOV_*``
environment variables. Command-line flags are applied on top by ``cli``.
"""

from __future__ import annotations

import json
import logging
import os
import pathlib

logger = logging.getLogger(__name__)

LOCAL_CONFIG_FILE = "mdcov_local_conf.json"
ENV_PREFIX = "MDCOV_"

DEFAULTS = {
    "seed": 0,
    "threads": 1,
    "replications": 999,
    "statistic": "dcov_v",
    "validation_tol": 1e-9,
    "triangle_max_n": 512,
    "negtype_tol": 1e-10,
    "spectral_draws": 2000,
    "log_level": "WARNING",
}

# env var suffix -> (config key, parser)
_ENV_KEYS = {
    "SEED": ("seed", int),
    "THREADS": ("threads", int),
    "R": ("replications", int),
    "LOG_LEVEL": ("log_level", str),
}

config = dict(DEFAULTS)


def load(path: str | pathlib.Path | None = None, environ: dict | None = None) -> dict:
    """Rebuild ``config`` from defaults, a local JSON file and the environment.

    Args:
        path (str | pathlib.Path, optional): JSON file to merge. Defaults to
            ``MDCOV_CONFIG`` or ``./mdcov_local_conf.json`` when it exists.
        environ (dict, optional): Environment mapping. Defaults to ``os.environ``.

    Returns:
        dict: the module-level ``config``, updated in place.
    """
    environ = os.environ if environ is None else environ

    config.clear()
    config.update(DEFAULTS)

    path = path or environ.get(ENV_PREFIX + "CONFIG") or LOCAL_CONFIG_FILE
    path = pathlib.Path(path)
    if path.exists():
        logger.debug(f"loading config file {path}")
        with open(path, "r") as f:
            overrides = json.load(f)
        unknown = set(overrides) - set(DEFAULTS)
        if unknown:
            raise KeyError(f"Unknown config keys in {path}: {sorted(unknown)}")
        config.update(overrides)

    for suffix, (key, parse) in _ENV_KEYS.items():
        value = environ.get(ENV_PREFIX + suffix)
        if value not in (None, ""):
            config[key] = parse(value)

    return config


def get(key: str):
    return config[key]
