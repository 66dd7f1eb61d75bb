"""mdcov: command-line front end.

    mdcov compute  --x X.csv --y Y.csv [--metric-x euclidean] [--metric-y discrete]
    mdcov test     --x X.csv --y Y.csv [--stat dcov_v] [--R 999] [--seed 0] [--threads 1]
    mdcov negtype  MATRIX | --fixture k23.csv
    mdcov embed    MATRIX [--base 0]
    mdcov nullpair MATRIX
    mdcov population JOINT.json
    mdcov demo-counterexample [--fixture cycle4.csv]

stdout carries only the result JSON. Logs and errors go to stderr; input errors
exit with 2, violated preconditions with 3.
"""

from __future__ import annotations

import argparse
import json
import logging
import pathlib
import sys
from dataclasses import dataclass, field

import numpy as np

from . import config, estimators, inference, negtype, population
from .data import fixture_path
from .errors import InputError, PreconditionError
from .export import write_csv, write_json
from .metric_core import (
    DistanceMatrix,
    MetricSpec,
    build_distance_matrix,
    load_edges,
    load_matrix,
    load_points,
)
from .readers.measures import load_joint_measure
from .version import __version__

logger = logging.getLogger(__name__)

# commands reading one precomputed matrix (or joint measure)
SINGLE_INPUT_COMMANDS = (
    "negtype",
    "embed",
    "nullpair",
    "population",
    "demo-counterexample",
)
DEFAULT_FIXTURES = {"demo-counterexample": "cycle4.csv"}
LABEL_METRICS = ("discrete", "graph")
PRODUCT_TOL = 1e-12


@dataclass
class RunConfig:
    """Effective settings of one invocation: flags over ``MDCOV_*`` env over config defaults."""

    command: str
    x: pathlib.Path = None
    y: pathlib.Path = None
    input: pathlib.Path = None
    file_format: str = None
    metric_x: MetricSpec = field(default_factory=MetricSpec)
    metric_y: MetricSpec = field(default_factory=MetricSpec)
    allow_triangle_violation: bool = False
    stat: str = "dcov_v"
    replications: int = 999
    seed: int = 0
    threads: int = 1
    method: str = "permutation"
    draws: int = 2000
    base: int = 0
    tol: float = None
    output: pathlib.Path = None
    csv: pathlib.Path = None
    log_level: str = "WARNING"

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        def pick(name, key):
            value = getattr(args, name, None)
            return config.get(key) if value is None else value

        cfg = cls(
            command=args.command,
            file_format=getattr(args, "format", None),
            allow_triangle_violation=getattr(args, "allow_triangle_violation", False),
            stat=pick("stat", "statistic"),
            replications=pick("R", "replications"),
            seed=pick("seed", "seed"),
            threads=pick("threads", "threads"),
            method=getattr(args, "method", None) or "permutation",
            draws=pick("draws", "spectral_draws"),
            base=getattr(args, "base", None) or 0,
            tol=getattr(args, "tol", None),
            output=getattr(args, "output", None),
            csv=getattr(args, "csv", None),
            log_level=pick("log_level", "log_level"),
        )

        if cfg.command in ("compute", "test"):
            if args.x is None or args.y is None:
                raise InputError(f"{cfg.command} needs both --x and --y")
            cfg.x, cfg.y = pathlib.Path(args.x), pathlib.Path(args.y)
            cfg.metric_x = _metric(args.metric_x, args.graph_x, "--graph-x")
            cfg.metric_y = _metric(args.metric_y, args.graph_y, "--graph-y")
        elif cfg.command in SINGLE_INPUT_COMMANDS:
            fixture = args.fixture or DEFAULT_FIXTURES.get(cfg.command)
            if args.input is not None:
                cfg.input = pathlib.Path(args.input)
            elif fixture is not None:
                cfg.input = fixture_path(fixture)
            else:
                raise InputError(f"{cfg.command} needs an input file or --fixture")
        return cfg


def _metric(text: str, graph_edges, flag: str) -> MetricSpec:
    kind = text.strip().lower().partition(":")[0]
    if kind == "graph":
        if graph_edges is None:
            raise InputError(f"graph metric needs an edge list ({flag})")
        return MetricSpec.parse(text, edges=load_edges(graph_edges))
    return MetricSpec.parse(text)


def _load_side(path: pathlib.Path, spec: MetricSpec, cfg: RunConfig) -> DistanceMatrix:
    if spec.kind == "precomputed":
        return load_matrix(
            path,
            cfg.file_format,
            validate=True,
            allow_triangle_violation=cfg.allow_triangle_violation,
        )
    points = load_points(path, labels=spec.kind in LABEL_METRICS)
    return build_distance_matrix(points, spec)


def _paired_sample(cfg: RunConfig) -> estimators.PairedSample:
    return estimators.PairedSample(
        _load_side(cfg.x, cfg.metric_x, cfg), _load_side(cfg.y, cfg.metric_y, cfg)
    )


def _single_matrix(cfg: RunConfig) -> DistanceMatrix:
    return load_matrix(
        cfg.input,
        cfg.file_format,
        validate=True,
        allow_triangle_violation=cfg.allow_triangle_violation,
    )


def cmd_compute(cfg: RunConfig) -> dict:
    s = _paired_sample(cfg)
    result = {
        "n": s.n,
        "dcov_v": estimators.dcov_v(s),
        "dcor_v": estimators.dcor_v(s),
        "dvar_x": estimators.dvar_v(s.dx),
        "dvar_y": estimators.dvar_v(s.dy),
        "brownian": estimators.brownian_plugin(s),
    }
    if s.n >= estimators.U_MIN_N:
        result["dcov_u"] = estimators.dcov_u(s)
        result["dcor_u"] = estimators.dcor_u(s)
    else:
        logger.warning(
            f"dcov_u omitted: requires n >= {estimators.U_MIN_N}, got n = {s.n}"
        )

    if cfg.csv is not None:
        table = {"statistic": list(result), "value": list(result.values())}
        write_csv(table, cfg.csv)
    return result


def cmd_test(cfg: RunConfig) -> dict:
    s = _paired_sample(cfg)
    if cfg.method == "spectral":
        result = inference.spectral_test(s, cfg.stat, n_draws=cfg.draws, seed=cfg.seed)
        payload = result.to_dict()
        payload["experimental"] = True
        if cfg.csv is not None:
            null = inference.spectral_null(
                s, cfg.draws, cfg.seed, form=inference.SPECTRAL_STATISTICS[cfg.stat]
            )
            write_csv({"draw": null.draws}, cfg.csv)
        return payload

    result = inference.permutation_test(
        s, cfg.stat, replications=cfg.replications, seed=cfg.seed, threads=cfg.threads
    )
    if cfg.csv is not None:
        _, replicates = inference.permutation_distribution(
            s, cfg.stat, cfg.replications, cfg.seed, cfg.threads
        )
        table = {"replication": np.arange(len(replicates)), "statistic": replicates}
        write_csv(table, cfg.csv)
    return result.to_dict()


def cmd_negtype(cfg: RunConfig) -> dict:
    report = negtype.negative_type_check(_single_matrix(cfg), cfg.tol)
    payload = report.to_dict()
    payload["status"] = "holds" if report.is_negative_type_on_sample else "violated"
    return payload


def cmd_embed(cfg: RunConfig) -> dict:
    embedding = negtype.schoenberg_embed(_single_matrix(cfg), base=cfg.base)
    if cfg.csv is not None:
        write_csv(
            {f"phi{k}": embedding.coords[:, k] for k in range(embedding.dimension)},
            cfg.csv,
        )
    return embedding.to_dict()


def _pair_payload(pair) -> dict:
    if pair is None:
        return {"found": False, "nu1": None, "nu2": None, "big_d_difference": None}
    nu1, nu2 = pair
    return {
        "found": True,
        "nu1": nu1.w.tolist(),
        "nu2": nu2.w.tolist(),
        "big_d_difference": population.big_d(nu1 - nu2),
    }


def cmd_nullpair(cfg: RunConfig) -> dict:
    payload = _pair_payload(negtype.find_null_measure_pair(_single_matrix(cfg), cfg.tol))
    payload["scope"] = "as witnessed on this sample"
    return payload


def _max_deviation_from_product(t: population.FiniteJointMeasure) -> float:
    return float(np.abs(t.w - np.outer(t.mu.w, t.nu.w)).max())


def cmd_population(cfg: RunConfig) -> dict:
    t = load_joint_measure(cfg.input)
    mu, nu = t.mu, t.nu
    return {
        "k_x": t.space_x.n,
        "k_y": t.space_y.n,
        "a_mu": population.a_mu_vector(mu).tolist(),
        "a_nu": population.a_mu_vector(nu).tolist(),
        "D_mu": population.big_d(mu),
        "D_nu": population.big_d(nu),
        "dcov": population.population_dcov(t),
        "dvar_x": population.population_dvar(mu),
        "dvar_y": population.population_dvar(nu),
        "dcor": population.population_dcor(t),
        "max_deviation_from_product": _max_deviation_from_product(t),
    }


def cmd_demo_counterexample(cfg: RunConfig) -> dict:
    space_y = _single_matrix(cfg)
    pair = negtype.find_null_measure_pair(space_y, cfg.tol)
    if pair is None:
        raise PreconditionError(
            f"{cfg.input.name}: no null direction found; the sample shows strong negative type"
        )
    nu1, nu2 = pair
    space_x = DistanceMatrix([[0.0, 1.0], [1.0, 0.0]])
    theta = population.construct_counterexample(space_x, nu1, nu2)
    dcov = population.population_dcov(theta)
    deviation = _max_deviation_from_product(theta)

    narrative = [
        f"Y = {cfg.input.name}: {space_y.n} points of negative type on this sample.",
        f"Null direction found: nu1 = {np.round(nu1.w, 6).tolist()},"
        f" nu2 = {np.round(nu2.w, 6).tolist()}, D(nu1 - nu2) = {population.big_d(nu1 - nu2):.3g}.",
        "X = two points at distance 1; theta = (delta_x1 x nu1 + delta_x2 x nu2) / 2.",
        f"dcov(theta) = {dcov:.3g}, yet max |theta - mu x nu| = {deviation:.6g}:"
        " X and Y are dependent with zero distance covariance.",
    ]
    for line in narrative:
        logger.info(line)

    payload = _pair_payload(pair)
    payload.update(
        {
            "theta": theta.w.tolist(),
            "mu": theta.mu.w.tolist(),
            "nu": theta.nu.w.tolist(),
            "dcov": dcov,
            "max_deviation_from_product": deviation,
            "dependent": deviation > PRODUCT_TOL,
            "narrative": narrative,
        }
    )
    return payload


HANDLERS = {
    "compute": cmd_compute,
    "test": cmd_test,
    "negtype": cmd_negtype,
    "embed": cmd_embed,
    "nullpair": cmd_nullpair,
    "population": cmd_population,
    "demo-counterexample": cmd_demo_counterexample,
}


def _add(parser: argparse.ArgumentParser, *flags, help: str, **kwargs):
    parser.add_argument(*flags, help=help, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add(common, "--seed", type=int, help="RNG seed (default 0, env MDCOV_SEED)")
    _add(
        common,
        "--output",
        type=pathlib.Path,
        help="Write the result JSON here instead of stdout",
    )
    _add(
        common,
        "--format",
        choices=["csv", "json"],
        help="Matrix file format (default: inferred from the suffix)",
    )
    _add(
        common,
        "--allow-triangle-violation",
        action="store_true",
        help="Accept precomputed matrices that violate the triangle inequality",
    )
    _add(
        common,
        "--log-level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level on stderr (env MDCOV_LOG_LEVEL)",
    )

    paired = argparse.ArgumentParser(add_help=False)
    _add(paired, "--x", help="X observations: points, labels or matrix file")
    _add(paired, "--y", help="Y observations: points, labels or matrix file")
    _add(
        paired,
        "--metric-x",
        default="euclidean",
        help='X metric, e.g. "manhattan", "minkowski:3", "discrete", "precomputed"',
    )
    _add(paired, "--metric-y", default="euclidean", help="Y metric")
    _add(paired, "--graph-x", help="Edge list u,v[,w] for --metric-x graph")
    _add(paired, "--graph-y", help="Edge list u,v[,w] for --metric-y graph")
    _add(paired, "--csv", type=pathlib.Path, help="Also write a CSV table")

    single = argparse.ArgumentParser(add_help=False)
    _add(single, "input", nargs="?", help="Input file")
    _add(single, "--fixture", help="Use a bundled fixture instead of an input file")

    parser = argparse.ArgumentParser(
        prog="mdcov", description="Distance covariance and correlation in metric spaces"
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser(
        "compute", parents=[common, paired], help="Empirical dcov/dcor statistics"
    )

    test = sub.add_parser("test", parents=[common, paired], help="Independence test")
    _add(
        test,
        "--stat",
        choices=sorted(estimators.STATISTICS),
        help="Test statistic (default dcov_v)",
    )
    _add(test, "--R", type=int, help="Replications (default 999, env MDCOV_R)")
    _add(test, "--threads", type=int, help="Worker threads; results do not depend on it")
    _add(
        test,
        "--method",
        choices=["permutation", "spectral"],
        default="permutation",
        help="Null calibration; spectral is experimental",
    )
    _add(test, "--draws", type=int, help="Spectral null draws (default 2000)")

    for name, description in (
        ("negtype", "Negative-type check with violation witness"),
        ("embed", "Isometric Hilbert embedding of sqrt(d)"),
        ("nullpair", "Probability measures with D(nu1 - nu2) = 0"),
        ("demo-counterexample", "Dependent pair with zero distance covariance"),
    ):
        command = sub.add_parser(name, parents=[common, single], help=description)
        _add(command, "--tol", type=float, help="Relative eigenvalue tolerance")
        if name == "embed":
            _add(command, "--base", type=int, default=0, help="Gram base point index")
            _add(command, "--csv", type=pathlib.Path, help="Also write coordinates")

    sub.add_parser(
        "population",
        parents=[common, single],
        help="Population quantities of a joint measure JSON",
    )
    return parser


def _configure_logging(level: str):
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, str(level).upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _fail(error: Exception, exit_code: int) -> int:
    sys.stderr.write(
        json.dumps(
            {"error": type(error).__name__, "message": str(error), "exit_code": exit_code}
        )
        + "\n"
    )
    return exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            config.load()
        except (KeyError, ValueError) as e:
            raise InputError(f"Invalid configuration: {e}")
        cfg = RunConfig.from_args(args)
        _configure_logging(cfg.log_level)
        logger.debug(f"running {cfg.command} with seed {cfg.seed}")
        payload = HANDLERS[cfg.command](cfg)
    except FileNotFoundError as e:
        return _fail(e, InputError.exit_code)
    except (InputError, PreconditionError) as e:
        return _fail(e, e.exit_code)

    payload.setdefault("seed", cfg.seed)
    write_json(payload, cfg.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
