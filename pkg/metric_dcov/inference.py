"""Independence tests built on the empirical distance covariance.

``permutation_test`` is exact under exchangeability. Each replication r draws
its permutation from its own stream, ``SeedSequence(seed, spawn_key=(r,))``, so
the null distribution is identical for any thread count. Only the Y-side
centred matrix is re-indexed: centring commutes with simultaneous row/column
permutation.

``spectral_test`` approximates the asymptotic null of n * dcov_v by a weighted
sum of chi-square(1) variables; it is experimental.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import PreconditionError
from .estimators import CenteredMatrices, PairedSample, statistic, v_center
from .negtype import symmetric_eigen

logger = logging.getLogger(__name__)

RNG_ALGORITHM = (
    "PCG64 (numpy.random.SeedSequence(seed, spawn_key=(r,))), Fisher-Yates shuffle"
)
SEED_LIMIT = 2**64
# relative tolerance under which a replicate counts as a tie with the observed value
TIE_RTOL = 1e-12
SPECTRAL_STATISTICS = {"dcov_v": "v", "dcov_u": "u"}


def rng_info() -> dict:
    return {"algorithm": RNG_ALGORITHM, "version": f"numpy {np.__version__}"}


@dataclass
class TestResult:
    """Outcome of an independence test."""

    __test__ = False

    statistic_name: str
    observed: float
    p_value: float
    replications: int
    seed: int
    method: str = "permutation"
    n: int = None

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic_name,
            "observed": self.observed,
            "p_value": self.p_value,
            "R": self.replications,
            "seed": self.seed,
            "method": self.method,
            "n": self.n,
            "rng": rng_info(),
        }


@dataclass
class SpectralNull:
    """Draws of sum_k lambda_k (Z_k^2 - 1) + offset."""

    lambdas: np.ndarray
    offset: float
    draws: np.ndarray
    form: str
    seed: int

    def to_dict(self) -> dict:
        return {
            "form": self.form,
            "lambdas": self.lambdas.tolist(),
            "offset": self.offset,
            "draws": len(self.draws),
            "seed": self.seed,
        }


@dataclass
class SumLambdaDiagnostic:
    """Compares sum(lambda) with E d(X, X') E d(Y, Y'); equal in the population limit."""

    lambda_sum: float
    offset: float
    relative_gap: float

    def to_dict(self) -> dict:
        return {
            "lambda_sum": self.lambda_sum,
            "offset": self.offset,
            "relative_gap": self.relative_gap,
        }


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise PreconditionError(f"Seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < SEED_LIMIT:
        raise PreconditionError(f"Seed must lie in [0, 2**64), got {seed}")
    return int(seed)


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Independent stream of replication ``replication``."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replication,)))
    )


def permutation_distribution(
    s: PairedSample,
    stat: str = "dcov_v",
    replications: int = None,
    seed: int = None,
    threads: int = None,
) -> tuple:
    """Observed statistic and its R permutation replicates.

    Args:
        s (PairedSample): paired sample.
        stat (str): one of dcov_v, dcov_u, dcor_v, dcor_u.
        replications (int, optional): R >= 1. Defaults to config "replications".
        seed (int, optional): 0 <= seed < 2**64. Defaults to config "seed".
        threads (int, optional): worker threads. Defaults to config "threads".

    Returns:
        tuple: (observed (float), replicates (R,) ndarray in replication order)
    """
    replications = config.get("replications") if replications is None else replications
    seed = _check_seed(config.get("seed") if seed is None else seed)
    threads = config.get("threads") if threads is None else threads
    statistic_ = statistic(stat)

    if replications < 1:
        raise PreconditionError(
            f"Number of replications must be >= 1, got {replications}"
        )
    if threads < 1:
        raise PreconditionError(f"Number of threads must be >= 1, got {threads}")
    min_n = max(2, statistic_.min_n)
    if s.n < min_n:
        raise PreconditionError(
            f"{stat} permutation test requires n >= {min_n}, got n = {s.n}"
        )

    a = statistic_.center(s.dx)
    b = statistic_.center(s.dy)
    norm = statistic_.normalizer(a, b)

    def evaluate(b_matrix: CenteredMatrices) -> float:
        return statistic_.product(a, b_matrix) / norm if norm > 0 else 0.0

    observed = evaluate(b)

    def run(block: np.ndarray) -> np.ndarray:
        values = np.empty(len(block))
        for idx, r in enumerate(block):
            perm = replication_rng(seed, int(r)).permutation(s.n)
            values[idx] = evaluate(
                CenteredMatrices(b.matrix[np.ix_(perm, perm)], b.centering)
            )
        return values

    blocks = np.array_split(np.arange(replications), min(threads, replications))
    if len(blocks) == 1:
        replicates = run(blocks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(blocks)) as executor:
            replicates = np.concatenate(list(executor.map(run, blocks)))

    logger.debug(f"{replications} {stat} replicates over {len(blocks)} block(s)")
    return observed, replicates


def _p_value(observed: float, replicates: np.ndarray) -> float:
    tie = TIE_RTOL * max(1.0, abs(observed))
    count = int(np.count_nonzero(replicates >= observed - tie))
    return (1 + count) / (1 + len(replicates))


def permutation_test(
    s: PairedSample,
    stat: str = "dcov_v",
    replications: int = None,
    seed: int = None,
    threads: int = None,
) -> TestResult:
    """Permutation test of independence; p = (1 + #{T_r >= T_obs}) / (1 + R).

    Results are bit-identical for a given (sample, stat, R, seed) whatever ``threads`` is.
    """
    replications = config.get("replications") if replications is None else replications
    seed = config.get("seed") if seed is None else seed
    observed, replicates = permutation_distribution(s, stat, replications, seed, threads)
    return TestResult(
        statistic_name=stat,
        observed=observed,
        p_value=_p_value(observed, replicates),
        replications=replications,
        seed=int(seed),
        method="permutation",
        n=s.n,
    )


def _spectral_operator(s: PairedSample) -> np.ndarray:
    """(1/n) A o B with V-centred A and B."""
    return v_center(s.dx).matrix * v_center(s.dy).matrix / s.n


def spectral_null(
    s: PairedSample, n_draws: int = None, seed: int = None, form: str = "v"
) -> SpectralNull:
    """Approximate null law of n * dcov by sum_k lambda_k (Z_k^2 - 1) (+ offset for the V form).

    The lambda_k are the eigenvalues of (1/n) A o B; the V-form offset is the
    product of the mean pairwise distances, the U-form is centred at 0.
    """
    n_draws = config.get("spectral_draws") if n_draws is None else n_draws
    seed = _check_seed(config.get("seed") if seed is None else seed)
    form = form.lower()
    if form not in ("v", "u"):
        raise PreconditionError(f'Spectral form must be "v" or "u", got {form!r}')
    if n_draws < 1:
        raise PreconditionError(f"Number of draws must be >= 1, got {n_draws}")
    if s.n < 2:
        raise PreconditionError(f"Spectral null requires n >= 2, got n = {s.n}")

    lambdas, _ = symmetric_eigen(_spectral_operator(s))
    offset = float(s.dx.d.mean() * s.dy.d.mean()) if form == "v" else 0.0

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    draws = (rng.standard_normal((n_draws, s.n)) ** 2 - 1) @ lambdas + offset
    return SpectralNull(
        lambdas=lambdas, offset=offset, draws=draws, form=form, seed=seed
    )


def spectral_test(
    s: PairedSample, stat: str = "dcov_v", n_draws: int = None, seed: int = None
) -> TestResult:
    """Experimental: p-value of n * T_obs against ``spectral_null``."""
    if stat not in SPECTRAL_STATISTICS:
        raise PreconditionError(
            f"Spectral test supports {sorted(SPECTRAL_STATISTICS)}, got {stat}"
        )
    logger.warning("spectral test is experimental; prefer the permutation test")
    observed = statistic(stat)(s)
    null = spectral_null(s, n_draws, seed, form=SPECTRAL_STATISTICS[stat])
    return TestResult(
        statistic_name=stat,
        observed=observed,
        p_value=_p_value(s.n * observed, null.draws),
        replications=len(null.draws),
        seed=null.seed,
        method="spectral",
        n=s.n,
    )


def sum_lambda_diagnostic(s: PairedSample) -> SumLambdaDiagnostic:
    """trace((1/n) A o B) against mean(d_X) * mean(d_Y).

    The two agree only asymptotically; the gap is reported, never enforced.
    """
    a = v_center(s.dx).matrix
    b = v_center(s.dy).matrix
    lambda_sum = float(np.diag(a) @ np.diag(b)) / s.n
    offset = float(s.dx.d.mean() * s.dy.d.mean())
    gap = abs(lambda_sum - offset) / max(offset, np.finfo(float).tiny)
    return SumLambdaDiagnostic(lambda_sum=lambda_sum, offset=offset, relative_gap=gap)
