"""Sample-level negative-type diagnostics.

A finite sample is of negative type iff sum_ij a_i a_j d_ij <= 0 for every
weight vector with sum(a) = 0, i.e. iff the distance matrix restricted to the
centred subspace is negative semidefinite. The restricted form is diagonalised
directly, which yields a violation witness (top eigenvector) or the null
directions used to build measures with D(nu1 - nu2) = 0.

Everything here describes the sample only: a sample without null directions
does not prove that the underlying space has strong negative type.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.spatial.distance import pdist, squareform

from . import config
from .errors import PreconditionError
from .metric_core import DistanceMatrix, ensure_metric
from .population import NULL_FORM_TOL, FiniteSignedMeasure, big_d

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-9
CLAMP_TOL = 1e-9
SIGN_TOL = 1e-9


@dataclass
class NegTypeReport:
    """Spectrum of the centred quadratic form of a distance matrix."""

    n: int
    eigenvalues: np.ndarray  # descending, restricted to sum(a) = 0
    scale: float
    tol: float
    is_negative_type_on_sample: bool
    witness: np.ndarray = None
    witness_value: float = None
    null_directions: list = field(default_factory=list)

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[0]) if len(self.eigenvalues) else 0.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "negative_type": self.is_negative_type_on_sample,
            "max_eigenvalue": self.max_eigenvalue,
            "eigenvalues": self.eigenvalues.tolist(),
            "threshold": self.tol * self.scale,
            "witness": None if self.witness is None else self.witness.tolist(),
            "witness_value": self.witness_value,
            "null_directions": [delta.tolist() for delta in self.null_directions],
            "scope": "as witnessed on this sample",
        }


@dataclass
class Embedding:
    """Coordinates phi_i with ||phi_i - phi_j||^2 = d_ij (up to reconstruction_error)."""

    coords: np.ndarray
    eigenvalues: np.ndarray
    base: int
    reconstruction_error: float

    @property
    def dimension(self) -> int:
        return self.coords.shape[1]

    def to_dict(self) -> dict:
        return {
            "n": self.coords.shape[0],
            "dimension": self.dimension,
            "base": self.base,
            "coords": self.coords.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "reconstruction_error": self.reconstruction_error,
        }


def symmetric_eigen(matrix) -> tuple:
    """Eigenpairs of a symmetric matrix, eigenvalues descending.

    Returns:
        tuple: (eigenvalues (k,), orthonormal eigenvectors as columns (k, k))

    Raises:
        PreconditionError: when the input is not symmetric within 1e-9 (scaled by max|M|).
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise PreconditionError(
            f"Eigen-decomposition needs a square matrix, got {matrix.shape}"
        )
    if matrix.size == 0:
        return np.zeros(0), np.zeros((0, 0))
    asymmetry = float(np.abs(matrix - matrix.T).max())
    if asymmetry > SYMMETRY_TOL * max(1.0, float(np.abs(matrix).max())):
        raise PreconditionError(
            f"Matrix is not symmetric (max |M - M^T| = {asymmetry:.3g})"
        )

    eigenvalues, eigenvectors = np.linalg.eigh((matrix + matrix.T) / 2)
    return eigenvalues[::-1], eigenvectors[:, ::-1]


def centred_basis(n: int) -> np.ndarray:
    """Orthonormal basis (n, n-1) of the vectors summing to zero."""
    return null_space(np.ones((1, n)))


def _centre(vector: np.ndarray) -> np.ndarray:
    return vector - vector.mean()


def _orient(vector: np.ndarray) -> np.ndarray:
    """Flip the sign so that the first non-negligible entry is positive."""
    significant = np.flatnonzero(np.abs(vector) > SIGN_TOL * np.abs(vector).max())
    return -vector if len(significant) and vector[significant[0]] < 0 else vector


def _probability(w: np.ndarray) -> np.ndarray:
    # round-off can leave -1e-17 where the step exhausts an atom
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def negative_type_check(m: DistanceMatrix, tol: float = None) -> NegTypeReport:
    """Decide conditional negative definiteness of ``m`` on the sample.

    Args:
        m (DistanceMatrix): a valid metric (triangle-deficient input is refused).
        tol (float, optional): relative eigenvalue tolerance, scaled by max d.
            Defaults to config "negtype_tol".

    Returns:
        NegTypeReport: the witness is rescaled so that its largest entry is 1;
            null directions start with a positive entry.
    """
    tol = config.get("negtype_tol") if tol is None else tol
    ensure_metric(m)
    d = m.d
    n = m.n
    scale = float(d.max()) if d.max() > 0 else 1.0
    threshold = tol * scale

    if n < 2:
        return NegTypeReport(
            n=n,
            eigenvalues=np.zeros(0),
            scale=scale,
            tol=tol,
            is_negative_type_on_sample=True,
        )

    basis = centred_basis(n)
    eigenvalues, eigenvectors = symmetric_eigen(basis.T @ d @ basis)
    report = NegTypeReport(
        n=n,
        eigenvalues=eigenvalues,
        scale=scale,
        tol=tol,
        is_negative_type_on_sample=bool(eigenvalues[0] <= threshold),
    )

    if not report.is_negative_type_on_sample:
        witness = _centre(basis @ eigenvectors[:, 0])
        witness = witness / witness[np.argmax(np.abs(witness))]
        report.witness = witness
        report.witness_value = float(witness @ d @ witness)
        logger.debug(
            f"negative type violated, witness form value {report.witness_value:.6g}"
        )

    for k in np.flatnonzero(np.abs(eigenvalues) <= threshold):
        report.null_directions.append(_orient(_centre(basis @ eigenvectors[:, k])))

    return report


def gram_matrix(m: DistanceMatrix, base: int = 0) -> np.ndarray:
    """G_ij = (d_i,base + d_j,base - d_ij) / 2, the divergence kernel anchored at ``base``."""
    d = m.d
    return 0.5 * (d[:, base][:, None] + d[base][None, :] - d)


def schoenberg_embed(m: DistanceMatrix, base: int = 0) -> Embedding:
    """Embed sqrt(d) isometrically: ||phi_i - phi_j||^2 = d_ij.

    Raises:
        PreconditionError: when the Gram matrix has an eigenvalue below -1e-9 max|G|,
            i.e. the sample is not of negative type.
    """
    ensure_metric(m)
    if not 0 <= base < m.n:
        raise PreconditionError(f"Base index {base} out of range [0, {m.n})")

    gram = gram_matrix(m, base)
    eigenvalues, eigenvectors = symmetric_eigen(gram)
    clamp = CLAMP_TOL * float(np.abs(gram).max())
    if eigenvalues[-1] < -clamp:
        raise PreconditionError(
            f"Not of negative type: Gram eigenvalue {eigenvalues[-1]:.3g} below -{clamp:.3g};"
            " no isometric Hilbert embedding of sqrt(d) exists"
        )
    eigenvalues = np.where(eigenvalues < 0, 0.0, eigenvalues)

    keep = eigenvalues > 0
    coords = eigenvectors[:, keep] * np.sqrt(eigenvalues[keep])
    if coords.shape[1] and m.n > 1:
        squared = squareform(pdist(coords, "sqeuclidean"))
    else:
        squared = np.zeros_like(m.d)
    error = float(np.abs(squared - m.d).max())
    logger.debug(
        f"embedded {m.n} points in dimension {coords.shape[1]}, error {error:.3g}"
    )
    return Embedding(
        coords=coords,
        eigenvalues=eigenvalues[keep],
        base=base,
        reconstruction_error=error,
    )


def distinct_representatives(m: DistanceMatrix) -> np.ndarray:
    """First index of every class of coincident observations (d = 0)."""
    coincident = m.d <= 0
    return np.array(
        [i for i in range(m.n) if not coincident[i, :i].any()], dtype=int
    )


def find_null_measure_pair(m: DistanceMatrix, tol: float = None):
    """Two distinct probability measures nu1, nu2 on the sample with D(nu1 - nu2) = 0.

    Built from a null direction delta of the centred form on the distinct
    observations: nu1 = u + t delta, nu2 = u - t delta with u uniform and
    t = 1 / (k max|delta|), the largest step that keeps both weight vectors
    nonnegative. Coincident observations are merged first; the measures put
    their mass on the first observation of each class.

    Returns:
        tuple | None: (nu1, nu2) on ``m``, or None without a null direction.
    """
    ensure_metric(m)
    keep = distinct_representatives(m)
    if len(keep) < m.n:
        logger.info(
            f"{m.n - len(keep)} coincident observation(s) merged before the null"
            " direction search"
        )
    sample = m.submatrix(keep) if len(keep) < m.n else m
    report = negative_type_check(sample, tol)
    if not report.is_negative_type_on_sample:
        raise PreconditionError(
            "Sample is not of negative type; strong negative type is not defined"
        )

    uniform = FiniteSignedMeasure.uniform(m, keep)
    for delta in report.null_directions:
        t = 1.0 / (len(keep) * np.abs(delta).max())
        step = np.zeros(m.n)
        step[keep] = t * delta
        nu1 = FiniteSignedMeasure(m, _probability(uniform.w + step))
        nu2 = FiniteSignedMeasure(m, _probability(uniform.w - step))
        if abs(big_d(nu1 - nu2)) <= NULL_FORM_TOL:
            logger.debug(f"null measure pair found, t = {t:.6g}")
            return nu1, nu2

    logger.debug("no null direction on this sample")
    return None
