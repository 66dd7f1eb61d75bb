"""Population-level distance covariance on finite-support measures.

A measure is a weight vector over the points of a ``DistanceMatrix``; every
integral against it is an exact weighted sum, so a_mu, D, d_mu, dcov, dvar and
dcor are computed without sampling error. Signed measures are supported where
the quantity makes sense for them (a_mu and D), which is what the strong
negative type counterexample needs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InputError, PreconditionError
from .estimators import PairedSample
from .metric_core import DistanceMatrix

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-12
NULL_FORM_TOL = 1e-10
DISTINCT_TOL = 1e-12


def _check_distinct_support(space: DistanceMatrix, active: np.ndarray, name: str):
    """Atoms carrying mass must sit at distinct points (zero-weight atoms are pruned first)."""
    index = np.flatnonzero(active)
    if len(index) < 2:
        return
    sub = space.d[np.ix_(index, index)]
    coincident = np.argwhere((sub <= 0) & ~np.eye(len(index), dtype=bool))
    if len(coincident):
        i, j = index[coincident[0]]
        raise InputError(f"{name}: support points {i} and {j} coincide (distance 0)")


@dataclass(frozen=True, eq=False)
class FiniteSignedMeasure:
    """Finite signed measure: weight ``w[i]`` on support point ``i`` of ``space``."""

    space: DistanceMatrix
    w: np.ndarray

    def __post_init__(self):
        if not isinstance(self.space, DistanceMatrix):
            object.__setattr__(self, "space", DistanceMatrix(self.space))
        w = np.array(self.w, dtype=float).ravel()
        if w.shape != (self.space.n,):
            raise InputError(
                f"Measure has {w.size} weights for {self.space.n} support points"
            )
        if not np.all(np.isfinite(w)):
            raise InputError("Measure weights must be finite")
        _check_distinct_support(self.space, w != 0, "measure")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, space: DistanceMatrix, support=None) -> FiniteSignedMeasure:
        """Uniform probability on ``support`` (all points by default)."""
        space = space if isinstance(space, DistanceMatrix) else DistanceMatrix(space)
        support = np.arange(space.n) if support is None else np.asarray(support)
        w = np.zeros(space.n)
        w[support] = 1.0 / len(support)
        return cls(space, w)

    @classmethod
    def point_mass(cls, space: DistanceMatrix, i: int) -> FiniteSignedMeasure:
        space = space if isinstance(space, DistanceMatrix) else DistanceMatrix(space)
        w = np.zeros(space.n)
        w[i] = 1.0
        return cls(space, w)

    @property
    def k(self) -> int:
        return self.space.n

    def is_probability(self, tol: float = PROBABILITY_TOL) -> bool:
        return bool(np.all(self.w >= 0) and abs(self.w.sum() - 1.0) <= tol)

    def _combine(self, other: FiniteSignedMeasure, sign: float) -> FiniteSignedMeasure:
        same = other.space is self.space or np.array_equal(other.space.d, self.space.d)
        if not same:
            raise InputError("Measures live on different supports")
        return FiniteSignedMeasure(self.space, self.w + sign * other.w)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def to_dict(self) -> dict:
        return {"support": self.space.to_dict(), "weights": self.w.tolist()}


@dataclass(frozen=True, eq=False)
class FiniteJointMeasure:
    """Finite (signed) measure on X x Y: mass ``w[i][j]`` on the pair (x_i, y_j)."""

    space_x: DistanceMatrix
    space_y: DistanceMatrix
    w: np.ndarray

    def __post_init__(self):
        for name in ("space_x", "space_y"):
            space = getattr(self, name)
            if not isinstance(space, DistanceMatrix):
                object.__setattr__(self, name, DistanceMatrix(space))
        w = np.array(self.w, dtype=float)
        if w.shape != (self.space_x.n, self.space_y.n):
            raise InputError(
                f"Joint weights have shape {w.shape}, expected"
                f" ({self.space_x.n}, {self.space_y.n})"
            )
        if not np.all(np.isfinite(w)):
            raise InputError("Joint weights must be finite")
        _check_distinct_support(self.space_x, (w != 0).any(axis=1), "spaceX")
        _check_distinct_support(self.space_y, (w != 0).any(axis=0), "spaceY")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def mu(self) -> FiniteSignedMeasure:
        """X-marginal (row sums)."""
        return FiniteSignedMeasure(self.space_x, self.w.sum(axis=1))

    @property
    def nu(self) -> FiniteSignedMeasure:
        """Y-marginal (column sums)."""
        return FiniteSignedMeasure(self.space_y, self.w.sum(axis=0))

    def is_probability(self, tol: float = PROBABILITY_TOL) -> bool:
        return bool(np.all(self.w >= 0) and abs(self.w.sum() - 1.0) <= tol)

    def to_dict(self) -> dict:
        return {
            "spaceX": self.space_x.to_dict(),
            "spaceY": self.space_y.to_dict(),
            "weights": self.w.tolist(),
        }


def _require_probability(measure, name: str = "measure"):
    if not measure.is_probability():
        raise PreconditionError(
            f"{name} must be a probability measure (w >= 0, total mass 1 within"
            f" {PROBABILITY_TOL}); total mass is {float(np.sum(measure.w))}"
        )


def hahn_jordan(m: FiniteSignedMeasure) -> tuple:
    """Split ``m`` into nonnegative parts with disjoint supports, m = plus - minus."""
    plus = FiniteSignedMeasure(m.space, np.maximum(m.w, 0.0))
    minus = FiniteSignedMeasure(m.space, np.maximum(-m.w, 0.0))
    return plus, minus


def a_mu_vector(m: FiniteSignedMeasure) -> np.ndarray:
    """Expected distance from every support point: ``d @ w``."""
    return m.space.d @ m.w


def a_mu(m: FiniteSignedMeasure, i: int) -> float:
    """Expected distance from support point ``i`` to a point drawn from ``m``."""
    if not 0 <= i < m.k:
        raise PreconditionError(f"Support index {i} out of range [0, {m.k})")
    return float(m.space.d[i] @ m.w)


def big_d(m: FiniteSignedMeasure) -> float:
    """D(m) = sum_ij w_i w_j d_ij; a quadratic form for signed measures."""
    return float(m.w @ m.space.d @ m.w)


def d_mu_matrix(m: FiniteSignedMeasure) -> np.ndarray:
    """Doubly m-centred distances over the whole support."""
    _require_probability(m)
    a = a_mu_vector(m)
    return m.space.d - a[:, None] - a[None, :] + big_d(m)


def d_mu(m: FiniteSignedMeasure, i: int, j: int) -> float:
    _require_probability(m)
    for index in (i, j):
        if not 0 <= index < m.k:
            raise PreconditionError(f"Support index {index} out of range [0, {m.k})")
    return float(m.space.d[i, j] - a_mu(m, i) - a_mu(m, j) + big_d(m))


def population_dcov(t: FiniteJointMeasure) -> float:
    """dcov(theta) = sum over atom pairs of d_mu(x, x') d_nu(y, y') theta(x, y) theta(x', y')."""
    _require_probability(t, "joint measure")
    centred_x = d_mu_matrix(t.mu)
    centred_y = d_mu_matrix(t.nu)
    return float(np.sum(centred_x * (t.w @ centred_y @ t.w.T)))


def diagonal_coupling(m: FiniteSignedMeasure) -> FiniteJointMeasure:
    """Law of (X, X) for X ~ m."""
    return FiniteJointMeasure(m.space, m.space, np.diag(m.w))


def population_dvar(m: FiniteSignedMeasure) -> float:
    _require_probability(m)
    return population_dcov(diagonal_coupling(m))


def population_dcor(t: FiniteJointMeasure) -> float:
    """dcov / sqrt(dvar_x dvar_y); 0 when either distance variance vanishes."""
    _require_probability(t, "joint measure")
    denominator = population_dvar(t.mu) * population_dvar(t.nu)
    if denominator <= 0:
        return 0.0
    return population_dcov(t) / float(np.sqrt(denominator))


def product_measure(
    m: FiniteSignedMeasure, n: FiniteSignedMeasure
) -> FiniteJointMeasure:
    _require_probability(m, "first marginal")
    _require_probability(n, "second marginal")
    return FiniteJointMeasure(m.space, n.space, np.outer(m.w, n.w))


def construct_counterexample(
    space_x: DistanceMatrix,
    nu1: FiniteSignedMeasure,
    nu2: FiniteSignedMeasure,
    x1: int = 0,
    x2: int = 1,
) -> FiniteJointMeasure:
    """theta = (delta_x1 x nu1 + delta_x2 x nu2) / 2: dependent, yet with zero dcov.

    Requires two distinct probability measures on Y with D(nu1 - nu2) = 0, i.e. a
    witness that Y is not of strong negative type.

    Raises:
        PreconditionError: when the inputs do not form such a witness.
    """
    space_x = space_x if isinstance(space_x, DistanceMatrix) else DistanceMatrix(space_x)
    if space_x.n < 2:
        raise PreconditionError("spaceX needs at least two points")
    if x1 == x2 or not (0 <= x1 < space_x.n and 0 <= x2 < space_x.n):
        raise PreconditionError(f"Invalid spaceX atoms ({x1}, {x2})")
    if space_x.d[x1, x2] <= 0:
        raise PreconditionError(f"spaceX points {x1} and {x2} are not distinct")
    _require_probability(nu1, "nu1")
    _require_probability(nu2, "nu2")

    delta = nu1 - nu2
    gap = float(np.abs(delta.w).max())
    if gap <= DISTINCT_TOL:
        raise PreconditionError("nu1 and nu2 are not distinct")
    form = big_d(delta)
    if abs(form) > NULL_FORM_TOL:
        raise PreconditionError(
            f"D(nu1 - nu2) = {form:.3g} is not zero; the pair does not witness a"
            " failure of strong negative type"
        )

    first = FiniteSignedMeasure.point_mass(space_x, x1)
    second = FiniteSignedMeasure.point_mass(space_x, x2)
    w = (np.outer(first.w, nu1.w) + np.outer(second.w, nu2.w)) / 2
    theta = FiniteJointMeasure(space_x, nu1.space, w)
    logger.debug(f"counterexample built, sup-norm gap between nu1 and nu2 {gap:.3g}")
    return theta


def sample_joint(t: FiniteJointMeasure, n: int, seed: int = 0) -> PairedSample:
    """Draw n i.i.d. pairs from ``t``; distance matrices are sub-matrices of the supports."""
    _require_probability(t, "joint measure")
    rng = np.random.default_rng(seed)
    p = np.clip(t.w.ravel(), 0.0, None)
    atoms = rng.choice(p.size, size=n, p=p / p.sum())
    ix, iy = np.unravel_index(atoms, t.w.shape)
    return PairedSample(t.space_x.submatrix(ix), t.space_y.submatrix(iy))


def cr_constant(r: float) -> float:
    """c_r with (a + b)^r <= c_r (a^r + b^r) for a, b >= 0."""
    if r <= 0:
        raise PreconditionError(f"r must be positive, got {r}")
    return max(1.0, 2.0 ** (r - 1))
