"""Empirical distance covariance and correlation.

All estimators consume a ``PairedSample`` of two distance matrices:

    dcov_v   (1 / n^2) sum_ij A_ij B_ij          V-centred, plug-in (biased)
    dcov_u   (1 / (n (n - 3))) sum_i!=j A~ B~    U-centred, unbiased, n >= 6

The O(n^6) brute-force averages of the order-6 kernel ``h`` are kept as
oracles for both, and ``brownian_plugin`` evaluates the moment expansion
E[d d'] + E[d] E[d'] - 2 E[d d''] directly.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum

import numba
import numpy as np

from .errors import InputError, PreconditionError
from .metric_core import DistanceMatrix, MetricSpec, build_distance_matrix

logger = logging.getLogger(__name__)

# above this n, inner products use compensated summation
COMPENSATED_MIN_N = 1000
BRUTE_FORCE_V_MAX_N = 12
BRUTE_FORCE_V_SYMMETRIZED_MAX_N = 5
BRUTE_FORCE_U_RANGE = (6, 10)
U_MIN_N = 6


class Centering(Enum):
    """Double-centring scheme of a distance matrix."""

    V = "V"
    U = "U"


@dataclass(frozen=True, eq=False)
class PairedSample:
    """n paired observations, represented by their two distance matrices."""

    dx: DistanceMatrix
    dy: DistanceMatrix

    def __post_init__(self):
        for name in ("dx", "dy"):
            value = getattr(self, name)
            if not isinstance(value, DistanceMatrix):
                object.__setattr__(self, name, DistanceMatrix(value))
        if self.dx.n != self.dy.n:
            raise InputError(
                f"Paired samples have length mismatch: {self.dx.n} X observations"
                f" vs {self.dy.n} Y observations"
            )

    @classmethod
    def from_points(
        cls, x, y, metric_x: MetricSpec = None, metric_y: MetricSpec = None
    ) -> PairedSample:
        return cls(
            build_distance_matrix(x, metric_x), build_distance_matrix(y, metric_y)
        )

    @property
    def n(self) -> int:
        return self.dx.n

    def permuted(self, perm) -> PairedSample:
        """Relabel both samples simultaneously."""
        return PairedSample(self.dx.submatrix(perm), self.dy.submatrix(perm))


@dataclass(frozen=True, eq=False)
class CenteredMatrices:
    """V-centred ``A`` or U-centred ``A~`` transform of a distance matrix."""

    matrix: np.ndarray
    centering: Centering

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _as_array(m) -> np.ndarray:
    return m.d if isinstance(m, DistanceMatrix) else np.asarray(m, dtype=float)


def v_center(m: DistanceMatrix) -> CenteredMatrices:
    """A_ij = a_ij - mean_i. - mean_.j + mean_.. (means over all n indices)."""
    a = _as_array(m)
    row_mean = a.mean(axis=1, keepdims=True)
    col_mean = a.mean(axis=0, keepdims=True)
    return CenteredMatrices(a - row_mean - col_mean + a.mean(), Centering.V)


def u_center(m: DistanceMatrix) -> CenteredMatrices:
    """A~_ij = a_ij - a_i./(n-2) - a_.j/(n-2) + a_../((n-1)(n-2)) off the diagonal, 0 on it."""
    a = _as_array(m)
    n = a.shape[0]
    if n < 4:
        raise PreconditionError(f"U-centring requires n >= 4, got n = {n}")
    centered = (
        a
        - a.sum(axis=1, keepdims=True) / (n - 2)
        - a.sum(axis=0, keepdims=True) / (n - 2)
        + a.sum() / ((n - 1) * (n - 2))
    )
    np.fill_diagonal(centered, 0.0)
    return CenteredMatrices(centered, Centering.U)


def center(m: DistanceMatrix, centering: Centering) -> CenteredMatrices:
    return v_center(m) if centering is Centering.V else u_center(m)


@numba.njit
def _neumaier_dot(a, b):
    total = 0.0
    compensation = 0.0
    for i in range(a.size):
        x = a[i] * b[i]
        t = total + x
        if abs(total) >= abs(x):
            compensation += (total - t) + x
        else:
            compensation += (x - t) + total
        total = t
    return total + compensation


def inner_sum(a: np.ndarray, b: np.ndarray) -> float:
    """sum_ij a_ij b_ij; compensated (Neumaier) summation once n exceeds COMPENSATED_MIN_N."""
    if a.shape[0] > COMPENSATED_MIN_N:
        a = np.array(a, dtype=float).ravel()
        b = np.array(b, dtype=float).ravel()
        return float(_neumaier_dot(a, b))
    return float(np.sum(a * b))


def _product(a: CenteredMatrices, b: CenteredMatrices) -> float:
    n = a.n
    total = inner_sum(a.matrix, b.matrix)
    if a.centering is Centering.V:
        return total / (n * n)
    return total / (n * (n - 3))


def dcov_v(s: PairedSample) -> float:
    """Plug-in estimator, equal to dcov of the empirical measure."""
    return _product(v_center(s.dx), v_center(s.dy))


def dcov_u(s: PairedSample) -> float:
    """Unbiased estimator; may be negative."""
    if s.n < U_MIN_N:
        raise PreconditionError(f"dcov_u requires n >= {U_MIN_N}, got n = {s.n}")
    return _product(u_center(s.dx), u_center(s.dy))


def dvar_v(m: DistanceMatrix) -> float:
    a = v_center(m)
    return _product(a, a)


def dvar_u(m: DistanceMatrix) -> float:
    n = _as_array(m).shape[0]
    if n < U_MIN_N:
        raise PreconditionError(f"dvar_u requires n >= {U_MIN_N}, got n = {n}")
    a = u_center(m)
    return _product(a, a)


def _ratio(cov: float, var_x: float, var_y: float) -> float:
    denominator = var_x * var_y
    if denominator <= 0:
        return 0.0
    return cov / float(np.sqrt(denominator))


def dcor_v(s: PairedSample) -> float:
    """dcov_v / sqrt(dvar_v(X) dvar_v(Y)), or 0 when a distance variance vanishes."""
    return _ratio(dcov_v(s), dvar_v(s.dx), dvar_v(s.dy))


def dcor_u(s: PairedSample) -> float:
    """U-statistic ratio, reported raw: it is not clipped to [0, 1].

    Returns 0 when dvar_u(X) * dvar_u(Y) <= 0.
    """
    return _ratio(dcov_u(s), dvar_u(s.dx), dvar_u(s.dy))


@dataclass(frozen=True)
class Statistic:
    """A test statistic expressed on centred matrices, so B can be re-indexed cheaply."""

    name: str
    centering: Centering
    normalized: bool

    @property
    def min_n(self) -> int:
        return U_MIN_N if self.centering is Centering.U else 1

    def center(self, m: DistanceMatrix) -> CenteredMatrices:
        return center(m, self.centering)

    def product(self, a: CenteredMatrices, b: CenteredMatrices) -> float:
        return _product(a, b)

    def normalizer(self, a: CenteredMatrices, b: CenteredMatrices) -> float:
        """sqrt(dvar_x dvar_y) for correlations (0 when degenerate), 1 for covariances."""
        if not self.normalized:
            return 1.0
        denominator = _product(a, a) * _product(b, b)
        return float(np.sqrt(denominator)) if denominator > 0 else 0.0

    def __call__(self, s: PairedSample) -> float:
        if s.n < self.min_n:
            raise PreconditionError(
                f"{self.name} requires n >= {self.min_n}, got n = {s.n}"
            )
        a, b = self.center(s.dx), self.center(s.dy)
        norm = self.normalizer(a, b)
        return self.product(a, b) / norm if norm > 0 else 0.0


STATISTICS = {
    "dcov_v": Statistic("dcov_v", Centering.V, normalized=False),
    "dcov_u": Statistic("dcov_u", Centering.U, normalized=False),
    "dcor_v": Statistic("dcor_v", Centering.V, normalized=True),
    "dcor_u": Statistic("dcor_u", Centering.U, normalized=True),
}


def statistic(name: str) -> Statistic:
    try:
        return STATISTICS[name]
    except KeyError:
        raise InputError(
            f"Unknown statistic: {name} - must be one of {sorted(STATISTICS)}"
        )


def kernel_f(d12: float, d34: float, d13: float, d24: float) -> float:
    return d12 + d34 - d13 - d24


def kernel_h(s: PairedSample, indices) -> float:
    """h = f_X(x1, x2, x3, x4) * f_Y(y1, y2, y5, y6) for a 6-tuple of sample indices."""
    indices = tuple(int(i) for i in indices)
    if len(indices) != 6:
        raise PreconditionError(f"kernel_h takes 6 indices, got {len(indices)}")
    for i in indices:
        if not 0 <= i < s.n:
            raise PreconditionError(f"Sample index {i} out of range [0, {s.n})")
    i1, i2, i3, i4, i5, i6 = indices
    a, b = s.dx.d, s.dy.d
    f_x = kernel_f(a[i1, i2], a[i3, i4], a[i1, i3], a[i2, i4])
    f_y = kernel_f(b[i1, i2], b[i5, i6], b[i1, i5], b[i2, i6])
    return float(f_x * f_y)


@numba.njit
def _h(a, b, z):
    f_x = a[z[0], z[1]] + a[z[2], z[3]] - a[z[0], z[2]] - a[z[1], z[3]]
    f_y = b[z[0], z[1]] + b[z[4], z[5]] - b[z[0], z[4]] - b[z[1], z[5]]
    return f_x * f_y


@numba.njit
def _tuple_average(a, b, perms, distinct):
    """Average of h (averaged over ``perms`` of its arguments) over all 6-tuples."""
    n = a.shape[0]
    idx = np.empty(6, np.int64)
    z = np.empty(6, np.int64)
    total = 0.0
    count = 0
    for t in range(n**6):
        r = t
        for pos in range(5, -1, -1):
            idx[pos] = r % n
            r //= n
        if distinct:
            repeated = False
            for p in range(6):
                for q in range(p + 1, 6):
                    if idx[p] == idx[q]:
                        repeated = True
            if repeated:
                continue
        value = 0.0
        for p in range(perms.shape[0]):
            for pos in range(6):
                z[pos] = idx[perms[p, pos]]
            value += _h(a, b, z)
        total += value / perms.shape[0]
        count += 1
    return total / count


_IDENTITY = np.arange(6, dtype=np.int64).reshape(1, 6)
_ALL_PERMUTATIONS = np.array(list(itertools.permutations(range(6))), dtype=np.int64)


def brute_force_v(s: PairedSample, symmetrize: bool = False) -> float:
    """(1 / n^6) times the sum of h over every index 6-tuple; O(n^6), n <= 12.

    With ``symmetrize`` the kernel is replaced by its average over all 720
    argument permutations (n <= 5).
    """
    limit = BRUTE_FORCE_V_SYMMETRIZED_MAX_N if symmetrize else BRUTE_FORCE_V_MAX_N
    if s.n > limit:
        raise PreconditionError(
            f"brute_force_v is limited to n <= {limit}, got n = {s.n}"
        )
    perms = _ALL_PERMUTATIONS if symmetrize else _IDENTITY
    return float(_tuple_average(np.array(s.dx.d), np.array(s.dy.d), perms, False))


def brute_force_u(s: PairedSample) -> float:
    """Average of h over all ordered 6-tuples of distinct indices; 6 <= n <= 10."""
    low, high = BRUTE_FORCE_U_RANGE
    if not low <= s.n <= high:
        raise PreconditionError(
            f"brute_force_u requires {low} <= n <= {high}, got n = {s.n}"
        )
    return float(_tuple_average(np.array(s.dx.d), np.array(s.dy.d), _IDENTITY, True))


def brownian_plugin(s: PairedSample) -> float:
    """T1 + T2 - 2 T3 with the moments taken under the empirical measure."""
    a, b = s.dx.d, s.dy.d
    n = s.n
    t1 = inner_sum(a, b) / n**2
    t2 = (a.sum() / n**2) * (b.sum() / n**2)
    t3 = float(a.sum(axis=1) @ b.sum(axis=1)) / n**3
    return t1 + t2 - 2 * t3
