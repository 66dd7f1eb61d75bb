"""Distance matrices: construction from raw observations, validation and loading.

Every sample enters the package as a ``DistanceMatrix``; estimators, negative-type
diagnostics and tests never see raw points, so the metrics of the two paired
spaces are chosen independently.
"""

from __future__ import annotations

import logging
import math
import pathlib
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, floyd_warshall
from scipy.spatial.distance import pdist, squareform

from . import config
from .errors import InputError, PreconditionError
from .readers import matrix_io

logger = logging.getLogger(__name__)

# metric kind -> scipy.spatial.distance name
VECTOR_METRICS = {
    "euclidean": "euclidean",
    "manhattan": "cityblock",
    "chebyshev": "chebyshev",
    "minkowski": "minkowski",
}
METRIC_KINDS = tuple(VECTOR_METRICS) + ("discrete", "graph", "precomputed")


@dataclass(frozen=True)
class Point:
    """One observation: coordinates for vector metrics, a label for discrete/graph metrics."""

    coords: tuple = ()
    label: str = None

    def __post_init__(self):
        coords = tuple(float(c) for c in np.ravel(self.coords))
        if not all(math.isfinite(c) for c in coords):
            raise InputError(f"Point coordinates must be finite, got {coords}")
        if self.label is not None and not str(self.label):
            raise InputError("Point label must be nonempty")
        object.__setattr__(self, "coords", coords)

    @property
    def key(self):
        """Identity used by the discrete metric."""
        return self.label if self.label is not None else self.coords


@dataclass(frozen=True)
class MetricSpec:
    """Metric selection.

    Args:
        kind (str): one of euclidean, manhattan, chebyshev, minkowski, discrete, graph, precomputed.
        p (float): minkowski exponent, p >= 1.
        edges (tuple): graph edges ``(u, v, w)`` with nonnegative weights w.
    """

    kind: str = "euclidean"
    p: float = None
    edges: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise InputError(
                f"Unknown metric kind: {self.kind} - must be one of {METRIC_KINDS}"
            )
        if self.kind == "minkowski":
            if self.p is None or not self.p >= 1:
                raise InputError(f"minkowski metric requires p >= 1, got p = {self.p}")
        edges = tuple((str(u), str(v), float(w)) for u, v, w in self.edges)
        for u, v, w in edges:
            if not math.isfinite(w) or w < 0:
                raise InputError(f"Graph edge ({u}, {v}) has invalid weight {w}")
        if self.kind == "graph" and not edges:
            raise InputError("graph metric requires a nonempty edge list")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def parse(cls, text: str, edges=()) -> MetricSpec:
        """Parse "euclidean", "minkowski:3", "graph" (edges passed separately), ..."""
        kind, _, param = text.strip().lower().partition(":")
        if kind == "minkowski":
            if not param:
                raise InputError('minkowski needs an exponent, e.g. "minkowski:3"')
            try:
                p = float(param)
            except ValueError:
                raise InputError(f"Invalid minkowski exponent: {param!r}")
            return cls(kind=kind, p=p)
        if param:
            raise InputError(f"Metric {kind} takes no parameter, got {param!r}")
        return cls(kind=kind, edges=tuple(edges) if kind == "graph" else ())

    def to_dict(self) -> dict:
        spec = {"kind": self.kind}
        if self.p is not None:
            spec["p"] = self.p
        if self.edges:
            spec["edges"] = [list(e) for e in self.edges]
        return spec


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Validated n x n table of pairwise distances (float64, read-only).

    Construction only enforces a finite square shape; the metric axioms are
    checked by ``validate_metric`` so that triangle-deficient precomputed
    matrices can still be represented.
    """

    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InputError(f"Distance matrix must be square, got shape {d.shape}")
        if d.shape[0] < 1:
            raise InputError("Distance matrix must have at least one point")
        if not np.all(np.isfinite(d)):
            raise InputError("Distance matrix entries must be finite")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def __getitem__(self, index):
        return self.d[index]

    def __len__(self):
        return self.n

    def submatrix(self, index) -> DistanceMatrix:
        """Rows/columns ``index`` (repeats allowed)."""
        index = np.asarray(index, dtype=int)
        return DistanceMatrix(self.d[np.ix_(index, index)])

    def to_dict(self) -> dict:
        return {"n": self.n, "d": self.d.tolist()}


@dataclass
class ValidationReport:
    """Outcome of ``validate_metric``; ``triangle`` is None when the O(n^3) check was skipped."""

    n: int
    tol: float
    finite: bool = True
    symmetric: bool = True
    zero_diagonal: bool = True
    nonnegative: bool = True
    triangle: bool = True
    symmetry_violation: tuple = None
    diagonal_violation: int = None
    negative_entry: tuple = None
    # (i, j, k) with d[i][j] > d[i][k] + d[k][j]
    triangle_violation: tuple = None

    @property
    def ok(self) -> bool:
        """All performed checks passed."""
        return (
            self.finite
            and self.symmetric
            and self.zero_diagonal
            and self.nonnegative
            and self.triangle is not False
        )

    @property
    def semimetric_ok(self) -> bool:
        """Everything except the triangle inequality passed."""
        return self.finite and self.symmetric and self.zero_diagonal and self.nonnegative

    def failures(self) -> list:
        messages = []
        if not self.finite:
            messages.append("non-finite entries")
        if not self.symmetric:
            i, j = self.symmetry_violation
            messages.append(f"asymmetric at ({i}, {j})")
        if not self.zero_diagonal:
            messages.append(f"nonzero diagonal at i={self.diagonal_violation}")
        if not self.nonnegative:
            i, j = self.negative_entry
            messages.append(f"negative entry at ({i}, {j})")
        if self.triangle is False:
            i, j, k = self.triangle_violation
            messages.append(f"triangle inequality fails at ({i}, {j}) via {k}")
        return messages

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "tol": self.tol,
            "ok": self.ok,
            "finite": self.finite,
            "symmetric": self.symmetric,
            "zero_diagonal": self.zero_diagonal,
            "nonnegative": self.nonnegative,
            "triangle": self.triangle,
            "symmetry_violation": _as_list(self.symmetry_violation),
            "diagonal_violation": self.diagonal_violation,
            "negative_entry": _as_list(self.negative_entry),
            "triangle_violation": _as_list(self.triangle_violation),
        }


def _as_list(value):
    return None if value is None else [int(v) for v in value]


def _first_triangle_violation(d: np.ndarray, threshold: float):
    """Lexicographically first (i, j, k) with d[i][j] > d[i][k] + d[k][j] + threshold."""
    for i in range(d.shape[0]):
        # rows k, columns j: d[i][k] + d[k][j]
        via = d[i][:, None] + d
        violation = d[i][None, :] > via + threshold
        if violation.any():
            j, k = np.argwhere(violation.T)[0]
            return int(i), int(j), int(k)
    return None


def validate_metric(
    m, tol: float = None, check_triangle: bool = None
) -> ValidationReport:
    """Check the metric axioms of a distance matrix; never raises.

    Args:
        m (DistanceMatrix | array_like): square matrix.
        tol (float, optional): absolute tolerance, scaled by max(1, max|d|).
            Defaults to config "validation_tol".
        check_triangle (bool, optional): run the O(n^3) triangle check. Defaults to
            True for n <= config "triangle_max_n".

    Returns:
        ValidationReport: flags plus the first violating index (pair, index or triple).
    """
    d = m.d if isinstance(m, DistanceMatrix) else np.asarray(m, dtype=float)
    n = d.shape[0]
    tol = config.get("validation_tol") if tol is None else tol
    report = ValidationReport(n=n, tol=tol)

    if not np.all(np.isfinite(d)):
        report.finite = False
        report.triangle = None
        return report

    threshold = tol * max(1.0, float(np.abs(d).max()) if d.size else 1.0)

    asym = np.argwhere(np.abs(d - d.T) > threshold)
    if len(asym):
        report.symmetric = False
        report.symmetry_violation = tuple(int(v) for v in asym[0])

    diag = np.flatnonzero(np.abs(np.diag(d)) > threshold)
    if len(diag):
        report.zero_diagonal = False
        report.diagonal_violation = int(diag[0])

    negative = np.argwhere(d < -threshold)
    if len(negative):
        report.nonnegative = False
        report.negative_entry = tuple(int(v) for v in negative[0])

    if check_triangle is None:
        check_triangle = n <= config.get("triangle_max_n")
    if not check_triangle:
        logger.warning(f"triangle check skipped for n = {n}")
        report.triangle = None
    else:
        violation = _first_triangle_violation(d, threshold)
        if violation is not None:
            report.triangle = False
            report.triangle_violation = violation

    return report


def ensure_metric(
    m: DistanceMatrix,
    tol: float = None,
    allow_triangle_violation: bool = False,
    check_triangle: bool = None,
) -> ValidationReport:
    """Raise ``PreconditionError`` unless ``m`` is a valid (semi)metric."""
    report = validate_metric(m, tol=tol, check_triangle=check_triangle)
    if not report.semimetric_ok:
        raise PreconditionError(
            f"Invalid distance matrix: {'; '.join(report.failures())}"
        )
    if report.triangle is False:
        if not allow_triangle_violation:
            raise PreconditionError(
                f"Invalid distance matrix: {'; '.join(report.failures())}"
            )
        logger.warning(
            f"accepting matrix that violates the triangle inequality: {report.failures()}"
        )
    return report


def _as_points(points) -> list:
    if isinstance(points, np.ndarray):
        array = points.reshape(-1, 1) if points.ndim == 1 else points
        return [Point(coords=row) for row in array]
    return [p if isinstance(p, Point) else _coerce_point(p) for p in points]


def _coerce_point(value) -> Point:
    if isinstance(value, str):
        return Point(label=value)
    return Point(coords=np.atleast_1d(np.asarray(value, dtype=float)))


def _graph_distances(points: list, spec: MetricSpec) -> np.ndarray:
    vertices = sorted({v for u, w, _ in spec.edges for v in (u, w)})
    index = {v: i for i, v in enumerate(vertices)}

    weights = np.full((len(vertices), len(vertices)), np.inf)
    np.fill_diagonal(weights, 0.0)
    for u, v, w in spec.edges:
        a, b = index[u], index[v]
        if a == b:
            continue
        weights[a, b] = weights[b, a] = min(weights[a, b], w)

    graph = csgraph_from_dense(weights, null_value=np.inf)
    shortest = floyd_warshall(graph, directed=False)
    if np.isinf(shortest).any():
        i, j = np.argwhere(np.isinf(shortest))[0]
        raise InputError(
            f"Graph is disconnected: no path between {vertices[i]!r} and {vertices[j]!r}"
        )

    try:
        sample = [index[str(p.label)] for p in points]
    except KeyError as e:
        raise InputError(f"Point label {e.args[0]!r} is not a vertex of the graph")
    return shortest[np.ix_(sample, sample)]


def build_distance_matrix(points, spec: MetricSpec = None) -> DistanceMatrix:
    """Pairwise distances of a sample under ``spec``.

    Args:
        points (list[Point] | np.ndarray): observations; an (n, p) array is read as n points in R^p.
        spec (MetricSpec, optional): metric. Defaults to euclidean.

    Returns:
        DistanceMatrix: graph metrics use all-pairs shortest paths (Floyd-Warshall);
            "precomputed" reads each point's coordinates as a matrix row.
    """
    spec = spec or MetricSpec()
    points = _as_points(points)
    n = len(points)
    if n < 1:
        raise InputError("Cannot build a distance matrix from an empty sample")

    if spec.kind in VECTOR_METRICS:
        dims = {len(p.coords) for p in points}
        if len(dims) != 1 or 0 in dims:
            raise InputError(
                f"Dimension mismatch among points: dimensions {sorted(dims)}"
            )
        coords = np.array([p.coords for p in points], dtype=float)
        if n == 1:
            d = np.zeros((1, 1))
        elif spec.kind == "minkowski":
            d = squareform(pdist(coords, "minkowski", p=spec.p))
        else:
            d = squareform(pdist(coords, VECTOR_METRICS[spec.kind]))
    elif spec.kind == "discrete":
        keys = {}
        codes = np.array([keys.setdefault(p.key, len(keys)) for p in points])
        d = (codes[:, None] != codes[None, :]).astype(float)
    elif spec.kind == "graph":
        d = _graph_distances(points, spec)
    else:
        rows = [p.coords for p in points]
        if any(len(r) != n for r in rows):
            raise InputError(f"Precomputed rows must all have {n} entries")
        d = np.array(rows, dtype=float)

    logger.debug(f"built {n}x{n} {spec.kind} distance matrix")
    return DistanceMatrix(d)


def load_matrix(
    file_path,
    file_format: str = None,
    validate: bool = False,
    tol: float = None,
    allow_triangle_violation: bool = False,
) -> DistanceMatrix:
    """Load a precomputed distance matrix from CSV or JSON.

    Args:
        file_path (str | pathlib.Path): input file.
        file_format (str, optional): "csv" or "json"; inferred from the suffix if None.
        validate (bool): check the metric axioms and raise ``PreconditionError`` on failure.
        tol (float, optional): validation tolerance.
        allow_triangle_violation (bool): accept triangle-deficient matrices when validating.
    """
    m = DistanceMatrix(matrix_io.read_matrix(file_path, file_format))
    if validate:
        ensure_metric(m, tol=tol, allow_triangle_violation=allow_triangle_violation)
    return m


def load_points(file_path, labels: bool = False) -> list:
    """Load observations: coordinate rows (optional header), or one label per row."""
    file_path = pathlib.Path(file_path)
    if labels:
        return [Point(label=label) for label in matrix_io.read_labels_csv(file_path)]
    coords, _ = matrix_io.read_points_csv(file_path)
    return [Point(coords=row) for row in coords]


def load_edges(file_path) -> tuple:
    return tuple(matrix_io.read_edges_csv(file_path))
