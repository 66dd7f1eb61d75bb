import json

import numpy as np
import pytest

from metric_dcov.errors import InputError, PreconditionError
from metric_dcov.metric_core import (
    DistanceMatrix,
    MetricSpec,
    Point,
    build_distance_matrix,
    ensure_metric,
    load_edges,
    load_matrix,
    load_points,
    validate_metric,
)

K23_EDGES = [(a, b, 1.0) for a in ("a1", "a2") for b in ("b1", "b2", "b3")]


def test_euclidean_on_the_line():
    m = build_distance_matrix([Point(coords=[0]), Point(coords=[3]), Point(coords=[4])])
    np.testing.assert_array_equal(m.d, [[0, 3, 4], [3, 0, 1], [4, 1, 0]])


def test_discrete_two_labels():
    m = build_distance_matrix(["red", "blue"], MetricSpec("discrete"))
    np.testing.assert_array_equal(m.d, [[0, 1], [1, 0]])


def test_discrete_repeated_labels():
    m = build_distance_matrix(["a", "b", "a"], MetricSpec("discrete"))
    assert m.d[0, 2] == 0
    assert m.d[0, 1] == m.d[1, 2] == 1


def test_k23_shortest_paths(fixtures):
    labels = ["a1", "a2", "b1", "b2", "b3"]
    m = build_distance_matrix(labels, MetricSpec("graph", edges=K23_EDGES))
    np.testing.assert_array_equal(m.d, fixtures["k23"].d)


def test_path_graph_distances():
    edges = [(str(i), str(i + 1), 1) for i in range(6)]
    m = build_distance_matrix([str(i) for i in range(7)], MetricSpec("graph", edges=edges))
    i, j = np.indices((7, 7))
    np.testing.assert_array_equal(m.d, np.abs(i - j))


def test_graph_uses_shortest_weighted_path():
    edges = [("u", "v", 5.0), ("u", "w", 1.0), ("w", "v", 1.5)]
    m = build_distance_matrix(["u", "v"], MetricSpec("graph", edges=edges))
    assert m.d[0, 1] == 2.5


def test_graph_errors():
    with pytest.raises(InputError, match="disconnected"):
        build_distance_matrix(["a", "c"], MetricSpec("graph", edges=[("a", "b", 1), ("c", "d", 1)]))
    with pytest.raises(InputError, match="not a vertex"):
        build_distance_matrix(["a", "z"], MetricSpec("graph", edges=[("a", "b", 1)]))
    with pytest.raises(InputError):
        MetricSpec("graph")
    with pytest.raises(InputError, match="invalid weight"):
        MetricSpec("graph", edges=[("a", "b", -1)])


def test_dimension_mismatch():
    with pytest.raises(InputError, match="Dimension mismatch"):
        build_distance_matrix([Point(coords=[0, 1]), Point(coords=[2])])


def test_minkowski_p_below_one():
    with pytest.raises(InputError, match="p >= 1"):
        MetricSpec("minkowski", p=0.5)
    with pytest.raises(InputError):
        MetricSpec.parse("minkowski:0.9")


def test_metric_spec_parse():
    assert MetricSpec.parse("minkowski:3") == MetricSpec("minkowski", p=3.0)
    assert MetricSpec.parse(" Manhattan ").kind == "manhattan"
    with pytest.raises(InputError, match="Unknown metric kind"):
        MetricSpec.parse("cosine")
    with pytest.raises(InputError, match="takes no parameter"):
        MetricSpec.parse("euclidean:2")


def test_point_invariants():
    with pytest.raises(InputError, match="finite"):
        Point(coords=[0.0, np.nan])
    with pytest.raises(InputError, match="nonempty"):
        Point(label="")


def test_minkowski_special_cases(rng):
    x = rng.normal(size=(15, 3))
    np.testing.assert_allclose(
        build_distance_matrix(x, MetricSpec("minkowski", p=2)).d,
        build_distance_matrix(x, MetricSpec("euclidean")).d,
        rtol=0,
        atol=1e-12,
    )
    np.testing.assert_allclose(
        build_distance_matrix(x, MetricSpec("minkowski", p=1)).d,
        build_distance_matrix(x, MetricSpec("manhattan")).d,
        rtol=0,
        atol=1e-12,
    )


@pytest.mark.parametrize("kind", ["euclidean", "manhattan", "chebyshev", "minkowski"])
def test_builtin_metrics_validate(rng, kind):
    spec = MetricSpec(kind, p=1.5 if kind == "minkowski" else None)
    for _ in range(10):
        x = rng.normal(size=(rng.integers(1, 25), rng.integers(1, 4)))
        report = validate_metric(build_distance_matrix(x, spec), tol=1e-12)
        assert report.ok, report.failures()


def test_permutation_equivariance(rng):
    x = rng.normal(size=(9, 2))
    perm = rng.permutation(9)
    m = build_distance_matrix(x, MetricSpec("chebyshev"))
    np.testing.assert_array_equal(
        build_distance_matrix(x[perm], MetricSpec("chebyshev")).d,
        m.d[np.ix_(perm, perm)],
    )


def test_single_point_matrix():
    m = build_distance_matrix(np.array([[1.0, 2.0]]))
    assert m.n == 1
    assert m.d[0, 0] == 0


def test_distance_matrix_is_read_only():
    m = DistanceMatrix([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        m.d[0, 1] = 5
    with pytest.raises(InputError, match="square"):
        DistanceMatrix([[0, 1, 2], [1, 0, 1]])
    with pytest.raises(InputError, match="finite"):
        DistanceMatrix([[0, np.inf], [np.inf, 0]])


def test_validate_metric_passes():
    report = validate_metric(DistanceMatrix([[0, 1], [1, 0]]))
    assert report.ok
    assert report.failures() == []


def test_validate_metric_diagonal():
    report = validate_metric(DistanceMatrix([[0, 5], [5, 0.1]]))
    assert not report.zero_diagonal
    assert report.diagonal_violation == 1
    assert not report.ok


def test_validate_metric_triangle():
    report = validate_metric(DistanceMatrix([[0, 1, 3], [1, 0, 1], [3, 1, 0]]))
    assert report.semimetric_ok
    assert report.triangle is False
    assert report.triangle_violation == (0, 2, 1)
    assert "triangle inequality fails at (0, 2) via 1" in report.failures()


def test_validate_metric_asymmetric_and_negative():
    report = validate_metric(DistanceMatrix([[0, 1, -1], [2, 0, 1], [-1, 1, 0]]))
    assert report.symmetry_violation == (0, 1)
    assert report.negative_entry == (0, 2)
    assert json.dumps(report.to_dict())


def test_validate_metric_skips_triangle_when_asked():
    report = validate_metric(DistanceMatrix([[0, 1, 3], [1, 0, 1], [3, 1, 0]]), check_triangle=False)
    assert report.triangle is None
    assert report.ok


def test_ensure_metric_override():
    m = DistanceMatrix([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    with pytest.raises(PreconditionError, match="triangle"):
        ensure_metric(m)
    assert ensure_metric(m, allow_triangle_violation=True).triangle is False
    with pytest.raises(PreconditionError, match="asymmetric"):
        ensure_metric(DistanceMatrix([[0, 1], [2, 0]]), allow_triangle_violation=True)


def test_load_matrix_csv(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0,1\n1,0\n")
    np.testing.assert_array_equal(load_matrix(path).d, [[0, 1], [1, 0]])


def test_load_matrix_ragged_row(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0,1\n1\n")
    message = "Ragged row.*line 2: expected 2 fields, found 1"
    with pytest.raises(InputError, match=message):
        load_matrix(path)

    path.write_text("0,1\n\n1,0,2\n")
    with pytest.raises(InputError, match="Ragged row.*line 3"):
        load_matrix(path)


def test_load_matrix_empty_cell_is_a_parse_error(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0,,1\n1,0,1\n1,1,0\n")
    with pytest.raises(InputError, match="Parse error.*line 1, column 2"):
        load_matrix(path)


def test_load_points_ragged_row(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("x1,x2\n0,0\n3\n")
    with pytest.raises(InputError, match="Ragged row.*line 3"):
        load_points(path)


def test_load_matrix_parse_error_location(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0,1,2\n1,0,x\n2,1,0\n")
    with pytest.raises(InputError, match="line 2, column 3"):
        load_matrix(path)


def test_load_matrix_not_square(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0,1,2\n1,0,1\n")
    with pytest.raises(InputError, match="not square"):
        load_matrix(path)


def test_load_matrix_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"n": 1, "d": [[0]]}')
    m = load_matrix(path)
    assert m.n == 1 and m.d[0, 0] == 0

    path.write_text('{"n": 2, "d": [[0, 1]]}')
    with pytest.raises(InputError):
        load_matrix(path)


def test_load_matrix_validation(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0,1\n2,0\n")
    assert load_matrix(path).n == 2
    with pytest.raises(PreconditionError):
        load_matrix(path, validate=True)


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_matrix(tmp_path / "absent.csv")


def test_load_points_with_header(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("x1,x2\n0,0\n3,4\n")
    points = load_points(path)
    assert [p.coords for p in points] == [(0.0, 0.0), (3.0, 4.0)]
    assert build_distance_matrix(points).d[0, 1] == 5


def test_load_points_without_header(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("1.5\n-2\n")
    assert [p.coords for p in load_points(path)] == [(1.5,), (-2.0,)]


def test_load_labels_and_edges(tmp_path):
    labels = tmp_path / "labels.csv"
    labels.write_text("a1\nb2\na2\n")
    edges = tmp_path / "edges.csv"
    edges.write_text("u,v,w\n" + "".join(f"{a},{b},1\n" for a, b, _ in K23_EDGES))

    spec = MetricSpec("graph", edges=load_edges(edges))
    m = build_distance_matrix(load_points(labels, labels=True), spec)
    np.testing.assert_array_equal(m.d, [[0, 1, 2], [1, 0, 1], [2, 1, 0]])


def test_edges_default_weight(tmp_path):
    edges = tmp_path / "edges.csv"
    edges.write_text("a,b\nb,c\n")
    assert load_edges(edges) == (("a", "b", 1.0), ("b", "c", 1.0))
