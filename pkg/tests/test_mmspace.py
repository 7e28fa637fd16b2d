import json
import math

import numpy as np
import pytest

from abplab.mmspace import (Region, SpaceError, build_model_space, epsilon_neighborhood, load_space,
                            space_from_dict, validate_metric)


def test_interval_layout(interval11):
    s = interval11
    assert s.n == 11
    assert s.h == pytest.approx(0.1)
    assert s.coords[-1, 0] == 1.0
    assert s.total_mass == pytest.approx(1.1)
    assert s.diameter == pytest.approx(1.0)
    assert s.interior.tolist() == [False] + [True] * 9 + [False]
    assert len(s.edges) == 10
    np.testing.assert_allclose(s.weights, 10.0)


def test_circle_distances_wrap(circle100):
    s = circle100
    h = 2 * math.pi / 100
    assert s.dist([0], [99])[0, 0] == pytest.approx(h)
    assert s.dist([0], [50])[0, 0] == pytest.approx(math.pi)
    assert s.diameter == pytest.approx(math.pi)
    assert len(s.edges) == 100


def test_sphere_distances_accurate_near_zero():
    s = build_model_space({"model": "sphere2_grid", "n_lat": 8, "n_lon": 16})
    D = s.dist()
    assert np.all(np.diag(D) == 0)
    np.testing.assert_allclose(D, D.T, atol=1e-15)
    assert s.diameter <= math.pi
    assert s.total_mass == pytest.approx(4 * math.pi, rel=2e-2)
    assert validate_metric(s).ok


def test_euclidean_grid_interior_and_weights():
    s = build_model_space({"model": "euclidean_grid", "dim": 2, "extent": [0, 1], "h": 0.25})
    assert s.n == 25
    assert s.interior.sum() == 9
    np.testing.assert_allclose(s.weights, 1.0)
    np.testing.assert_allclose(s.mass, 0.0625)


@pytest.mark.parametrize("spec, field", [
    ({"model": "torus"}, "model"),
    ({"model": "interval", "a": 0, "b": 1, "n": 1}, "n"),
    ({"model": "interval", "a": 1, "b": 0, "n": 5}, "b"),
    ({"model": "euclidean_grid", "dim": 2, "extent": [0, 1], "h": 0.3}, "h"),
    ({"model": "sphere2_grid", "n_lat": 1, "n_lon": 8}, "n_lat"),
    ({"model": "circle"}, "n"),
])
def test_bad_descriptors_name_the_field(spec, field):
    with pytest.raises(SpaceError) as exc:
        build_model_space(spec)
    assert exc.value.field == field


def test_space_file_roundtrip(tmp_path, interval11):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(interval11.to_json()))
    s = load_space(p)
    np.testing.assert_allclose(s.dist(), interval11.dist(), atol=1e-15)
    assert s.interior.sum() == 9
    assert validate_metric(s).ok


def test_validation_reports_every_defect():
    D = [[0, 1, 5], [1, 0, 1], [5, 1.5, 1]]
    s = space_from_dict({"mass": [1, 0, 1], "edges": [], "dist": D})
    rep = validate_metric(s)
    assert not rep.ok
    assert rep.diagonal == [2]
    assert (1, 2) in rep.symmetry
    assert rep.mass == [1]
    assert rep.triangle_count >= 1
    assert (0, 1, 2) in rep.triangle
    d = rep.to_dict()
    assert set(d) >= {"diagonal", "symmetry", "positivity", "triangle", "mass"}


def test_completion_from_edge_lengths():
    doc = {"mass": [1, 1, 1, 1], "edges": [[0, 1, 1, 1.0], [1, 2, 1, 2.0], [2, 3, 1, 0.5]]}
    s = space_from_dict(doc, complete_from_edges=True)
    assert s.dist([0], [3])[0, 0] == 3.5
    assert validate_metric(s).ok
    with pytest.raises(SpaceError):
        space_from_dict({"mass": [1, 1], "edges": [[0, 1, 1]]}, complete_from_edges=True)


def test_epsilon_neighborhood_is_strict(interval11):
    A = Region([5])
    assert epsilon_neighborhood(interval11, A, 0.1).tolist() == [5]
    assert epsilon_neighborhood(interval11, A, 0.15).tolist() == [4, 5, 6]
    assert epsilon_neighborhood(interval11, A, 0).tolist() == [5]


def test_epsilon_neighborhood_on_circle_half_steps(circle100):
    h = circle100.h
    nb = epsilon_neighborhood(circle100, Region([0]), 1.5 * h)
    assert nb.tolist() == [0, 1, 99]


def test_boundary_and_closure(interval11):
    om = Region([3, 4, 5], "open")
    assert interval11.boundary(om).tolist() == [2, 6]
    assert interval11.closure(om).tolist() == [2, 3, 4, 5, 6]


def test_geodesic_oracle_models(interval11, circle100):
    assert interval11.geodesic_point(0, 10, 0.5) == 5
    assert interval11.geodesic_point(0, 1, 0.5) == 0  # tie goes low
    assert interval11.geodesic_point(2, 8, 0.0) == 2
    assert interval11.geodesic_point(2, 8, 1.0) == 8
    assert circle100.geodesic_point(95, 5, 0.5) == 0
    assert circle100.geodesic_point(10, 20, 0.3) == 13
    s = build_model_space({"model": "sphere2_grid", "n_lat": 16, "n_lon": 32})
    i, j = 5 * 32 + 3, 9 * 32 + 3
    k = s.geodesic_point(i, j, 0.5)
    assert k == 7 * 32 + 3


def test_search_oracle_on_matrix_space():
    D = np.abs(np.subtract.outer(np.arange(5.0), np.arange(5.0)))
    s = space_from_dict({"mass": [1] * 5, "edges": [], "dist": D.tolist()})
    assert s.geodesic_point(0, 4, 0.5) == 2
    assert s.geodesic_point(0, 4, 0.6) == 2


def test_dist_to_set_large_path_matches_dense():
    s = build_model_space({"model": "euclidean_grid", "dim": 2, "extent": [0, 1], "h": 0.01})
    S = np.flatnonzero(np.hypot(s.coords[:, 0] - 0.5, s.coords[:, 1] - 0.5) < 0.2)
    pts = np.arange(0, s.n, 97)
    ref = s.dist(pts, S).min(axis=1)
    np.testing.assert_allclose(s.dist_to_set(S, pts), ref, atol=1e-14)


def test_region_helpers():
    A = Region([3, 1, 1, 2])
    assert A.tolist() == [1, 2, 3]
    assert 2 in A and 4 not in A
    assert A.issubset(Region([0, 1, 2, 3]))
    assert A.difference(Region([2])).tolist() == [1, 3]
    assert A.mask(5).tolist() == [False, True, True, True, False]
