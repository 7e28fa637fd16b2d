import math

import numpy as np
import pytest

from abplab import calculus as cc
from abplab.mmspace import Region, build_model_space, space_from_dict


def test_dirichlet_examples(rng, interval11):
    x = interval11.coords[:, 0]
    assert cc.dirichlet_energy(interval11, x, x) == pytest.approx(1.0, rel=1e-12)
    assert cc.dirichlet_energy(interval11, rng.random(11), np.full(11, 3.0)) == 0.0
    f, u, v = rng.random((3, 11))
    lhs = cc.dirichlet_energy(interval11, f, u + v)
    rhs = cc.dirichlet_energy(interval11, f, u) + cc.dirichlet_energy(interval11, f, v)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert cc.dirichlet_energy(interval11, f, u) == pytest.approx(cc.dirichlet_energy(interval11, u, f))


def test_no_edges_is_an_error():
    s = space_from_dict({"mass": [1, 1], "edges": [], "dist": [[0, 1], [1, 0]]})
    with pytest.raises(cc.CalculusError):
        cc.dirichlet_energy(s, [0, 1], [0, 1])


def test_laplacian_of_polynomials(interval101):
    x = interval101.coords[:, 0]
    inner = interval101.interior
    lin = cc.discrete_laplacian(interval101, 3 * x - 1).values[inner]
    np.testing.assert_allclose(lin, 0.0, atol=1e-10)
    quad = cc.discrete_laplacian(interval101, x**2).values[inner]
    np.testing.assert_allclose(quad, 2.0, atol=1e-6)
    assert np.isnan(cc.discrete_laplacian(interval101, x).masked()[0])


@pytest.mark.parametrize("spec", [
    {"model": "interval", "a": 0, "b": 1, "n": 31},
    {"model": "circle", "n": 40},
    {"model": "euclidean_grid", "dim": 2, "extent": [0, 1], "h": 0.1},
    {"model": "sphere2_grid", "n_lat": 8, "n_lon": 12},
])
def test_integration_by_parts(rng, spec):
    s = build_model_space(spec)
    u = rng.normal(size=s.n)
    f = np.where(s.interior, rng.normal(size=s.n), 0.0)
    lap = cc.discrete_laplacian(s, u).values
    lhs = float(np.sum(f * lap * s.mass))
    # independent summation order: loop over ordered pairs
    ordered = 0.0
    for (i, j), w in zip(s.edges.tolist(), s.weights.tolist()):
        ordered += 0.5 * w * ((f[i] - f[j]) * (u[i] - u[j]) + (f[j] - f[i]) * (u[j] - u[i]))
    scale = np.linalg.norm(f) * np.linalg.norm(u) * max(1.0, s.weights.max())
    assert abs(lhs + ordered) <= 1e-10 * scale


def test_sphere_laplacian_of_cos_colatitude():
    s = build_model_space({"model": "sphere2_grid", "n_lat": 64, "n_lon": 128})
    u = np.cos(s.colatitude)
    lap = cc.discrete_laplacian(s, u).values
    band = (s.colatitude > 0.3) & (s.colatitude < math.pi - 0.3)
    np.testing.assert_allclose(lap[band], -2 * u[band], atol=5e-3)


def test_positive_part(interval101):
    x = interval101.coords[:, 0]
    Om = Region(np.arange(10, 90), "open")
    assert cc.positive_part_sup_norm(cc.discrete_laplacian(interval101, x), Om) == pytest.approx(0, abs=1e-10)
    assert cc.positive_part_sup_norm(cc.discrete_laplacian(interval101, x**2), Om) == pytest.approx(2, abs=1e-6)
    assert cc.positive_part_sup_norm(cc.discrete_laplacian(interval101, -x**2), Om) == 0.0
    with pytest.warns(UserWarning):
        cc.positive_part_sup_norm(cc.discrete_laplacian(interval101, x**2), Region([0, 1, 2]))


def test_comparison_dirac(interval101):
    Om = Region(np.arange(20, 80), "open")
    rep = cc.laplacian_comparison_check(interval101, Region([50]), Om, np.zeros(101), 0.2)
    assert rep.ok
    assert rep.members == 1
    assert rep.min_scaled == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("h", [0.02, 0.01])
def test_comparison_concave_paraboloid(h):
    s = build_model_space({"model": "euclidean_grid", "dim": 2, "extent": [-1, 1], "h": h})
    r2 = (s.coords**2).sum(axis=1)
    u = -r2
    Om = Region(np.flatnonzero(r2 < 0.5**2), "open")
    D = Region(np.flatnonzero(r2 < 0.05**2), "vertex")
    rep = cc.laplacian_comparison_check(s, D, Om, u, 0.05, "r2")
    assert rep.ok
    assert cc.laplacian_comparison_check(s, D, Om, u, 0.05, "r2", tol=math.inf).ok


def test_comparison_rejects_members_off_interior(interval101):
    Om = Region(np.arange(0, 101), "open")
    with pytest.raises(cc.CalculusError):
        cc.laplacian_comparison_check(interval101, Region([0]), Om, np.zeros(101), 0.1)
