import math

import numpy as np
import pytest

from abplab import abpverify as av
from abplab.mmspace import Region, build_model_space


@pytest.fixture(scope="module")
def parabola(interval201):
    s = interval201
    x = s.coords[:, 0]
    u = 5 * (x - 0.5) ** 2
    Om = Region(np.flatnonzero(s.interior), "open")
    D = Region(np.flatnonzero(np.abs(x - 0.5) <= 0.1 + 1e-12), "vertex")
    return s, u, Om, D


def test_equality_case(interval201):
    Om = Region(np.arange(40, 160), "open")
    rep = av.verify_abp(interval201, Region([100]), Om, np.zeros(201), 0.1, 0, 2)
    assert rep.coefficient == 1.0
    assert rep.L == 0.0
    assert rep.mass_D == rep.mass_R
    assert rep.slack == 0.0
    assert rep.ok


def test_parabola_k0(parabola):
    s, u, Om, D = parabola
    rep = av.verify_abp(s, D, Om, u, 0.1, 0, 2)
    assert rep.L == pytest.approx(10.0, abs=1e-6)
    assert rep.coefficient == pytest.approx((1 + 0.1 * rep.L / 2) ** 2)
    assert rep.ok and rep.slack > 0
    assert rep.exp_satisfied and rep.poly_le_exp
    assert rep.theta_sup >= rep.phi_inf >= 0


def test_negative_curvature_raises_coefficient(parabola):
    s, u, Om, D = parabola
    r0 = av.verify_abp(s, D, Om, u, 0.1, 0, 2)
    r1 = av.verify_abp(s, D, Om, u, 0.1, -1, 2)
    assert r1.coefficient > r0.coefficient >= 1
    assert r1.ok
    assert r1.exp_bound is None


def test_hypothesis_errors(parabola):
    s, u, Om, _ = parabola
    small = Region(np.arange(90, 111), "open")
    # a vertex far outside pulls the contact point onto the boundary
    with pytest.raises(av.HypothesisError) as exc:
        av.verify_abp(s, Region([10]), small, np.zeros(201), 0.1, 0, 2)
    assert exc.value.hypothesis == "contact_in_omega"
    with pytest.raises(av.HypothesisError) as exc:
        av.verify_abp(s, Region([100, 102]), Om, np.zeros(201), 0.3, 0, 2, kind="r1")
    assert exc.value.hypothesis == "r1_surjectivity"
    with pytest.raises(ValueError):
        av.verify_abp(s, Region([100]), Om, u, 0.1, 0, 2, kind="r1star")


def test_signed_distance_examples(interval101, circle100):
    s = interval101
    x = s.coords[:, 0]
    Om = Region(np.flatnonzero((x > 0.3 + 1e-12) & (x < 0.7 - 1e-12)), "open")
    u = av.signed_distance(s, Om)
    assert u[50] == pytest.approx(-0.2)
    assert u[90] == pytest.approx(0.2)
    assert u[30] == 0.0 and u[70] == 0.0
    assert av.lipschitz_defect(s, u) <= 1e-12
    half = Region(np.arange(50), "open")
    uc = av.signed_distance(circle100, half)
    D = circle100.dist()
    inside = half.mask(100)
    closure = circle100.closure(half).mask(100)
    ref = np.where(inside, -D[:, ~inside].min(axis=1), D[:, closure].min(axis=1))
    np.testing.assert_allclose(uc, ref, atol=1e-14)
    with pytest.raises(ValueError):
        av.signed_distance(s, s.everything)


def test_minkowski_examples(interval101):
    s = interval101
    x = s.coords[:, 0]
    Om = Region(np.flatnonzero((x > 0.3 + 1e-12) & (x < 0.7 - 1e-12)), "open")
    fit = av.minkowski_content(s, Om, [0.035, 0.055, 0.075, 0.095])
    assert fit.value == pytest.approx(2.0, abs=0.05)
    assert av.minkowski_content(s, s.everything, [0.02, 0.03, 0.04]).value == 0.0
    with pytest.raises(ValueError):
        av.minkowski_content(s, Om, [0.005, 0.02, 0.03])
    with pytest.raises(ValueError):
        av.minkowski_content(s, Om, [0.02, 0.03])


def test_exterior_sphere(interval101):
    s = interval101
    Om = Region(np.arange(30, 71), "open")
    ok, bad = av.exterior_sphere_check(s, Om, 0.1)
    assert ok and bad == []
    ok, bad = av.exterior_sphere_check(s, Om, 0.5)
    assert not ok


def test_circle_steiner_flat():
    s = build_model_space({"model": "circle", "n": 1000})
    h = s.h
    rep = av.steiner_experiment(s, Region(np.arange(300), "open"), 0.0, (np.arange(3, 31) + 0.5) * h)
    assert rep.minkowski_plus == pytest.approx(2.0, abs=1e-9)
    assert rep.band_ok and rep.exterior_sphere and not rep.outside_hypothesis
    assert all(abs(v) <= h * (1 + 1e-9) for v in rep.expansion_slack)
    assert rep.annulus_ok
    assert rep.monotone


def test_disc_annulus_and_fit():
    s = build_model_space({"model": "euclidean_grid", "dim": 2, "extent": [-0.6, 0.6], "h": 0.01})
    R = 0.3
    Om = Region(np.flatnonzero(np.hypot(s.coords[:, 0], s.coords[:, 1]) < R), "open")
    rep = av.steiner_experiment(s, Om, -1 / R, np.linspace(0.02, 0.1, 9))
    assert rep.outside_hypothesis
    assert rep.expansion_slack is None
    assert rep.minkowski_plus == pytest.approx(2 * math.pi * R, rel=0.05)
    assert rep.monotone
    d = rep.to_dict()
    assert "annulus_ok" in d and d["H"] == pytest.approx(-1 / R)
