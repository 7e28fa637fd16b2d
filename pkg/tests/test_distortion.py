import math

import pytest

from abplab import distortion as dc


def test_reference_values():
    assert dc.s_kappa(-1, 1) == pytest.approx(1.1752011936438015, rel=1e-15)
    assert dc.c_kappa(-1, 1) == pytest.approx(1.5430806348152438, rel=1e-15)
    assert dc.s_kappa(1, math.pi / 2) == pytest.approx(1.0, rel=1e-15)
    assert dc.abp_coefficient(-1, 2, 1, 1, 1, 0) == pytest.approx(3.2519365394650188, rel=1e-14)
    assert dc.sigma(1, 1, 0.5, math.pi / 2) == pytest.approx(math.sqrt(0.5), rel=1e-14)


@pytest.mark.parametrize("kappa", [-3.0, -1e-11, 0.0, 1e-11, 2.0])
def test_taylor_branch_is_continuous(kappa):
    theta = 1e-3
    for fn in (dc.s_kappa, dc.c_kappa):
        assert math.isfinite(fn(kappa, theta))
    assert dc.s_kappa(kappa, 1e-6) == pytest.approx(1e-6, rel=1e-11)


def test_domain_errors():
    with pytest.raises(dc.DomainError):
        dc.s_kappa(1, math.pi)
    with pytest.raises(dc.DomainError):
        dc.c_kappa(1, -0.1)
    with pytest.raises(ValueError):
        dc.sigma(0, 0, 0.5, 1)
    with pytest.raises(ValueError):
        dc.tau(0, 1, 0.5, 1)
    with pytest.raises(ValueError):
        dc.abp_coefficient(0, 2, 1, -1, 0, 0)
    with pytest.raises(dc.DomainError):
        dc.abp_coefficient(2, 2, 0, 0, 3, 3)


def test_sigma_limits():
    assert dc.sigma(5, 2, 0.3, 0) == 0.3
    assert math.isinf(dc.sigma(1, 1, 0.5, math.pi))
    assert dc.sigma(-2, 3, 0, 1.2) == 0.0
    assert dc.sigma(-2, 3, 1, 1.2) == 1.0
    # negative curvature lowers sigma below t, positive raises it
    assert dc.sigma(-2, 3, 0.5, 1.2) < 0.5 < dc.sigma(2, 3, 0.5, 1.2)


def test_tau_limits():
    assert dc.tau(-1, 3, 0, 1) == 0.0
    assert dc.tau(0, 3, 0.4, 1) == 0.4
    assert dc.tau(2, 3, 0.4, 0) == 0.4
    assert dc.tau(1, 3, 1, 0.7) == pytest.approx(1.0)


def test_abp_coefficient_k0_and_exp():
    assert dc.abp_coefficient(0, 2, 0.1, 10, 0.5, 0.1) == pytest.approx(2.25)
    assert dc.abp_coefficient(0, 2, 0.1, 10, 0.5, 0.1) <= dc.exp_bound(0.1, 10)
    # zero radius falls back to s(r)/r = 1
    assert dc.abp_coefficient(-1, 2, 0.5, 2, 0, 0) == pytest.approx(1.5**2)
