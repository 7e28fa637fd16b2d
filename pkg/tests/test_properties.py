import os
import subprocess
import sys

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from abplab import distortion as dc
from abplab import transport as tr
from abplab.calculus import dirichlet_energy, discrete_laplacian
from abplab.contact import compute_contact_set, u_d_transform
from abplab.mmspace import Region, build_model_space

SPACE = build_model_space({"model": "interval", "a": 0, "b": 1, "n": 31})
weights = st.lists(st.floats(0.0, 1.0), min_size=31, max_size=31).filter(lambda w: sum(w) > 1e-3)


@settings(max_examples=40, deadline=None)
@given(weights, weights)
def test_w2_is_certified_and_symmetric(a, b):
    a, b = np.array(a), np.array(b)
    mu, nu = tr.ProbMeasure(SPACE, a / a.sum()), tr.ProbMeasure(SPACE, b / b.sum())
    s1 = tr.solve_w2(mu, nu)
    s2 = tr.solve_w2(nu, mu)
    assert tr.certify(s1).ok
    assert abs(s1.cost - s2.cost) <= 1e-12
    assert s1.duality_gap <= 1e-12


@settings(max_examples=40, deadline=None)
@given(weights, weights, weights)
def test_w2_triangle_inequality(a, b, c):
    ms = [tr.ProbMeasure(SPACE, np.array(w) / sum(w)) for w in (a, b, c)]
    ab = tr.solve_w2(ms[0], ms[1]).cost
    bc = tr.solve_w2(ms[1], ms[2]).cost
    ac = tr.solve_w2(ms[0], ms[2]).cost
    assert ac <= ab + bc + 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(-5, 5), st.floats(1.01, 10), st.floats(0, 1), st.floats(0, 3))
def test_sigma_bounds(K, N, t, theta):
    s = dc.sigma(K, N, t, theta)
    if np.isinf(s):
        assert K * theta**2 >= N * np.pi**2
        return
    # sigma is monotone in K
    if K >= 0:
        assert s >= t - 1e-12
    else:
        assert 0 <= s <= t + 1e-12
    tau = dc.tau(K, N, t, theta)
    if not np.isinf(tau):
        assert tau >= 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(0, 50), st.floats(1.01, 20))
def test_poly_below_exp(t, L, N):
    assert dc.abp_coefficient(0, N, t, L, 1, 0) <= dc.exp_bound(t, L) * (1 + 1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=31, max_size=31), st.lists(st.floats(-1, 1), min_size=31, max_size=31))
def test_dirichlet_identity(u, f):
    u, f = np.array(u), np.array(f)
    f[~SPACE.interior] = 0
    lap = discrete_laplacian(SPACE, u).values
    assert abs(np.sum(f * lap * SPACE.mass) + dirichlet_energy(SPACE, f, u)) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=31, max_size=31),
       st.lists(st.integers(0, 30), min_size=1, max_size=5, unique=True))
def test_u_d_is_one_lipschitz_and_r1_inside_r1star(u, D):
    u = np.array(u)
    Om = Region(np.arange(5, 26), "open")
    Dr = Region(D, "vertex")
    ud = u_d_transform(SPACE, Dr, Om, u)
    Dd = SPACE.dist(Dr.indices, Dr.indices)
    assert np.all(np.abs(ud[:, None] - ud[None, :]) <= Dd + 1e-12)
    star = set(compute_contact_set(SPACE, Dr, Om, u, kind="r1star").members.tolist())
    for t in (0.1, 0.3):
        r1 = set(compute_contact_set(SPACE, Dr, Om, u, t, "r1").members.tolist())
        assert r1 <= star


def test_numpy_fallback_matches(tmp_path):
    """The pure-numpy path gives the same report as the compiled path."""
    outs = []
    for flag in ("0", "1"):
        out = tmp_path / f"r{flag}.json"
        env = dict(os.environ, ABPLAB_DISABLE_NUMBA=flag)
        code = (
            "import abplab._accel as a, sys\n"
            "from abplab.cli import main\n"
            f"assert a.USE_NUMBA == ({flag!r} == '0' and a.HAS_NUMBA)\n"
            f"sys.exit(main(['run', 'interval-blocks-cd', '--out', {str(out)!r}]))\n"
        )
        r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, timeout=300)
        assert r.returncode == 0, r.stderr
        outs.append(out.read_text())
    assert outs[0] == outs[1]
