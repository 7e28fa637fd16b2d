"""Entropy functionals and the displacement-convexity checks built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distortion import c_kappa, s_over_x, sigma, tau
from .mmspace import Region
from .transport import (ProbMeasure, TransportError, displacement_interpolate, half_sq_dist,
                        optimal_vertices, solve_w2)

DEFAULT_SAMPLES = (0.0, 0.25, 0.5, 0.75, 1.0)


class EntropyError(ValueError):
    pass


@dataclass(frozen=True)
class EntropyValues:
    renyi: float
    relative: float
    u_n: float

    def to_dict(self):
        return {"renyi": self.renyi, "relative": self.relative, "u_n": self.u_n}


def renyi_entropy(mu: ProbMeasure, N: float) -> float:
    """``sum rho^(1 - 1/N) m`` over the support."""
    if not N > 1:
        raise EntropyError("N must exceed 1")
    s = mu.support
    rho = mu.weights[s] / mu.space.mass[s]
    return float(np.sum(rho ** (1 - 1 / N) * mu.space.mass[s]))


def relative_entropy(mu: ProbMeasure) -> float:
    s = mu.support
    rho = mu.weights[s] / mu.space.mass[s]
    return float(np.sum(mu.weights[s] * np.log(rho)))


def entropy_and_un(mu: ProbMeasure, N: float) -> EntropyValues:
    ent = relative_entropy(mu)
    return EntropyValues(renyi=renyi_entropy(mu, N), relative=ent, u_n=math.exp(-ent / N))


def default_tol_disc(mu0, mu1):
    """``5 sqrt(h) osc(rho)`` with the larger density oscillation of the two measures."""
    h = mu0.space.h
    osc = max(float(m.density.max() - m.density.min()) for m in (mu0, mu1))
    return 5 * math.sqrt(h) * osc


@dataclass
class InequalityReport:
    check: str
    ok: bool
    samples: list
    lhs: list
    rhs: list
    slack: list
    tol: float
    w2: float
    h: float
    infinite: list = field(default_factory=list)  # sample indices with an infinite coefficient
    extra: dict = field(default_factory=dict)

    @property
    def min_slack(self):
        finite = [s for s in self.slack if not math.isinf(s)]
        return min(finite) if finite else math.inf

    @property
    def deficiency(self):
        return max(0.0, -self.min_slack)

    def to_dict(self):
        out = {
            "check": self.check,
            "ok": self.ok,
            "samples": self.samples,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "min_slack": self.min_slack,
            "deficiency": self.deficiency,
            "tol": self.tol,
            "w2": self.w2,
            "h": self.h,
            "infinite": self.infinite,
        }
        out.update(self.extra)
        return out


def _push(space, src, dst, flow, t):
    if t == 0.0:
        z = src
    elif t == 1.0:
        z = dst
    else:
        z = space.geodesic_points(src, dst, t)
    w = np.bincount(z, weights=flow, minlength=space.n)
    return ProbMeasure(space, w / w.sum())


def check_kn_convexity(mu0, mu1, K, N, samples=DEFAULT_SAMPLES, tol_disc=None) -> InequalityReport:
    """``U_N(mu_t) >= sigma^(1-t) U_N(mu_0) + sigma^(t) U_N(mu_1)`` along the interpolation.

    The coefficients are ``sigma_{K,N}`` at the W2 distance.
    """
    sol = solve_w2(mu0, mu1)
    W = sol.cost
    tol = default_tol_disc(mu0, mu1) if tol_disc is None else float(tol_disc)
    u0 = entropy_and_un(mu0, N).u_n
    u1 = entropy_and_un(mu1, N).u_n
    lhs, rhs, slack, inf = [], [], [], []
    for k, t in enumerate(samples):
        mut = displacement_interpolate(sol, t)
        ut = entropy_and_un(mut, N).u_n
        a, b = sigma(K, N, 1 - t, W), sigma(K, N, t, W)
        r = (a * u0 if a else 0.0) + (b * u1 if b else 0.0)
        lhs.append(ut)
        rhs.append(r)
        if math.isinf(r):
            inf.append(k)
            slack.append(math.inf)
        else:
            slack.append(ut - r)
    ok = all(s >= -tol for s in slack)
    return InequalityReport("kn_convexity", ok, list(samples), lhs, rhs, slack, tol, W, mu0.space.h, inf,
                            {"K": K, "N": N})


def _cd_rhs(space, src, dst, flow, rho0, rho1, K, Np, t):
    d = space.dist(src, dst)[np.arange(len(src)), np.arange(len(src))] if len(src) else np.zeros(0)
    total = 0.0
    for x, y, f, dd in zip(src, dst, flow, d):
        a = tau(K, Np, 1 - t, float(dd))
        b = tau(K, Np, t, float(dd))
        if math.isinf(a) or math.isinf(b):
            return math.inf
        total += f * (a * rho0[x] ** (-1 / Np) + b * rho1[y] ** (-1 / Np))
    return total


def _cd_run(space, src, dst, flow, mu0, mu1, K, Np, samples):
    rho0, rho1 = mu0.density, mu1.density
    lhs, rhs, slack, inf = [], [], [], []
    for k, t in enumerate(samples):
        mut = _push(space, src, dst, flow, t)
        e = renyi_entropy(mut, Np)
        r = _cd_rhs(space, src, dst, flow, rho0, rho1, K, Np, t)
        lhs.append(e)
        rhs.append(r)
        if math.isinf(r):
            inf.append(k)
            slack.append(math.inf)
        else:
            slack.append(e - r)
    return lhs, rhs, slack, inf


def check_cd_inequality(mu0, mu1, K, N_prime, samples=DEFAULT_SAMPLES, tol_disc=None,
                        enumerate_limit=8) -> InequalityReport:
    """Renyi-entropy CD(K, N') inequality along the solver's optimal plan.

    On failure, instances with at most ``enumerate_limit`` support points per
    side are retried over every optimal vertex; the best plan is reported.
    """
    space = mu0.space
    sol = solve_w2(mu0, mu1)
    tol = default_tol_disc(mu0, mu1) if tol_disc is None else float(tol_disc)
    lhs, rhs, slack, inf = _cd_run(space, sol.src, sol.dst, sol.flow, mu0, mu1, K, N_prime, samples)
    ok = all(s >= -tol for s in slack)
    extra = {"K": K, "N_prime": N_prime, "plan": "solver"}
    S, T = sol.rows, sol.cols
    if not ok and len(S) <= enumerate_limit and len(T) <= enumerate_limit:
        C = half_sq_dist(space, S, T)
        best = None
        for P in optimal_vertices(mu0.weights[S], mu1.weights[T], C):
            ii, jj = np.nonzero(P > 0)
            run = _cd_run(space, S[ii], T[jj], P[ii, jj], mu0, mu1, K, N_prime, samples)
            worst = min(run[2])
            if best is None or worst > best[0]:
                best = (worst, run)
        if best is not None and best[0] > min(slack):
            lhs, rhs, slack, inf = best[1]
            ok = all(s >= -tol for s in slack)
            extra["plan"] = "enumerated"
    return InequalityReport("cd", ok, list(samples), lhs, rhs, slack, tol, sol.cost, space.h, inf, extra)


def laplacian_integral(space, rho, phi, Omega: Region) -> float:
    """``sum rho_i (L phi)_i m_i`` over interior nodes of Omega."""
    from .calculus import discrete_laplacian

    lap = discrete_laplacian(space, phi).values
    idx = Omega.indices[space.interior[Omega.indices]]
    return float(np.sum(rho[idx] * lap[idx] * space.mass[idx]))


def check_functional_abp(mu0, mu1, K, N, Omega: Region, tol_disc=None) -> InequalityReport:
    """``U_N(mu_1) <= (c(W) - s(W)/(N W) int rho dL phi) U_N(mu_0)`` with kappa = K/N.

    ``phi`` is the c-concave Kantorovich potential from mu_0 to mu_1.
    """
    space = mu0.space
    if not np.isin(mu0.support, Omega.indices).all():
        raise EntropyError("mu0 must be supported in Omega")
    sol = solve_w2(mu0, mu1)
    W = sol.cost
    tol = default_tol_disc(mu0, mu1) if tol_disc is None else float(tol_disc)
    integral = laplacian_integral(space, mu0.density, sol.potential, Omega)
    kappa = K / N
    coef = c_kappa(kappa, W) - s_over_x(kappa, W) * integral / N
    u0 = entropy_and_un(mu0, N).u_n
    u1 = entropy_and_un(mu1, N).u_n
    bound = coef * u0
    return InequalityReport(
        "functional_abp", bool(bound - u1 >= -tol), [1.0], [u1], [bound], [bound - u1], tol, W, space.h, [],
        {"K": K, "N": N, "laplacian_integral": integral, "coefficient": coef, "u_n_source": u0},
    )


__all__ = [
    "EntropyValues", "InequalityReport", "renyi_entropy", "relative_entropy", "entropy_and_un",
    "check_kn_convexity", "check_cd_inequality", "check_functional_abp", "laplacian_integral",
    "default_tol_disc", "TransportError",
]
