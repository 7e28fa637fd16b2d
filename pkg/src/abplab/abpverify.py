"""ABP estimate assembly, signed distance, Minkowski content and the Steiner experiment."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import discrete_laplacian, positive_part_sup_norm
from .contact import compute_contact_set, normalize_kind
from .distortion import abp_coefficient, exp_bound
from .mmspace import DiscreteMMSpace, Region, epsilon_neighborhood


class HypothesisError(ValueError):
    """A hypothesis of the estimate fails; ``hypothesis`` names it as in the reports."""

    def __init__(self, hypothesis, message):
        super().__init__(f"{hypothesis}: {message}")
        self.hypothesis = hypothesis


@dataclass
class AbpReport:
    kind: str
    K: float
    N: float
    t: float
    mass_D: float
    mass_R: float
    theta_sup: float
    phi_inf: float
    L: float
    coefficient: float
    bound: float
    satisfied: bool
    slack: float
    tol: float
    members: int
    boundary_mass: float
    deficiency: float = 0.0
    r1_surjectivity: bool | None = None
    exp_bound: float | None = None
    exp_satisfied: bool | None = None
    poly_le_exp: bool | None = None
    tolerances: dict = field(default_factory=dict)

    @property
    def ok(self):
        return bool(self.satisfied and self.exp_satisfied is not False and self.poly_le_exp is not False)

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["ok"] = self.ok
        return d


def verify_abp(space: DiscreteMMSpace, D: Region, Omega: Region, u, t, K, N, kind="r2", tol_eq=None,
               tol_dist=None, tol=None) -> AbpReport:
    """Check ``m(D) <= m(R) C(K, N, t, L, Theta, Phi)`` for the requested contact set.

    Raises :class:`HypothesisError` when the contact set leaves Omega or, for
    r1, when some vertex has no partner at distance t.
    """
    kind = normalize_kind(kind)
    if kind == "r1star":
        raise ValueError("the ABP estimate uses r1 or r2")
    if len(D) == 0:
        raise ValueError("vertex set D is empty")
    contact = compute_contact_set(space, D, Omega, u, t, kind, tol_eq, tol_dist)
    outside = np.setdiff1d(contact.members, Omega.indices)
    if len(outside):
        raise HypothesisError("contact_in_omega",
                              f"{len(outside)} contact points lie on the boundary, first {int(outside[0])}")
    if kind == "r1" and not contact.r1_surjectivity:
        raise HypothesisError("r1_surjectivity",
                              f"vertices without a partner at distance t: {contact.unmatched_vertices[:10]}")
    mass_D = float(space.mass[D.indices].sum())
    mass_R = float(space.mass[contact.members].sum())
    dist = space.dist(D.indices, Omega.indices)
    theta, phi = float(dist.max()), float(dist.min())
    L = positive_part_sup_norm(discrete_laplacian(space, u), Omega)
    coef = abp_coefficient(K, N, t, L, theta, phi)
    bound = mass_R * coef
    slack = bound - mass_D
    tol = 1e-12 * max(1.0, mass_D) if tol is None else float(tol)
    rep = AbpReport(
        kind=kind, K=K, N=N, t=t, mass_D=mass_D, mass_R=mass_R, theta_sup=theta, phi_inf=phi, L=L,
        coefficient=coef, bound=bound, satisfied=bool(slack >= -tol), slack=slack, tol=tol,
        members=len(contact.members), boundary_mass=float(space.mass[space.boundary(Omega).indices].sum()),
        deficiency=max(0.0, -slack), r1_surjectivity=contact.r1_surjectivity,
        tolerances={"tol_eq": contact.tol_eq, "tol_dist": contact.tol_dist, "tol": tol},
    )
    if len(contact.members) == 0 and mass_D > 0:
        rep.satisfied = False
        rep.deficiency = math.inf
    if K == 0:
        e = exp_bound(t, L)
        rep.exp_bound = mass_R * e
        rep.exp_satisfied = bool(rep.exp_bound - mass_D >= -tol)
        rep.poly_le_exp = bool(coef <= e * (1 + 1e-15))
    return rep


def signed_distance(space: DiscreteMMSpace, Omega: Region):
    """``d(x, closure Omega)`` outside Omega and ``-d(x, X minus Omega)`` inside.

    The discrete boundary band carries the value 0.
    """
    inside = Omega.mask(space.n)
    if inside.all() or not inside.any():
        raise ValueError("Omega and its complement must both be nonempty")
    u = space.dist_to_set(space.closure(Omega))
    u[inside] = -space.dist_to_set(np.flatnonzero(~inside), points=np.flatnonzero(inside))
    return u


def lipschitz_defect(space, u, pairs=None):
    """max over edges (or given pairs) of |u_i - u_j| - d(i, j)."""
    e = space.edges if pairs is None else np.asarray(pairs)
    d = _pair_dist(space, e[:, 0], e[:, 1])
    return float(np.max(np.abs(u[e[:, 0]] - u[e[:, 1]]) - d)) if len(e) else 0.0


def _pair_dist(space, I, J):
    from .mmspace import _coord_dist_pairs

    if space.metric == "matrix":
        return space.dist_matrix[I, J]
    return _coord_dist_pairs(space.metric, space.coords[I], space.coords[J])


@dataclass
class MinkowskiFit:
    value: float
    eps: list
    excess: list  # m(Omega^eps) - m(Omega)
    ratios: list
    coefficients: list  # constant, linear, quadratic

    def to_dict(self):
        return {"minkowski_plus": self.value, "eps": self.eps, "excess": self.excess, "ratios": self.ratios,
                "fit": self.coefficients}


def _neighborhood_masses(space, Omega, eps):
    d = space.dist_to_set(Omega)
    slack = 1e-12 * max(space.diameter, max(eps))
    inside = Omega.mask(space.n)
    out = []
    for e in eps:
        sel = inside | (d < e - slack)
        out.append(float(space.mass[sel].sum()))
    return out


def minkowski_content(space, Omega: Region, eps_list) -> MinkowskiFit:
    """Boundary measure from the excess mass of eps-neighbourhoods.

    ``m(Omega^eps) - m(Omega)`` is fitted by ``a + b eps + c eps^2`` and the
    linear coefficient b is returned.
    """
    eps = np.sort(np.asarray(eps_list, dtype=float))
    if len(eps) < 3:
        raise ValueError("need at least three eps values for the fit")
    if eps[0] <= space.h:
        raise ValueError(f"eps {eps[0]} is not above the mesh size {space.h}")
    m0 = float(space.mass[Omega.indices].sum())
    excess = np.array(_neighborhood_masses(space, Omega, eps)) - m0
    A = np.stack([np.ones_like(eps), eps, eps**2], axis=1)
    coef, *_ = np.linalg.lstsq(A, excess, rcond=None)
    value = float(coef[1]) if np.any(excess) else 0.0
    return MinkowskiFit(value, eps.tolist(), excess.tolist(), (excess / eps).tolist(),
                        [float(c) if np.any(excess) else 0.0 for c in coef])


def exterior_sphere_check(space, Omega: Region, r, tol=None):
    """Every boundary node has a node centre at distance ~r whose r-ball misses Omega.

    Centres are searched among existing nodes with both distances taken up to
    ``tol`` (default h).
    """
    tol = space.h if tol is None else tol
    bnd = space.boundary(Omega).indices
    dO = space.dist_to_set(Omega)
    cand = np.flatnonzero(dO >= r - tol)
    if len(bnd) == 0:
        return True, []
    if len(cand) == 0:
        return False, bnd.tolist()
    bad = []
    step = max(1, 2_000_000 // len(cand))
    for s in range(0, len(bnd), step):
        B = bnd[s : s + step]
        ok = (np.abs(space.dist(B, cand) - r) <= tol).any(axis=1)
        bad.extend(int(b) for b in B[~ok])
    return not bad, bad


@dataclass
class SteinerReport:
    eps: list
    mass_omega: float
    masses: list  # m(Omega_eps)
    minkowski_plus: float
    H: float
    N: float
    annulus_lhs: list
    annulus_rhs: list
    annulus_slack: list
    expansion_rhs: list | None
    expansion_slack: list | None
    remainder_coef: float
    remainder_coef_top: float
    remainder_stable: bool
    exterior_sphere: bool
    exterior_radius: float
    band_max_laplacian: float
    band_threshold: float
    band_ok: bool
    monotone: bool
    outside_hypothesis: bool
    notes: list = field(default_factory=list)
    fit: dict = field(default_factory=dict)

    @property
    def annulus_ok(self):
        return all(s >= -self.tolerance for s in self.annulus_slack)

    tolerance: float = 0.0

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["annulus_ok"] = self.annulus_ok
        return d


def _fit_quadratic(eps, excess):
    A = np.stack([np.ones_like(eps), eps, eps**2], axis=1)
    return np.linalg.lstsq(A, excess, rcond=None)[0]


def steiner_experiment(space, Omega: Region, H, eps_list, N=2.0, sigma_band=None, r_exterior=None,
                       tol_band=None, m_plus=None, tol=None) -> SteinerReport:
    """Neighbourhood growth of Omega against the mean-convexity prediction.

    Checks the annulus inequality
    ``m(Omega_2e - Omega_e) <= m(Omega_e - Omega) (1 - e H/(N-1))^(N-1)`` for
    every eps and, when the band diagnostic passes, the expansion
    ``m(Omega_e) <= m(Omega) + (e - H e^2/2) m+``.  Both are judged against
    ``tol``, by default ``2 m+ h`` (one lattice cell on each boundary piece).
    """
    eps = np.sort(np.asarray(eps_list, dtype=float))
    if not N > 1:
        raise ValueError("N must exceed 1")
    h = space.h
    notes = []
    m0 = float(space.mass[Omega.indices].sum())
    grid = np.concatenate([eps, 2 * eps])
    masses_all = np.array(_neighborhood_masses(space, Omega, grid))
    me, m2e = masses_all[: len(eps)], masses_all[len(eps) :]
    fit = minkowski_content(space, Omega, eps)
    mp = fit.value if m_plus is None else float(m_plus)
    tol = 2 * abs(mp) * h if tol is None else float(tol)
    lhs = m2e - me
    base = 1 - eps * H / (N - 1)
    rhs = (me - m0) * np.where(base > 0, base, 0.0) ** (N - 1)
    slack = rhs - lhs

    # diagnostics
    r = 2 * eps.max() + h if r_exterior is None else float(r_exterior)
    ext_ok, _ = exterior_sphere_check(space, Omega, r)
    sigma_band = eps.max() if sigma_band is None else float(sigma_band)
    u = signed_distance(space, Omega)
    lap = discrete_laplacian(space, u)
    band = epsilon_neighborhood(space, Omega, sigma_band).difference(space.closure(Omega)).indices
    band = band[space.interior[band]]
    tol_band = h if tol_band is None else float(tol_band)
    band_max = float(lap.values[band].max()) if len(band) else -math.inf
    band_ok = bool(band_max <= -H + tol_band)
    outside = H < 0
    if outside:
        notes.append("H < 0 is outside the estimate's hypothesis; testing the intermediate inequality only")
    if not ext_ok:
        notes.append(f"exterior sphere condition fails at radius {r}")
    if not band_ok:
        notes.append("mean-convexity band diagnostic fails; expansion skipped")

    exp_rhs = exp_slack = None
    if band_ok and ext_ok and not outside:
        exp_rhs = (m0 + (eps - 0.5 * H * eps**2) * mp).tolist()
        exp_slack = (np.array(exp_rhs) - me).tolist()
    c_full = float(_fit_quadratic(eps, me - m0)[2])
    top = eps[len(eps) // 2 :]
    c_top = float(_fit_quadratic(top, (me - m0)[len(eps) // 2 :])[2]) if len(top) >= 3 else c_full
    stable = bool(abs(c_top - c_full) <= 0.2 * max(abs(c_full), 1e-300))
    return SteinerReport(
        eps=eps.tolist(), mass_omega=m0, masses=me.tolist(), minkowski_plus=mp, H=float(H), N=float(N),
        annulus_lhs=lhs.tolist(), annulus_rhs=rhs.tolist(), annulus_slack=slack.tolist(),
        expansion_rhs=exp_rhs, expansion_slack=exp_slack, remainder_coef=c_full, remainder_coef_top=c_top,
        remainder_stable=stable, exterior_sphere=bool(ext_ok), exterior_radius=r,
        band_max_laplacian=band_max, band_threshold=-H + tol_band, band_ok=band_ok,
        monotone=bool(np.all(np.diff(np.concatenate([[m0], me])) >= 0)), outside_hypothesis=outside,
        notes=notes, fit=fit.to_dict(), tolerance=tol,
    )
