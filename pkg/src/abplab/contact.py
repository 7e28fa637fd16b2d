"""Contact sets R2, R1, R1*, the transform u^d and c-concave representatives of -t u."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .mmspace import DiscreteMMSpace, Region
from .transport import c_transform

KINDS = ("r2", "r1", "r1star")


class ContactError(ValueError):
    pass


class RepresentativeError(ContactError):
    def __init__(self, message, worst):
        super().__init__(message)
        self.worst = worst


def normalize_kind(kind):
    k = str(kind).lower().replace("*", "star").replace("_", "")
    if k not in KINDS:
        raise ContactError(f"unknown contact kind {kind!r}; expected one of {KINDS}")
    return k


@dataclass(eq=False)
class ContactSetResult:
    kind: str
    members: np.ndarray  # sorted point ids
    witness: np.ndarray  # lowest-id vertex per member
    witnesses: list  # all vertices per member
    residuals: np.ndarray  # per-member equality defect
    t: float
    tol_eq: float
    tol_dist: float
    closure: np.ndarray = field(repr=False, default=None)
    r1_surjectivity: bool | None = None
    unmatched_vertices: list = field(default_factory=list)

    def region(self):
        return Region(self.members, "set")

    def to_dict(self):
        out = {
            "kind": self.kind,
            "t": self.t,
            "members": [int(i) for i in self.members],
            "witness": {str(int(x)): int(y) for x, y in zip(self.members, self.witness)},
            "witnesses": {str(int(x)): [int(y) for y in ys] for x, ys in zip(self.members, self.witnesses)},
            "residuals": [float(r) for r in self.residuals],
            "tol_eq": self.tol_eq,
            "tol_dist": self.tol_dist,
        }
        if self.r1_surjectivity is not None:
            out["r1_surjectivity"] = self.r1_surjectivity
            out["unmatched_vertices"] = [int(y) for y in self.unmatched_vertices]
        return out


def _osc(values):
    return float(values.max() - values.min()) if values.size else 0.0


def default_tolerances(space, closure, u, t, kind):
    """(tol_eq, tol_dist) defaults for a contact computation."""
    osc = _osc(np.asarray(u)[closure])
    diam = space.diameter
    if kind == "r2":
        tol_eq = 1e-9 * (1 + osc + diam**2 / (2 * t))
    else:
        tol_eq = 1e-9 * (1 + osc + diam)
    # half a cell: every continuum point sits within h/2 of a node
    tol_dist = 0.5 * space.h if space.h > 0 else 1e-12 * max(diam, 1.0)
    return tol_eq, tol_dist


def _check_field(space, u, closure):
    u = np.asarray(u, dtype=float)
    if u.shape != (space.n,):
        raise ContactError(f"u must have one value per point ({space.n})")
    if not np.all(np.isfinite(u[closure])):
        raise ContactError("u must be finite on the closure of Omega")
    return u


def compute_contact_set(space: DiscreteMMSpace, D: Region, Omega: Region, u, t=None, kind="r2",
                        tol_eq=None, tol_dist=None) -> ContactSetResult:
    """Points of the closure of Omega where u plus the touching function of some y in D is minimal.

    Touching functions: ``d_y^2/(2t)`` for r2, ``d_y`` for r1 and r1star; r1
    additionally keeps only pairs with ``|d(x, y) - t| <= tol_dist``.
    """
    kind = normalize_kind(kind)
    if len(D) == 0:
        raise ContactError("vertex set D is empty")
    if kind in ("r2", "r1"):
        if t is None or not t > 0:
            raise ContactError(f"{kind} needs an opening t > 0")
    t = float(t) if t is not None else 0.0
    closure = space.closure(Omega).indices
    u = _check_field(space, u, closure)
    d_tol_eq, d_tol_dist = default_tolerances(space, closure, u, t if t > 0 else 1.0, kind)
    tol_eq = d_tol_eq if tol_eq is None else float(tol_eq)
    tol_dist = d_tol_dist if tol_dist is None else float(tol_dist)
    Dv = D.indices
    nc = len(closure)
    hit = np.zeros(nc, dtype=bool)
    resid = np.full(nc, np.inf)
    wit_lists = [[] for _ in range(nc)]
    row_hit = np.zeros(len(Dv), dtype=bool)
    uc = u[closure]
    step = max(1, 2_000_000 // max(nc, 1))
    for s in range(0, len(Dv), step):
        Y = Dv[s : s + step]
        dist = space.dist(Y, closure)
        F = uc[None, :] + (dist * dist / (2 * t) if kind == "r2" else dist)
        mins, mask = kernels.row_argmin_band(F, tol_eq)
        if kind == "r1":
            mask &= np.abs(dist - t) <= tol_dist
        defect = F - mins[:, None]
        row_hit[s : s + step] = mask.any(axis=1)
        ii, jj = np.nonzero(mask)
        for i, j in zip(ii, jj):
            wit_lists[j].append(int(Y[i]))
        hit[jj] = True
        np.minimum.at(resid, jj, defect[ii, jj])
    sel = np.flatnonzero(hit)
    members = closure[sel]
    witnesses = [sorted(set(wit_lists[j])) for j in sel]
    res = ContactSetResult(
        kind=kind, members=members,
        witness=np.array([w[0] for w in witnesses], dtype=np.int64),
        witnesses=witnesses, residuals=resid[sel], t=t, tol_eq=tol_eq, tol_dist=tol_dist,
        closure=closure,
    )
    if kind == "r1":
        res.r1_surjectivity = bool(row_hit.all())
        res.unmatched_vertices = [int(y) for y in Dv[~row_hit]]
    return res


def u_d_transform(space, D: Region, Omega: Region, u):
    """``u^d(y) = min_{x in closure(Omega)} u(x) + d(x, y)`` for y in D (aligned with D)."""
    closure = space.closure(Omega).indices
    u = _check_field(space, u, closure)
    out = np.empty(len(D))
    Dv = D.indices
    step = max(1, 2_000_000 // max(len(closure), 1))
    for s in range(0, len(Dv), step):
        F = u[closure][None, :] + space.dist(Dv[s : s + step], closure)
        out[s : s + step] = F.min(axis=1)
    return out


def touching_values(space, D: Region, Omega: Region, u, t):
    """``v(y) = min_{z in closure(Omega)} u(z) + d^2(z, y)/(2t)`` on D."""
    closure = space.closure(Omega).indices
    u = _check_field(space, u, closure)
    # min_z d^2/2 - (-t u(z)) = t v(y)
    tv = c_transform(space, -t * u[closure], closure, D.indices)
    return tv / t


@dataclass(eq=False)
class Representative:
    phi: np.ndarray  # on the whole space
    v: np.ndarray  # on D
    contact: ContactSetResult
    max_residual: float  # max over members of |phi + t u|
    min_slack: float  # min over the closure of phi + t u
    tol: float

    def to_dict(self):
        return {"max_residual": self.max_residual, "min_slack": self.min_slack, "tol": self.tol}


def c_concave_representative(space, D: Region, Omega: Region, u, t, kind="r2", tol_eq=None,
                             tol_dist=None, contact=None, strict=True) -> Representative:
    """``phi = (t v)^c`` with ``v`` the touching values; equals -t u on the contact set.

    On r1 members the distance band costs up to ``tol_dist^2 / 2`` on top of
    ``t tol_eq``.
    """
    kind = normalize_kind(kind)
    if not t > 0:
        raise ContactError("representative needs t > 0")
    if contact is None:
        contact = compute_contact_set(space, D, Omega, u, t, kind, tol_eq, tol_dist)
    if len(contact.members) == 0:
        raise ContactError("contact set is empty")
    u = np.asarray(u, dtype=float)
    v = touching_values(space, D, Omega, u, t)
    phi = c_transform(space, t * v, D.indices, np.arange(space.n))
    gap = phi + t * u
    mem = contact.members
    tol = contact.tol_eq * t
    if kind == "r1":
        tol += 0.5 * contact.tol_dist**2
    elif kind == "r1star":
        # r1star members carry no opening; the check is advisory
        tol = np.inf
    worst_res = float(np.abs(gap[mem]).max())
    slack = gap[contact.closure]
    rep = Representative(phi=phi, v=v, contact=contact, max_residual=worst_res,
                         min_slack=float(slack.min()), tol=float(tol))
    if strict:
        if worst_res > tol:
            x = int(mem[np.argmax(np.abs(gap[mem]))])
            raise RepresentativeError(f"phi differs from -t u by {worst_res:.3g} at contact point {x}", x)
        if rep.min_slack < -contact.tol_eq * t:
            x = int(contact.closure[np.argmin(slack)])
            raise RepresentativeError(f"phi falls below -t u by {-rep.min_slack:.3g} at point {x}", x)
    return rep
