"""Graph Dirichlet form, weighted Laplacian and the Laplacian comparison on contact sets."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .contact import c_concave_representative, normalize_kind
from .mmspace import DiscreteMMSpace, Region


class CalculusError(ValueError):
    pass


@dataclass(eq=False)
class DiscreteLaplacian:
    space: DiscreteMMSpace
    values: np.ndarray
    interior: np.ndarray  # bool mask, complete stencil

    def masked(self):
        """Values with NaN outside the interior mask."""
        return np.where(self.interior, self.values, np.nan)


def _edges(space):
    if len(space.edges) == 0:
        raise CalculusError("space has no edges")
    return space.edges[:, 0], space.edges[:, 1], space.weights


def dirichlet_energy(space: DiscreteMMSpace, f, u) -> float:
    """``E(f, u) = sum over undirected edges w_ij (f_i - f_j)(u_i - u_j)``.

    This is half the sum over ordered pairs, so E(u, u) is the usual
    discrete energy and ``sum f Lu m = -E(f, u)``.
    """
    src, dst, w = _edges(space)
    f = np.asarray(f, dtype=float)
    u = np.asarray(u, dtype=float)
    return float(np.sum(w * (f[src] - f[dst]) * (u[src] - u[dst])))


def discrete_laplacian(space: DiscreteMMSpace, u) -> DiscreteLaplacian:
    """``(Lu)_i = (1/m_i) sum_j w_ij (u_j - u_i)``."""
    src, dst, w = _edges(space)
    vals = kernels.graph_laplacian(np.asarray(u, dtype=float), src, dst, w, space.mass)
    return DiscreteLaplacian(space, vals, np.asarray(space.interior))


def positive_part_sup_norm(lap: DiscreteLaplacian, Omega: Region) -> float:
    """Max of ``max(Lu, 0)`` over the closure of Omega restricted to the interior mask."""
    if not np.all(lap.interior[Omega.indices]):
        warnings.warn("Omega contains nodes without a complete stencil; they are skipped", stacklevel=2)
    cl = lap.space.closure(Omega).indices
    cl = cl[lap.interior[cl]]
    if len(cl) == 0:
        return 0.0
    return float(max(lap.values[cl].max(), 0.0))


@dataclass
class ComparisonReport:
    ok: bool
    min_scaled: float  # min over members of L phi + t L u
    min_literal: float  # min over members of L phi + L u
    tol: float
    members: int
    worst_point: int

    def to_dict(self):
        return {
            "ok": self.ok,
            "min_scaled": self.min_scaled,
            "min_literal": self.min_literal,
            "tol": self.tol,
            "members": self.members,
            "worst_point": self.worst_point,
        }


def laplacian_comparison_check(space, D: Region, Omega: Region, u, t, kind="r2", tol=None, C=1.0,
                               tol_eq=None, tol_dist=None) -> ComparisonReport:
    """Compare the Laplacian of the c-concave representative with that of u on contact points.

    Since phi >= -t u on the closure with equality on members, the stencil
    gives ``L phi + t L u >= 0`` there.  The check passes when that minimum is
    at least ``-tol`` (default ``C h``).  ``min_literal`` reports
    ``L phi + L u``, which agrees with the scaled form at t = 1 and dominates
    it wherever ``L u >= 0`` and t <= 1.
    """
    kind = normalize_kind(kind)
    rep = c_concave_representative(space, D, Omega, u, t, kind, tol_eq, tol_dist)
    mem = rep.contact.members
    off = mem[~space.interior[mem]]
    if len(off):
        raise CalculusError(f"contact points {off[:10].tolist()} lie outside the interior mask")
    lphi = discrete_laplacian(space, rep.phi).values[mem]
    lu = discrete_laplacian(space, u).values[mem]
    scaled = lphi + t * lu
    literal = lphi + lu
    tol = C * space.h if tol is None else float(tol)
    k = int(np.argmin(scaled))
    return ComparisonReport(
        ok=bool(scaled[k] >= -tol), min_scaled=float(scaled[k]), min_literal=float(literal.min()),
        tol=tol, members=len(mem), worst_point=int(mem[k]),
    )
