"""Exact quadratic optimal transport on a finite space.

The linear program is solved with cost ``d^2/2``; reported costs are W2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import kernels
from .mmspace import DiscreteMMSpace, Region

MAX_SUPPORT = 5000


class TransportError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProbMeasure:
    """Probability weights aligned with the points of ``space``."""

    space: DiscreteMMSpace
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        if w.shape != (self.space.n,):
            raise TransportError(f"weights must have length {self.space.n}, got {w.shape}")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise TransportError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise TransportError(f"weights sum to {w.sum()!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_density(cls, space, rho):
        w = np.asarray(rho, dtype=float) * space.mass
        return cls(space, w / w.sum())

    @classmethod
    def uniform_on(cls, space, indices):
        """Normalized restriction of the reference measure to ``indices``."""
        idx = np.asarray(indices.indices if isinstance(indices, Region) else indices, dtype=np.int64)
        w = np.zeros(space.n)
        w[idx] = space.mass[idx]
        return cls(space, w / w.sum())

    @classmethod
    def dirac(cls, space, i):
        w = np.zeros(space.n)
        w[int(i)] = 1.0
        return cls(space, w)

    @property
    def density(self):
        return self.weights / self.space.mass

    @cached_property
    def support(self):
        return np.flatnonzero(self.weights > 0)


@dataclass(frozen=True, eq=False)
class TransportSolution:
    """Optimal plan as sparse triplets plus the Kantorovich pair.

    ``phi`` lives on ``source.support`` and ``phi_c`` on ``target.support``;
    ``potential`` and ``c_potential`` are their c-concave extensions to the
    whole space.
    """

    source: ProbMeasure
    target: ProbMeasure
    src: np.ndarray
    dst: np.ndarray
    flow: np.ndarray
    cost: float
    phi: np.ndarray
    phi_c: np.ndarray
    status: int = 0
    iterations: int = 0
    duality_gap: float = 0.0

    @property
    def space(self):
        return self.source.space

    @property
    def rows(self):
        return self.source.support

    @property
    def cols(self):
        return self.target.support

    def plan(self):
        """Dense plan over ``rows x cols``."""
        P = np.zeros((len(self.rows), len(self.cols)))
        ri = np.searchsorted(self.rows, self.src)
        ci = np.searchsorted(self.cols, self.dst)
        np.add.at(P, (ri, ci), self.flow)
        return P

    @cached_property
    def c_potential(self):
        """phi^c on the whole space (c-transform of phi over the source support)."""
        return c_transform(self.space, self.phi, self.rows, np.arange(self.space.n))

    @cached_property
    def potential(self):
        """phi on the whole space (c-transform of phi^c over the target support)."""
        return c_transform(self.space, self.phi_c, self.cols, np.arange(self.space.n))

    @cached_property
    def superdiff(self):
        return c_superdifferential(self.space, self.phi, self.phi_c, self.rows, self.cols,
                                   tol=default_tol(self.space))

    def to_dict(self):
        return {
            "w2": self.cost,
            "status": self.status,
            "iterations": self.iterations,
            "duality_gap": self.duality_gap,
            "plan": [[int(i), int(j), float(f)] for i, j, f in zip(self.src, self.dst, self.flow)],
            "phi": {str(int(i)): float(v) for i, v in zip(self.rows, self.phi)},
            "phi_c": {str(int(j)): float(v) for j, v in zip(self.cols, self.phi_c)},
        }


def default_tol(space):
    """Equality tolerance for potentials, 1e-9 diam^2."""
    return 1e-9 * max(space.diameter, 1.0) ** 2


def _idx(A):
    return np.asarray(A.indices if isinstance(A, Region) else A, dtype=np.int64)


def half_sq_dist(space, A, B):
    D = space.dist(_idx(A), _idx(B))
    return 0.5 * D * D


def solve_w2(mu: ProbMeasure, nu: ProbMeasure, max_iter=None) -> TransportSolution:
    """Exact W2 between two measures on the same space."""
    if mu.space is not nu.space:
        raise TransportError("measures live on different spaces")
    space = mu.space
    S, T = mu.support, nu.support
    if len(S) + len(T) > MAX_SUPPORT:
        raise TransportError(
            f"combined support {len(S) + len(T)} exceeds {MAX_SUPPORT}; subsample or coarsen the measures"
        )
    a = mu.weights[S].copy()
    b = nu.weights[T].copy()
    if abs(a.sum() - b.sum()) > 1e-12:
        raise TransportError("marginals have different total mass")
    b *= a.sum() / b.sum()
    C = half_sq_dist(space, S, T)
    scale = max(float(C.max()), 1e-300)
    if max_iter is None:
        max_iter = 50 * (len(S) + len(T)) ** 2 + 1000
    bi, bj, flow, u, v, status, it = kernels.transport_simplex(a, b, C, 1e-13 * scale, max_iter)
    if status != 0:
        raise TransportError(f"simplex did not converge (status {status} after {it} pivots)")
    flow = np.maximum(flow, 0.0)
    keep = flow > 0
    src, dst, f = S[bi[keep]], T[bj[keep]], flow[keep]
    order = np.lexsort((dst, src))
    src, dst, f = src[order], dst[order], f[order]
    # dual pair made c-concave: phi^c = (u)^c on T, then phi = (phi^c)^c on S
    phi_c = kernels.min_plus(C, u)[0]
    phi = kernels.min_plus(np.ascontiguousarray(C.T), phi_c)[0]
    shift = phi[0]
    phi = phi - shift
    phi_c = phi_c + shift
    lp = float(np.dot(f, C[bi[keep][order], bj[keep][order]]))
    dual = float(phi @ a + phi_c @ b)
    return TransportSolution(
        source=mu, target=nu, src=src, dst=dst, flow=f, cost=float(np.sqrt(max(2 * lp, 0.0))),
        phi=phi, phi_c=phi_c, status=int(status), iterations=int(it), duality_gap=abs(lp - dual),
    )


def c_transform(space, phi, A, B, return_witness=False):
    """``y -> min_{x in A} d^2(x, y)/2 - phi(x)`` for y in B; ``phi`` is aligned with A.

    Witnesses are the lowest-id minimizers.
    """
    A, B = _idx(A), _idx(B)
    phi = np.asarray(phi, dtype=float)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("c_transform needs nonempty A and B")
    if phi.shape != (len(A),):
        raise ValueError("phi must be aligned with A")
    out = np.empty(len(B))
    arg = np.empty(len(B), dtype=np.int64)
    step = max(1, 2_000_000 // len(A))
    for s in range(0, len(B), step):
        C = half_sq_dist(space, A, B[s : s + step])
        out[s : s + step], arg[s : s + step] = kernels.min_plus(C, phi)
    if return_witness:
        return out, A[arg]
    return out


def c_superdifferential(space, phi, phi_c, A, B, tol=None, check=True):
    """Pairs (x, y) in A x B with |phi(x) + phi^c(y) - d^2(x,y)/2| <= tol."""
    A, B = _idx(A), _idx(B)
    tol = default_tol(space) if tol is None else tol
    phi = np.asarray(phi, dtype=float)
    phi_c = np.asarray(phi_c, dtype=float)
    if check:
        ref = c_transform(space, phi, A, B)
        bad = np.abs(ref - phi_c) > tol
        if bad.any():
            k = int(np.argmax(np.abs(ref - phi_c)))
            raise TransportError(f"phi_c is not the c-transform of phi (point {int(B[k])}, "
                                 f"defect {abs(ref[k] - phi_c[k]):.3g})")
    R = half_sq_dist(space, A, B) - phi[:, None] - phi_c[None, :]
    ii, jj = np.nonzero(np.abs(R) <= tol)
    return np.stack([A[ii], B[jj]], axis=1)


@dataclass
class Certificate:
    ok: bool
    violations: list = field(default_factory=list)
    max_defect: float = 0.0
    tol: float = 0.0

    def to_dict(self):
        return {"ok": self.ok, "violations": self.violations, "max_defect": self.max_defect,
                "tol": self.tol}


def verify_optimality(space, plan, phi, phi_c, A, B, tol=None) -> Certificate:
    """Optimality certificate: the support of ``plan`` must sit inside the superdifferential.

    ``plan`` is dense over A x B; the duals are aligned with A and B.
    """
    A, B = _idx(A), _idx(B)
    tol = default_tol(space) if tol is None else tol
    plan = np.asarray(plan, dtype=float)
    phi = np.asarray(phi, dtype=float)
    phi_c = np.asarray(phi_c, dtype=float)
    R = half_sq_dist(space, A, B) - phi[:, None] - phi_c[None, :]
    # the dual pair must also be admissible everywhere
    admissible = float(-R.min()) if R.size else 0.0
    ii, jj = np.nonzero(plan > 1e-12)
    defect = np.abs(R[ii, jj])
    bad = defect > tol
    viol = [[int(A[i]), int(B[j])] for i, j in zip(ii[bad], jj[bad])]
    worst = float(max(defect.max() if defect.size else 0.0, admissible))
    return Certificate(ok=not viol and admissible <= tol, violations=viol, max_defect=worst, tol=tol)


def certify(sol: TransportSolution, tol=None) -> Certificate:
    return verify_optimality(sol.space, sol.plan(), sol.phi, sol.phi_c, sol.rows, sol.cols, tol)


def displacement_interpolate(sol: TransportSolution, t: float) -> ProbMeasure:
    """Push every plan atom (x, y, w) to the oracle node at fraction t."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if t == 0.0:
        return sol.source
    if t == 1.0:
        return sol.target
    space = sol.space
    if not space.has_geodesics:
        raise TransportError("space has no geodesic oracle")
    z = space.geodesic_points(sol.src, sol.dst, t)
    w = np.bincount(z, weights=sol.flow, minlength=space.n)
    return ProbMeasure(space, w / w.sum())


def optimal_vertices(a, b, C, tol=1e-12, limit=8):
    """All optimal vertices of the transportation polytope (tiny instances only).

    Every vertex has a forest support, hence a leaf line whose single cell
    carries ``min(a_i, b_j)``; the recursion fixes such cells one at a time.
    Returns a list of dense plans.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = len(a), len(b)
    if m > limit or n > limit:
        raise TransportError(f"vertex enumeration is limited to {limit} points per side")
    eps = 1e-14

    @lru_cache(maxsize=None)
    def rec(ra, rb):
        rows = [i for i in range(m) if ra[i] > eps]
        cols = [j for j in range(n) if rb[j] > eps]
        if not rows or not cols:
            return frozenset([()])
        out = set()
        for i in rows:
            for j in cols:
                x = min(ra[i], rb[j])
                na = list(ra)
                nb = list(rb)
                na[i] = ra[i] - x if ra[i] - x > eps else 0.0
                nb[j] = rb[j] - x if rb[j] - x > eps else 0.0
                for rest in rec(tuple(na), tuple(nb)):
                    out.add(tuple(sorted(((i, j, x),) + rest)))
        return frozenset(out)

    plans = {}
    for cells in rec(tuple(a), tuple(b)):
        P = np.zeros((m, n))
        for i, j, x in cells:
            P[i, j] += x
        key = tuple(np.round(P.ravel(), 12))
        plans[key] = P
    plans = list(plans.values())
    costs = np.array([float((P * C).sum()) for P in plans])
    best = costs.min()
    return [P for P, c in zip(plans, costs) if c <= best + tol * max(1.0, abs(best))]
