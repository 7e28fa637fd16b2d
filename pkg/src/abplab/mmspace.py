"""Finite metric measure spaces, regions and the four model generators."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import kernels

MODELS = ("interval", "circle", "euclidean_grid", "sphere2_grid")
_DENSE_LIMIT = 6000  # largest n for which the full distance matrix is cached


class SpaceError(ValueError):
    """Invalid space description; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True, eq=False)
class Region:
    """A set of point ids.

    ``kind`` is one of ``"open"`` (a domain Omega), ``"vertex"`` (a vertex set
    D), ``"closure"`` or ``"set"`` (anything else).
    """

    indices: np.ndarray
    kind: str = "set"

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64).ravel())
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, i):
        k = np.searchsorted(self.indices, i)
        return k < len(self.indices) and self.indices[k] == i

    def mask(self, n):
        m = np.zeros(n, dtype=bool)
        m[self.indices] = True
        return m

    def issubset(self, other):
        return bool(np.isin(self.indices, other.indices).all())

    def union(self, other, kind=None):
        return Region(np.union1d(self.indices, other.indices), kind or self.kind)

    def difference(self, other, kind=None):
        return Region(np.setdiff1d(self.indices, other.indices), kind or self.kind)

    def tolist(self):
        return [int(i) for i in self.indices]


@dataclass(frozen=True, eq=False)
class DiscreteMMSpace:
    """Finite metric measure space with an optional geodesic oracle.

    Distances are either an explicit matrix (``metric="matrix"``) or computed
    from ``coords`` for the model geometries (``"interval"``, ``"euclidean"``,
    ``"circle"``, ``"sphere"``).  Instances are treated as immutable.
    """

    mass: np.ndarray
    edges: np.ndarray  # (k, 2) int, i < j
    weights: np.ndarray  # (k,) conductances
    metric: str = "matrix"
    dist_matrix: np.ndarray | None = None
    coords: np.ndarray | None = None
    interior: np.ndarray | None = None
    h: float = 0.0
    labels: tuple = ()
    model: dict = field(default_factory=dict)
    geodesic: str | None = None  # None, "model" or "search"
    _grid_shape: tuple = ()
    _grid_lo: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.mass)
        if self.interior is None:
            object.__setattr__(self, "interior", np.ones(n, dtype=bool))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(n)))
        for arr in (self.mass, self.edges, self.weights, self.interior):
            arr.setflags(write=False)

    # -- basic geometry -----------------------------------------------------

    @property
    def n(self):
        return len(self.mass)

    @property
    def has_geodesics(self):
        return self.geodesic is not None

    @cached_property
    def total_mass(self):
        return float(self.mass.sum())

    def dist(self, I=None, J=None):
        """Distance block ``d(I[a], J[b])`` (full matrix when both are None)."""
        if I is None and J is None and self.n <= _DENSE_LIMIT:
            return self._full
        I = np.arange(self.n) if I is None else np.atleast_1d(np.asarray(I, dtype=np.int64))
        J = np.arange(self.n) if J is None else np.atleast_1d(np.asarray(J, dtype=np.int64))
        if self.metric == "matrix":
            return self.dist_matrix[np.ix_(I, J)]
        if self.n <= _DENSE_LIMIT and "_full" in self.__dict__:
            return self._full[np.ix_(I, J)]
        return _coord_dist(self.metric, self.coords[I], self.coords[J])

    @cached_property
    def _full(self):
        if self.metric == "matrix":
            return self.dist_matrix
        D = _coord_dist(self.metric, self.coords, self.coords)
        D.setflags(write=False)
        return D

    @cached_property
    def diameter(self):
        if self.metric == "matrix" or self.n <= _DENSE_LIMIT:
            return float(self.dist().max())
        if self.metric in ("circle", "sphere"):
            # a far point is antipodal to within one cell
            far = self.dist(np.arange(self.n), [0]).max()
            return float(max(far, np.pi - self.h))
        lo = self.coords.min(axis=0)
        hi = self.coords.max(axis=0)
        return float(np.sqrt(((hi - lo) ** 2).sum()))

    @cached_property
    def _tree(self):
        return cKDTree(self.coords)

    def dist_to_set(self, S, points=None):
        """``min_{s in S} d(x, s)`` for every x (or for ``points``)."""
        S = np.asarray(S.indices if isinstance(S, Region) else S, dtype=np.int64)
        X = np.arange(self.n) if points is None else np.asarray(points, dtype=np.int64)
        if len(S) == 0:
            return np.full(len(X), np.inf)
        if self.metric == "matrix" or len(S) * len(X) <= 4_000_000:
            out = np.empty(len(X))
            step = max(1, 4_000_000 // len(S))
            for s in range(0, len(X), step):
                out[s : s + step] = self.dist(X[s : s + step], S).min(axis=1)
            return out
        # the embedding chord is monotone in the model distance
        _, nearest = cKDTree(self.coords[S]).query(self.coords[X])
        return _coord_dist_pairs(self.metric, self.coords[X], self.coords[S[nearest]])

    # -- neighbourhood structure ------------------------------------------

    @cached_property
    def neighbors(self):
        """CSR adjacency (indptr, indices) of the edge graph."""
        n = self.n
        if len(self.edges) == 0:
            return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
        a = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        b = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((b, a))
        a, b = a[order], b[order]
        indptr = np.searchsorted(a, np.arange(n + 1))
        return indptr, b

    def boundary(self, omega: Region) -> Region:
        """Nodes outside ``omega`` joined by an edge to a node of ``omega``."""
        if len(self.edges) == 0:
            return Region([], "set")
        inside = omega.mask(self.n)
        e = self.edges
        touch = np.concatenate([e[inside[e[:, 0]] & ~inside[e[:, 1]], 1],
                                e[inside[e[:, 1]] & ~inside[e[:, 0]], 0]])
        return Region(touch, "set")

    def closure(self, omega: Region) -> Region:
        return omega.union(self.boundary(omega), kind="closure")

    def region(self, indices=None, kind="set", where=None) -> Region:
        """Region from explicit ids or from a predicate on coordinates."""
        if where is not None:
            indices = np.flatnonzero(where(self.coords))
        return Region(indices if indices is not None else [], kind)

    @property
    def everything(self):
        return Region(np.arange(self.n), "set")

    # -- geodesic oracle ----------------------------------------------------

    def geodesic_points(self, I, J, t):
        """Node nearest to the constant-speed geodesic position between I and J at ``t``.

        Ties go to the lowest point id.  ``t=0`` returns I and ``t=1`` returns J.
        """
        if self.geodesic is None:
            raise SpaceError("space has no geodesic oracle", "geo_oracle")
        I = np.atleast_1d(np.asarray(I, dtype=np.int64))
        J = np.atleast_1d(np.asarray(J, dtype=np.int64))
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError("t must lie in [0, 1]")
        if t == 0.0:
            return I.copy()
        if t == 1.0:
            return J.copy()
        if self.geodesic == "search":
            return self._geodesic_search(I, J, t)
        if self.metric in ("interval", "euclidean"):
            p = (1.0 - t) * self.coords[I] + t * self.coords[J]
            return self._snap_lattice(p)
        if self.metric == "circle":
            th = self.model_angles
            d = np.mod(th[J] - th[I] + np.pi, 2 * np.pi) - np.pi
            d = np.where(d == -np.pi, np.pi, d)
            s = np.mod(th[I] + t * d, 2 * np.pi) / (2 * np.pi / self.n)
            return _snap_1d(s, self.n, periodic=True)
        if self.metric == "sphere":
            X, Y = self.coords[I], self.coords[J]
            om = _coord_dist_pairs("sphere", X, Y)
            with np.errstate(invalid="ignore", divide="ignore"):
                so = np.sin(om)
                wa = np.where(so > 1e-15, np.sin((1 - t) * om) / so, 1 - t)
                wb = np.where(so > 1e-15, np.sin(t * om) / so, t)
            P = wa[:, None] * X + wb[:, None] * Y
            P /= np.linalg.norm(P, axis=1, keepdims=True)
            return self._nearest_node(P)
        raise SpaceError(f"no geodesic rule for metric {self.metric!r}", "geo_oracle")

    def geodesic_point(self, i, j, t):
        return int(self.geodesic_points([i], [j], t)[0])

    @cached_property
    def model_angles(self):
        return np.arange(self.n) * (2 * np.pi / self.n)

    def _snap_lattice(self, P):
        s = (P - self._grid_lo) / self.h
        shape = self._grid_shape
        idx = np.zeros(len(P), dtype=np.int64)
        for ax, size in enumerate(shape):
            k = _snap_1d(s[:, ax], size, periodic=False)
            idx = idx * size + k
        return idx

    def _nearest_node(self, P):
        k = min(4, self.n)
        dd, ii = self._tree.query(P, k=k)
        dd = np.atleast_2d(dd).reshape(len(P), k)
        ii = np.atleast_2d(ii).reshape(len(P), k)
        best = dd[:, :1]
        cand = np.where(dd <= best + 1e-12, ii, np.iinfo(np.int64).max)
        return cand.min(axis=1).astype(np.int64)

    def _geodesic_search(self, I, J, t):
        out = np.empty(len(I), dtype=np.int64)
        for k, (i, j) in enumerate(zip(I, J)):
            dij = self.dist([i], [j])[0, 0]
            di = self.dist([i])[0]
            dj = self.dist([j])[0]
            score = np.abs(di - t * dij) + np.abs(dj - (1 - t) * dij)
            out[k] = int(np.argmin(score))
        return out

    # -- serialization --------------------------------------------------------

    def to_json(self):
        """Space file payload: points, full distance matrix, masses, edges, coords."""
        doc = {
            "points": list(self.labels),
            "dist": self.dist().tolist(),
            "mass": self.mass.tolist(),
            "edges": [[int(i), int(j), float(w)] for (i, j), w in zip(self.edges, self.weights)],
        }
        if self.coords is not None:
            doc["coords"] = self.coords.tolist()
        if not self.interior.all():
            doc["interior"] = [int(i) for i in np.flatnonzero(self.interior)]
        return doc


# ---------------------------------------------------------------------------
# distance helpers
# ---------------------------------------------------------------------------

def _coord_dist(metric, A, B):
    if metric in ("interval", "euclidean"):
        diff = A[:, None, :] - B[None, :, :]
        if A.shape[1] == 1:
            return np.abs(diff[..., 0])
        return np.sqrt((diff**2).sum(-1))
    if metric == "circle":
        # coords hold (cos, sin); angle difference via atan2 of cross/dot
        cross = A[:, None, 0] * B[None, :, 1] - A[:, None, 1] * B[None, :, 0]
        dot = A[:, None, 0] * B[None, :, 0] + A[:, None, 1] * B[None, :, 1]
        return np.abs(np.arctan2(cross, dot))
    if metric == "sphere":
        cr = np.cross(A[:, None, :], B[None, :, :])
        dot = A @ B.T
        return np.arctan2(np.linalg.norm(cr, axis=-1), dot)
    raise SpaceError(f"unknown metric {metric!r}", "metric")


def _coord_dist_pairs(metric, A, B):
    if metric in ("interval", "euclidean"):
        return np.sqrt(((A - B) ** 2).sum(-1))
    if metric == "circle":
        cross = A[:, 0] * B[:, 1] - A[:, 1] * B[:, 0]
        dot = (A * B).sum(-1)
        return np.abs(np.arctan2(cross, dot))
    if metric == "sphere":
        return np.arctan2(np.linalg.norm(np.cross(A, B), axis=-1), (A * B).sum(-1))
    raise SpaceError(f"unknown metric {metric!r}", "metric")


def _snap_1d(s, size, periodic):
    """Nearest integer to ``s``; exact half-way ties go to the lower id."""
    lo = np.floor(s)
    frac = s - lo
    up = frac > 0.5 + 1e-9
    k = (lo + up).astype(np.int64)
    if periodic:
        k = np.mod(k, size)
        # a wrap-around tie (between size-1 and 0) belongs to 0
        tie = np.abs(frac - 0.5) <= 1e-9
        k = np.where(tie & (lo.astype(np.int64) % size == size - 1), 0, k)
    else:
        k = np.clip(k, 0, size - 1)
    return k


# ---------------------------------------------------------------------------
# model generators
# ---------------------------------------------------------------------------

def _require(spec, key, kind=float):
    if key not in spec:
        raise SpaceError(f"model descriptor is missing {key!r}", key)
    try:
        return kind(spec[key])
    except (TypeError, ValueError):
        raise SpaceError(f"model field {key!r} has invalid value {spec[key]!r}", key) from None


def _dedupe_edges(e, w):
    e = np.sort(np.asarray(e, dtype=np.int64), axis=1)
    keep = e[:, 0] != e[:, 1]
    e, w = e[keep], np.asarray(w, dtype=float)[keep]
    key, inv = np.unique(e, axis=0, return_inverse=True)
    wsum = np.bincount(inv.ravel(), weights=w, minlength=len(key))
    return key.astype(np.int64), wsum


def build_model_space(spec: dict) -> DiscreteMMSpace:
    """Build one of the model spaces from a descriptor dict.

    Descriptors::

        {"model": "interval", "a": 0, "b": 1, "n": 11}
        {"model": "circle", "n": 100}
        {"model": "euclidean_grid", "dim": 2, "extent": [-1, 1], "h": 0.01}
        {"model": "sphere2_grid", "n_lat": 16, "n_lon": 32}
    """
    if not isinstance(spec, dict):
        raise SpaceError("model descriptor must be an object", "model")
    model = spec.get("model")
    if model not in MODELS:
        raise SpaceError(f"unknown model {model!r}; expected one of {MODELS}", "model")
    if model == "interval":
        a, b = _require(spec, "a"), _require(spec, "b")
        n = _require(spec, "n", int)
        if n < 2:
            raise SpaceError("interval needs n >= 2", "n")
        if not b > a:
            raise SpaceError("interval needs b > a", "b")
        h = (b - a) / (n - 1)
        x = a + h * np.arange(n)
        x[-1] = b
        return _lattice_space(x[:, None], (n,), np.array([a]), h, "interval", dict(spec))
    if model == "euclidean_grid":
        dim = _require(spec, "dim", int)
        if dim not in (1, 2, 3):
            raise SpaceError("euclidean_grid needs dim in {1, 2, 3}", "dim")
        h = _require(spec, "h")
        if not h > 0:
            raise SpaceError("euclidean_grid needs h > 0", "h")
        extent = spec.get("extent")
        if extent is None:
            raise SpaceError("model descriptor is missing 'extent'", "extent")
        ext = np.asarray(extent, dtype=float)
        if ext.shape == (2,):
            ext = np.tile(ext, (dim, 1))
        if ext.shape != (dim, 2) or not np.all(ext[:, 1] > ext[:, 0]):
            raise SpaceError("extent must be [lo, hi] or one [lo, hi] per axis with hi > lo", "extent")
        counts = (ext[:, 1] - ext[:, 0]) / h
        sizes = np.rint(counts).astype(np.int64) + 1
        if np.any(np.abs(counts - np.rint(counts)) > 1e-9 * np.maximum(1, counts)) or np.any(sizes < 2):
            raise SpaceError("extent must be a whole number (>= 1) of steps h", "h")
        axes = [ext[k, 0] + h * np.arange(sizes[k]) for k in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        X = np.stack([g.ravel() for g in mesh], axis=1)
        return _lattice_space(X, tuple(int(s) for s in sizes), ext[:, 0].copy(), h, "euclidean", dict(spec))
    if model == "circle":
        n = _require(spec, "n", int)
        if n < 2:
            raise SpaceError("circle needs n >= 2", "n")
        h = 2 * np.pi / n
        th = h * np.arange(n)
        X = np.stack([np.cos(th), np.sin(th)], axis=1)
        idx = np.arange(n)
        e, w = _dedupe_edges(np.stack([idx, (idx + 1) % n], 1), np.full(n, 1.0 / h))
        return DiscreteMMSpace(
            mass=np.full(n, h), edges=e, weights=w, metric="circle", coords=X, h=h,
            model=dict(spec), geodesic="model",
        )
    # sphere2_grid
    n_lat = _require(spec, "n_lat", int)
    n_lon = _require(spec, "n_lon", int)
    if n_lat < 2:
        raise SpaceError("sphere2_grid needs n_lat >= 2", "n_lat")
    if n_lon < 3:
        raise SpaceError("sphere2_grid needs n_lon >= 3", "n_lon")
    dth, dph = np.pi / n_lat, 2 * np.pi / n_lon
    th = (np.arange(n_lat) + 0.5) * dth
    ph = np.arange(n_lon) * dph
    T, P = np.meshgrid(th, ph, indexing="ij")
    X = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1).reshape(-1, 3)
    mass = (np.sin(T) * dth * dph).ravel()
    ids = np.arange(n_lat * n_lon).reshape(n_lat, n_lon)
    e_lon = np.stack([ids.ravel(), np.roll(ids, -1, axis=1).ravel()], 1)
    w_lon = np.repeat(dth / (np.sin(th) * dph), n_lon)
    e_lat = np.stack([ids[:-1].ravel(), ids[1:].ravel()], 1)
    w_lat = np.repeat(np.sin((np.arange(1, n_lat)) * dth) * dph / dth, n_lon)
    e, w = _dedupe_edges(np.concatenate([e_lon, e_lat]), np.concatenate([w_lon, w_lat]))
    el = _coord_dist_pairs("sphere", X[e[:, 0]], X[e[:, 1]])
    space = DiscreteMMSpace(
        mass=mass, edges=e, weights=w, metric="sphere", coords=X, h=float(el.max()),
        model=dict(spec), geodesic="model",
    )
    object.__setattr__(space, "colatitude", T.ravel())
    object.__setattr__(space, "longitude", P.ravel())
    return space


def _lattice_space(X, shape, lo, h, metric, spec):
    dim = len(shape)
    n = int(np.prod(shape))
    ids = np.arange(n).reshape(shape)
    edges = []
    interior = np.ones(shape, dtype=bool)
    for ax in range(dim):
        a = np.take(ids, np.arange(shape[ax] - 1), axis=ax).ravel()
        b = np.take(ids, np.arange(1, shape[ax]), axis=ax).ravel()
        edges.append(np.stack([a, b], 1))
        sl = [slice(None)] * dim
        sl[ax] = 0
        interior[tuple(sl)] = False
        sl[ax] = -1
        interior[tuple(sl)] = False
    e = np.concatenate(edges).astype(np.int64)
    mass = np.full(n, h**dim)
    w = np.full(len(e), h**dim / h**2)
    return DiscreteMMSpace(
        mass=mass, edges=e, weights=w, metric=metric, coords=X, interior=interior.ravel(), h=float(h),
        model=spec, geodesic="model", _grid_shape=tuple(shape), _grid_lo=np.asarray(lo, dtype=float),
    )


# ---------------------------------------------------------------------------
# user-supplied spaces
# ---------------------------------------------------------------------------

def space_from_dict(doc: dict, complete_from_edges=False) -> DiscreteMMSpace:
    """Space from the JSON file layout (or a model descriptor under ``"model"``).

    With ``complete_from_edges`` the distance matrix is replaced by all-pairs
    shortest paths over edge lengths (the optional fourth entry of each edge).
    """
    if "model" in doc:
        return build_model_space(doc)
    for key in ("mass", "edges"):
        if key not in doc:
            raise SpaceError(f"space file is missing {key!r}", key)
    mass = np.asarray(doc["mass"], dtype=float)
    n = len(mass)
    raw = doc["edges"]
    if raw:
        arr = np.asarray([list(r)[:3] for r in raw], dtype=float)
        e = arr[:, :2].astype(np.int64)
        if e.min() < 0 or e.max() >= n:
            raise SpaceError("edge endpoint out of range", "edges")
        if np.any(arr[:, 2] <= 0):
            raise SpaceError("edge conductances must be positive", "edges")
        e, w = _dedupe_edges(e, arr[:, 2])
    else:
        e, w = np.zeros((0, 2), dtype=np.int64), np.zeros(0)
    if complete_from_edges:
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import shortest_path

        lens = [(int(r[0]), int(r[1]), float(r[3])) for r in raw if len(r) > 3]
        if len(lens) != len(raw):
            raise SpaceError("shortest-path completion needs a length on every edge", "edges")
        li = np.array(lens)
        G = csr_matrix((li[:, 2], (li[:, 0].astype(int), li[:, 1].astype(int))), shape=(n, n))
        D = shortest_path(G, directed=False)
    else:
        if "dist" not in doc:
            raise SpaceError("space file is missing 'dist'", "dist")
        D = np.asarray(doc["dist"], dtype=float)
    if D.shape != (n, n):
        raise SpaceError(f"dist must be {n}x{n}, got {D.shape}", "dist")
    coords = np.asarray(doc["coords"], dtype=float) if doc.get("coords") is not None else None
    interior = None
    if "interior" in doc:
        interior = np.zeros(n, dtype=bool)
        interior[np.asarray(doc["interior"], dtype=np.int64)] = True
    D = D.copy()
    D.setflags(write=False)
    pos = D[D > 0]
    return DiscreteMMSpace(
        mass=mass, edges=e, weights=w, metric="matrix", dist_matrix=D, coords=coords, interior=interior,
        h=float(pos.min()) if pos.size else 0.0,
        labels=tuple(doc.get("points") or range(n)),
        geodesic="search" if doc.get("geodesic", "search") == "search" else None,
    )


def load_space(path, complete_from_edges=False) -> DiscreteMMSpace:
    with open(Path(path)) as fh:
        return space_from_dict(json.load(fh), complete_from_edges=complete_from_edges)


# ---------------------------------------------------------------------------
# validation and neighbourhoods
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    diagonal: list = field(default_factory=list)  # i with d(i,i) != 0
    symmetry: list = field(default_factory=list)  # (i, j)
    negative: list = field(default_factory=list)  # (i, j) with d < 0 or d(i,j)=0, i != j
    triangle: list = field(default_factory=list)  # (i, k, j): d(i,j) > d(i,k) + d(k,j)
    triangle_count: int = 0
    mass: list = field(default_factory=list)  # i with non-positive or non-finite mass
    nonfinite: list = field(default_factory=list)
    tolerance: float = 0.0

    @property
    def ok(self):
        return not (self.diagonal or self.symmetry or self.negative or self.triangle_count
                    or self.mass or self.nonfinite)

    def to_dict(self):
        return {
            "ok": self.ok,
            "diagonal": self.diagonal,
            "symmetry": self.symmetry,
            "positivity": self.negative,
            "triangle": self.triangle,
            "triangle_count": self.triangle_count,
            "mass": self.mass,
            "nonfinite": self.nonfinite,
            "tolerance": self.tolerance,
        }


def validate_metric(space: DiscreteMMSpace, max_report=50) -> ValidationReport:
    """Check symmetry, zero diagonal, positivity, triangle inequality and masses."""
    D = np.asarray(space.dist(), dtype=float)
    rep = ValidationReport()
    finite = np.isfinite(D)
    if not finite.all():
        rep.nonfinite = [tuple(map(int, p)) for p in np.argwhere(~finite)[:max_report]]
        D = np.where(finite, D, np.inf)
    diam = float(np.max(D[finite])) if finite.any() else 0.0
    tol = 1e-12 * max(diam, 1e-300)
    rep.tolerance = tol
    rep.diagonal = [int(i) for i in np.flatnonzero(np.abs(np.diag(D)) > 0)[:max_report]]
    asym = np.argwhere(np.triu(np.abs(D - D.T) > tol, 1))
    rep.symmetry = [tuple(map(int, p)) for p in asym[:max_report]]
    off = ~np.eye(len(D), dtype=bool)
    neg = np.argwhere(np.triu((D <= 0) & off, 1) | np.triu(D < 0, 1) | np.triu(D.T < 0, 1))
    rep.negative = [tuple(map(int, p)) for p in neg[:max_report]]
    Ds = np.where(np.isfinite(D), D, 1e300)
    count, found = kernels.triangle_violations(Ds, tol, max_report)
    rep.triangle_count = int(count)
    rep.triangle = [tuple(map(int, r)) for r in found]
    m = np.asarray(space.mass)
    rep.mass = [int(i) for i in np.flatnonzero(~(np.isfinite(m) & (m > 0)))[:max_report]]
    return rep


def epsilon_neighborhood(space: DiscreteMMSpace, A: Region, eps: float) -> Region:
    """``{x : d(x, A) < eps}`` together with A itself."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if eps == 0 or len(A) == 0:
        return Region(A.indices, "set")
    d = space.dist_to_set(A)
    slack = 1e-12 * max(space.diameter, eps)
    return Region(np.union1d(A.indices, np.flatnonzero(d < eps - slack)), "set")
