"""Hot inner loops, each with a numba kernel and a vectorized numpy twin.

The public wrappers dispatch on :data:`abplab._accel.USE_NUMBA`.  Both variants
are importable (``*_nb`` / ``*_np``) so tests and the benchmark can compare them
directly.  Tie-breaking is identical in both paths: the lowest index wins.
"""
import numpy as np

from . import _accel
from ._accel import njit


# ---------------------------------------------------------------------------
# min-plus transform:  out[j] = min_i (C[i, j] - phi[i])
# ---------------------------------------------------------------------------

@njit
def min_plus_nb(C, phi):
    m, n = C.shape
    out = np.empty(n)
    arg = np.empty(n, dtype=np.int64)
    for j in range(n):
        best = np.inf
        k = -1
        for i in range(m):
            v = C[i, j] - phi[i]
            if v < best:
                best = v
                k = i
        out[j] = best
        arg[j] = k
    return out, arg


def min_plus_np(C, phi):
    M = C - phi[:, None]
    arg = np.argmin(M, axis=0).astype(np.int64)
    return M[arg, np.arange(M.shape[1])], arg


def min_plus(C, phi):
    C = np.ascontiguousarray(C, dtype=np.float64)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    if _accel.USE_NUMBA:
        return min_plus_nb(C, phi)
    return min_plus_np(C, phi)


# ---------------------------------------------------------------------------
# row minima with a near-tie band: mask[i, j] = F[i, j] <= min_j F[i, :] + tol
# ---------------------------------------------------------------------------

@njit
def row_argmin_band_nb(F, tol):
    m, n = F.shape
    mins = np.empty(m)
    mask = np.zeros((m, n), dtype=np.bool_)
    for i in range(m):
        best = np.inf
        for j in range(n):
            if F[i, j] < best:
                best = F[i, j]
        mins[i] = best
        for j in range(n):
            if F[i, j] <= best + tol:
                mask[i, j] = True
    return mins, mask


def row_argmin_band_np(F, tol):
    mins = F.min(axis=1)
    return mins, F <= (mins + tol)[:, None]


def row_argmin_band(F, tol):
    F = np.ascontiguousarray(F, dtype=np.float64)
    if _accel.USE_NUMBA:
        return row_argmin_band_nb(F, float(tol))
    return row_argmin_band_np(F, float(tol))


# ---------------------------------------------------------------------------
# triangle inequality scan
# ---------------------------------------------------------------------------

@njit
def triangle_violations_nb(D, tol, max_report):
    n = D.shape[0]
    found = np.empty((max_report, 3), dtype=np.int64)
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            dij = D[i, j]
            for k in range(n):
                if k == i or k == j:
                    continue
                if dij > D[i, k] + D[k, j] + tol:
                    if count < max_report:
                        found[count, 0] = i
                        found[count, 1] = k
                        found[count, 2] = j
                    count += 1
    return count, found[: min(count, max_report)]


def triangle_violations_np(D, tol, max_report):
    n = D.shape[0]
    rows = []
    count = 0
    iu, ju = np.triu_indices(n, 1)
    for k in range(n):
        bad = D[iu, ju] > D[iu, k] + D[k, ju] + tol
        bad &= (iu != k) & (ju != k)
        nb = int(bad.sum())
        if nb:
            count += nb
            if len(rows) < max_report:
                sel = np.flatnonzero(bad)
                for s in sel[: max_report - len(rows)]:
                    rows.append((iu[s], k, ju[s]))
    found = np.array(rows, dtype=np.int64).reshape(-1, 3)
    # same ordering as the loop kernel: by (i, j) then k
    if len(found):
        order = np.lexsort((found[:, 1], found[:, 2], found[:, 0]))
        found = found[order]
    return count, found


def triangle_violations(D, tol, max_report=50):
    D = np.ascontiguousarray(D, dtype=np.float64)
    if _accel.USE_NUMBA:
        return triangle_violations_nb(D, float(tol), int(max_report))
    return triangle_violations_np(D, float(tol), int(max_report))


# ---------------------------------------------------------------------------
# weighted graph Laplacian:  (L u)_i = (1/m_i) sum_j w_ij (u_j - u_i)
# ---------------------------------------------------------------------------

@njit
def graph_laplacian_nb(u, src, dst, w, mass):
    out = np.zeros(u.shape[0])
    for e in range(src.shape[0]):
        i = src[e]
        j = dst[e]
        flux = w[e] * (u[j] - u[i])
        out[i] += flux
        out[j] -= flux
    for i in range(u.shape[0]):
        out[i] /= mass[i]
    return out


def graph_laplacian_np(u, src, dst, w, mass):
    flux = w * (u[dst] - u[src])
    n = u.shape[0]
    out = np.bincount(src, weights=flux, minlength=n) - np.bincount(dst, weights=flux, minlength=n)
    return out / mass


def graph_laplacian(u, src, dst, w, mass):
    u = np.ascontiguousarray(u, dtype=np.float64)
    if _accel.USE_NUMBA:
        return graph_laplacian_nb(u, src, dst, w, mass)
    return graph_laplacian_np(u, src, dst, w, mass)


# ---------------------------------------------------------------------------
# transportation simplex (u-v method on a spanning-tree basis)
# ---------------------------------------------------------------------------

@njit
def _tree_potentials(m, n, bi, bj, C):
    """Potentials u, v with u_i + v_j = C_ij on basic cells; parent/depth of the tree.

    Tree nodes: sources 0..m-1, sinks m..m+n-1, rooted at source 0 with u_0 = 0.
    ``pedge[node]`` is the basic cell joining ``node`` to its parent.
    """
    nn = m + n
    ne = bi.shape[0]
    deg = np.zeros(nn + 1, dtype=np.int64)
    for k in range(ne):
        deg[bi[k] + 1] += 1
        deg[m + bj[k] + 1] += 1
    for a in range(nn):
        deg[a + 1] += deg[a]
    adj = np.empty(2 * ne, dtype=np.int64)
    fill = deg[:nn].copy()
    for k in range(ne):
        a = bi[k]
        b = m + bj[k]
        adj[fill[a]] = k
        fill[a] += 1
        adj[fill[b]] = k
        fill[b] += 1

    pot = np.zeros(nn)
    parent = np.full(nn, -1, dtype=np.int64)
    pedge = np.full(nn, -1, dtype=np.int64)
    depth = np.zeros(nn, dtype=np.int64)
    seen = np.zeros(nn, dtype=np.bool_)
    queue = np.empty(nn, dtype=np.int64)
    head = 0
    tail = 1
    queue[0] = 0
    seen[0] = True
    while head < tail:
        a = queue[head]
        head += 1
        for p in range(deg[a], deg[a + 1]):
            k = adj[p]
            b = bi[k] if a >= m else m + bj[k]
            if seen[b]:
                continue
            seen[b] = True
            parent[b] = a
            pedge[b] = k
            depth[b] = depth[a] + 1
            pot[b] = C[bi[k], bj[k]] - pot[a]
            queue[tail] = b
            tail += 1
    return pot[:m].copy(), pot[m:].copy(), parent, pedge, depth, tail == nn


@njit
def transport_simplex_kernel(a, b, C, tol, max_iter):
    """Exact transportation simplex.

    Returns (bi, bj, flow, u, v, status, iterations) where status is 0 for
    optimal, 1 for iteration limit, 2 for a broken basis.
    """
    m = a.shape[0]
    n = b.shape[0]
    ne = m + n - 1
    bi = np.empty(ne, dtype=np.int64)
    bj = np.empty(ne, dtype=np.int64)
    flow = np.empty(ne)

    # north-west corner start (a staircase spanning tree)
    ra = a.copy()
    rb = b.copy()
    i = 0
    j = 0
    for k in range(ne):
        x = min(ra[i], rb[j])
        bi[k] = i
        bj[k] = j
        flow[k] = x
        ra[i] -= x
        rb[j] -= x
        if k == ne - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif ra[i] <= rb[j]:
            i += 1
        else:
            j += 1

    u = np.zeros(m)
    v = np.zeros(n)
    status = 1
    it = 0
    bland = False
    degenerate_run = 0
    cycle_edges = np.empty(m + n + 1, dtype=np.int64)
    Cf = C.ravel()
    total = m * n
    block = max(int(np.sqrt(total)), 32)
    cursor = 0
    while it < max_iter:
        u, v, parent, pedge, depth, ok = _tree_potentials(m, n, bi, bj, C)
        if not ok:
            status = 2
            break
        # pricing: Bland (first negative) after long degenerate runs, otherwise
        # block search over the flattened cells starting where the last one ended
        p = -1
        q = -1
        if bland:
            for ii in range(m):
                for jj in range(n):
                    if C[ii, jj] - u[ii] - v[jj] < -tol:
                        p = ii
                        q = jj
                        break
                if p >= 0:
                    break
        else:
            scanned = 0
            while scanned < total:
                stop = min(cursor + block, total)
                idx = np.arange(cursor, stop)
                rows = idx // n
                cols = idx - rows * n
                red = Cf[cursor:stop] - u[rows] - v[cols]
                k = np.argmin(red)
                scanned += stop - cursor
                cursor = 0 if stop == total else stop
                if red[k] < -tol:
                    p = rows[k]
                    q = cols[k]
                    break
        if p < 0:
            status = 0
            break
        it += 1

        # cycle: entering edge (p, q), then tree path sink q -> source p.
        x = m + q
        y = p
        len_x = 0
        len_y = 0
        left = np.empty(m + n, dtype=np.int64)
        right = np.empty(m + n, dtype=np.int64)
        while depth[x] > depth[y]:
            left[len_x] = pedge[x]
            len_x += 1
            x = parent[x]
        while depth[y] > depth[x]:
            right[len_y] = pedge[y]
            len_y += 1
            y = parent[y]
        while x != y:
            left[len_x] = pedge[x]
            len_x += 1
            x = parent[x]
            right[len_y] = pedge[y]
            len_y += 1
            y = parent[y]
        # ordered path from q to p: left edges, then right edges reversed
        L = len_x + len_y
        for s in range(len_x):
            cycle_edges[s] = left[s]
        for s in range(len_y):
            cycle_edges[len_x + s] = right[len_y - 1 - s]
        # edges at even positions along the path (0, 2, ...) lose theta
        theta = np.inf
        leave = -1
        for s in range(0, L, 2):
            e = cycle_edges[s]
            f = flow[e]
            if f < theta or (f == theta and bland and e < leave):
                theta = f
                leave = e
        for s in range(L):
            e = cycle_edges[s]
            if s % 2 == 0:
                flow[e] -= theta
            else:
                flow[e] += theta
        flow[leave] = 0.0
        bi[leave] = p
        bj[leave] = q
        flow[leave] = theta
        if theta <= 0.0:
            degenerate_run += 1
            if degenerate_run > 2 * (m + n):
                bland = True
        else:
            degenerate_run = 0
    if status == 1:
        u, v, parent, pedge, depth, ok = _tree_potentials(m, n, bi, bj, C)
    return bi, bj, flow, u, v, status, it


def transport_simplex(a, b, C, tol, max_iter):
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    # without numba the same kernel runs interpreted; its pricing step is
    # already vectorized numpy
    return transport_simplex_kernel(a, b, C, float(tol), int(max_iter))
