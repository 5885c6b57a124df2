"""Hot inner loops with two interchangeable implementations.

Each kernel exists as ``<name>_numba`` (explicit loops compiled with
numba) and ``<name>_numpy`` (vectorised numpy). The public name is bound to
one of them at import according to :data:`polyvem._accel.USE_NUMBA`. Both
variants return identical results up to floating-point reassociation; the
test suite checks the pairs against each other.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "fan_quadrature",
    "locate_points",
    "clip_convex",
    "scatter_coo",
]


# --------------------------------------------------------------------------
# centroid-fan quadrature
# --------------------------------------------------------------------------

def fan_quadrature_numpy(xy, cx, cy, ref_rs, ref_w):
    """Map a reference-triangle rule onto the centroid fan of a polygon.

    ``ref_rs`` are (r, s) points on the unit triangle (0,0),(1,0),(0,1) and
    ``ref_w`` the weights normalised to sum to one. Weights come out scaled
    by the signed area of each fan triangle, so the rule stays exact for
    simple polygons that are not star-shaped about the centroid.
    """
    p1 = xy
    p2 = np.roll(xy, -1, axis=0)
    e1 = p1 - np.array([cx, cy])
    e2 = p2 - np.array([cx, cy])
    area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    px = cx + np.outer(e1[:, 0], ref_rs[:, 0]) + np.outer(e2[:, 0], ref_rs[:, 1])
    py = cy + np.outer(e1[:, 1], ref_rs[:, 0]) + np.outer(e2[:, 1], ref_rs[:, 1])
    w = np.outer(area, ref_w)
    pts = np.empty((px.size, 2))
    pts[:, 0] = px.ravel()
    pts[:, 1] = py.ravel()
    return pts, w.ravel()


@njit
def fan_quadrature_numba(xy, cx, cy, ref_rs, ref_w):
    n = xy.shape[0]
    q = ref_w.shape[0]
    pts = np.empty((n * q, 2))
    w = np.empty(n * q)
    for i in range(n):
        j = (i + 1) % n
        ax = xy[i, 0] - cx
        ay = xy[i, 1] - cy
        bx = xy[j, 0] - cx
        by = xy[j, 1] - cy
        area = 0.5 * (ax * by - ay * bx)
        for k in range(q):
            r = ref_rs[k, 0]
            s = ref_rs[k, 1]
            pts[i * q + k, 0] = cx + ax * r + bx * s
            pts[i * q + k, 1] = cy + ay * r + by * s
            w[i * q + k] = area * ref_w[k]
    return pts, w


# --------------------------------------------------------------------------
# point location
# --------------------------------------------------------------------------

def locate_points_numpy(points, nodes, conn, offsets, tol):
    """Index of the first element containing each point, -1 when none.

    Elements are given in CSR form: the vertices of element ``e`` are
    ``conn[offsets[e]:offsets[e+1]]``. Points within ``tol`` of an element
    boundary count as inside.
    """
    npt = points.shape[0]
    found = np.full(npt, -1, dtype=np.int64)
    px = points[:, 0]
    py = points[:, 1]
    for e in range(offsets.shape[0] - 1):
        todo = found < 0
        if not todo.any():
            break
        poly = nodes[conn[offsets[e]:offsets[e + 1]]]
        xmin, ymin = poly.min(axis=0) - tol
        xmax, ymax = poly.max(axis=0) + tol
        cand = todo & (px >= xmin) & (px <= xmax) & (py >= ymin) & (py <= ymax)
        if not cand.any():
            continue
        idx = np.nonzero(cand)[0]
        qx = px[idx][:, None]
        qy = py[idx][:, None]
        ax = poly[:, 0][None, :]
        ay = poly[:, 1][None, :]
        bx = np.roll(poly[:, 0], -1)[None, :]
        by = np.roll(poly[:, 1], -1)[None, :]
        straddle = (ay > qy) != (by > qy)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = ax + (qy - ay) * (bx - ax) / (by - ay)
        inside = (np.count_nonzero(straddle & (qx < xcross), axis=1) % 2) == 1
        # distance to each edge for the boundary tolerance
        dx = bx - ax
        dy = by - ay
        len2 = dx * dx + dy * dy
        t = np.clip(((qx - ax) * dx + (qy - ay) * dy) / len2, 0.0, 1.0)
        dist2 = (ax + t * dx - qx) ** 2 + (ay + t * dy - qy) ** 2
        on_edge = (dist2 <= tol * tol).any(axis=1)
        hit = inside | on_edge
        found[idx[hit]] = e
    return found


@njit
def locate_points_numba(points, nodes, conn, offsets, tol):
    npt = points.shape[0]
    nel = offsets.shape[0] - 1
    found = np.full(npt, -1, dtype=np.int64)
    tol2 = tol * tol
    for p in range(npt):
        qx = points[p, 0]
        qy = points[p, 1]
        for e in range(nel):
            s = offsets[e]
            n = offsets[e + 1] - s
            xmin = np.inf
            xmax = -np.inf
            ymin = np.inf
            ymax = -np.inf
            for k in range(n):
                vx = nodes[conn[s + k], 0]
                vy = nodes[conn[s + k], 1]
                xmin = min(xmin, vx)
                xmax = max(xmax, vx)
                ymin = min(ymin, vy)
                ymax = max(ymax, vy)
            if qx < xmin - tol or qx > xmax + tol or qy < ymin - tol or qy > ymax + tol:
                continue
            crossings = 0
            near = False
            for k in range(n):
                ax = nodes[conn[s + k], 0]
                ay = nodes[conn[s + k], 1]
                bx = nodes[conn[s + (k + 1) % n], 0]
                by = nodes[conn[s + (k + 1) % n], 1]
                if (ay > qy) != (by > qy):
                    xc = ax + (qy - ay) * (bx - ax) / (by - ay)
                    if qx < xc:
                        crossings += 1
                dx = bx - ax
                dy = by - ay
                t = ((qx - ax) * dx + (qy - ay) * dy) / (dx * dx + dy * dy)
                t = min(1.0, max(0.0, t))
                ex = ax + t * dx - qx
                ey = ay + t * dy - qy
                if ex * ex + ey * ey <= tol2:
                    near = True
            if near or crossings % 2 == 1:
                found[p] = e
                break
    return found


# --------------------------------------------------------------------------
# Sutherland-Hodgman clipping against a convex polygon
# --------------------------------------------------------------------------

def clip_convex_numpy(subject, clip):
    """Clip polygon ``subject`` by the convex CCW polygon ``clip``."""
    out = [tuple(p) for p in subject]
    m = clip.shape[0]
    for i in range(m):
        if not out:
            break
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % m]
        ex, ey = bx - ax, by - ay
        inp = out
        out = []
        n = len(inp)
        for k in range(n):
            px, py = inp[k]
            qx, qy = inp[(k + 1) % n]
            sp = ex * (py - ay) - ey * (px - ax)
            sq = ex * (qy - ay) - ey * (qx - ax)
            if sp >= 0.0:
                out.append((px, py))
                if sq < 0.0:
                    t = sp / (sp - sq)
                    out.append((px + t * (qx - px), py + t * (qy - py)))
            elif sq >= 0.0:
                t = sp / (sp - sq)
                out.append((px + t * (qx - px), py + t * (qy - py)))
    return np.array(out, dtype=float).reshape(-1, 2)


@njit
def clip_convex_numba(subject, clip):
    cap = subject.shape[0] + clip.shape[0] + 2
    buf_a = np.empty((cap * 2, 2))
    buf_b = np.empty((cap * 2, 2))
    n = subject.shape[0]
    for k in range(n):
        buf_a[k, 0] = subject[k, 0]
        buf_a[k, 1] = subject[k, 1]
    m = clip.shape[0]
    for i in range(m):
        if n == 0:
            break
        ax = clip[i, 0]
        ay = clip[i, 1]
        bx = clip[(i + 1) % m, 0]
        by = clip[(i + 1) % m, 1]
        ex = bx - ax
        ey = by - ay
        cnt = 0
        for k in range(n):
            px = buf_a[k, 0]
            py = buf_a[k, 1]
            qx = buf_a[(k + 1) % n, 0]
            qy = buf_a[(k + 1) % n, 1]
            sp = ex * (py - ay) - ey * (px - ax)
            sq = ex * (qy - ay) - ey * (qx - ax)
            if sp >= 0.0:
                buf_b[cnt, 0] = px
                buf_b[cnt, 1] = py
                cnt += 1
                if sq < 0.0:
                    t = sp / (sp - sq)
                    buf_b[cnt, 0] = px + t * (qx - px)
                    buf_b[cnt, 1] = py + t * (qy - py)
                    cnt += 1
            elif sq >= 0.0:
                t = sp / (sp - sq)
                buf_b[cnt, 0] = px + t * (qx - px)
                buf_b[cnt, 1] = py + t * (qy - py)
                cnt += 1
        buf_a, buf_b = buf_b, buf_a
        n = cnt
    return buf_a[:n].copy()


# --------------------------------------------------------------------------
# sparse scatter
# --------------------------------------------------------------------------

def scatter_coo_numpy(dofs, dof_offsets, values, val_offsets):
    """COO triplets for element matrices stored back to back.

    Element ``e`` owns ``dofs[dof_offsets[e]:dof_offsets[e+1]]`` (k entries)
    and the row-major k x k block ``values[val_offsets[e]:val_offsets[e+1]]``.
    """
    k = np.diff(dof_offsets)
    nval = k * k
    owner = np.repeat(np.arange(k.size), nval)
    local = np.arange(values.size) - val_offsets[owner]
    ke = k[owner]
    rows = dofs[dof_offsets[owner] + local // ke]
    cols = dofs[dof_offsets[owner] + local % ke]
    return rows, cols, values.copy()


@njit
def scatter_coo_numba(dofs, dof_offsets, values, val_offsets):
    nv = values.shape[0]
    rows = np.empty(nv, dtype=np.int64)
    cols = np.empty(nv, dtype=np.int64)
    vals = np.empty(nv)
    for e in range(dof_offsets.shape[0] - 1):
        d0 = dof_offsets[e]
        k = dof_offsets[e + 1] - d0
        v0 = val_offsets[e]
        for a in range(k):
            for b in range(k):
                t = v0 + a * k + b
                rows[t] = dofs[d0 + a]
                cols[t] = dofs[d0 + b]
                vals[t] = values[t]
    return rows, cols, vals


if USE_NUMBA:
    fan_quadrature = fan_quadrature_numba
    locate_points = locate_points_numba
    clip_convex = clip_convex_numba
    scatter_coo = scatter_coo_numba
else:
    fan_quadrature = fan_quadrature_numpy
    locate_points = locate_points_numpy
    clip_convex = clip_convex_numpy
    scatter_coo = scatter_coo_numpy
