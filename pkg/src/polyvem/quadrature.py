"""Quadrature on polygons and segments, plus scaled monomial bases.

Polygon rules fan triangles out from the centroid and map a collapsed
Gauss-Jacobi (Stroud conical product) triangle rule onto each of them.
Edge rules are Gauss-Legendre.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from . import _kernels
from .errors import DegenerateElementError, InvalidGeometryError

MAX_POLYGON_DEGREE = 8


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights of a quadrature rule.

    For polygon rules ``points`` has shape (q, 2). For edge rules it holds
    the physical points on the segment and ``params`` the matching
    parameters in [0, 1].
    """
    points: np.ndarray
    weights: np.ndarray
    exact_degree: int
    params: np.ndarray = None

    def integrate(self, values):
        return np.tensordot(self.weights, values, axes=(0, 0))


def _npoints(degree):
    return max(1, math.ceil((degree + 1) / 2))


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """Reference rule on the unit triangle, weights summing to one."""
    n = _npoints(degree)
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (xj + 1.0)
    wu = 0.25 * wj
    xl, wl = roots_legendre(n)
    v = 0.5 * (xl + 1.0)
    wv = 0.5 * wl
    uu, vv = np.meshgrid(u, v, indexing="ij")
    rs = np.column_stack([uu.ravel(), (vv * (1.0 - uu)).ravel()])
    w = np.outer(wu, wv).ravel()
    w = w / w.sum()
    rs.setflags(write=False)
    w.setflags(write=False)
    return rs, w


@lru_cache(maxsize=None)
def _legendre01(degree):
    x, w = roots_legendre(_npoints(degree))
    return 0.5 * (x + 1.0), 0.5 * w


def polygon_area_centroid(xy):
    """Signed area and area-weighted centroid by the shoelace formula."""
    x = xy[:, 0]
    y = xy[:, 1]
    x1 = np.roll(x, -1)
    y1 = np.roll(y, -1)
    cross = x * y1 - x1 * y
    area = 0.5 * cross.sum()
    if area == 0.0:
        raise DegenerateElementError("polygon has zero area")
    cx = ((x + x1) * cross).sum() / (6.0 * area)
    cy = ((y + y1) * cross).sum() / (6.0 * area)
    return area, cx, cy


def is_simple_polygon(xy):
    """True when no two non-adjacent edges of the polygon intersect."""
    n = len(xy)
    if n < 3:
        return False

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    for i in range(n):
        a, b = xy[i], xy[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            c, d = xy[j], xy[(j + 1) % n]
            d1 = orient(c, d, a)
            d2 = orient(c, d, b)
            d3 = orient(a, b, c)
            d4 = orient(a, b, d)
            if ((d1 > 0) != (d2 > 0) and d1 != 0 and d2 != 0
                    and (d3 > 0) != (d4 > 0) and d3 != 0 and d4 != 0):
                return False
            if d1 == 0 and on_seg(c, d, a) or d2 == 0 and on_seg(c, d, b):
                return False
            if d3 == 0 and on_seg(a, b, c) or d4 == 0 and on_seg(a, b, d):
                return False
    return True


def polygon_rule(xy, degree, centroid=None, check=False):
    """Quadrature rule on a simple polygon exact for degree ``degree``.

    Parameters
    ----------
    xy : (n, 2) array
        Vertices in counter-clockwise order.
    degree : int
        Polynomial exactness, between 0 and 8.
    centroid : (2,) array, optional
        Fan apex. Defaults to the area centroid.
    check : bool
        Verify the polygon is simple before building the rule.
    """
    if not 0 <= degree <= MAX_POLYGON_DEGREE:
        raise ValueError(f"polygon rule degree must be in [0, {MAX_POLYGON_DEGREE}], got {degree}")
    xy = np.ascontiguousarray(xy, dtype=float)
    if check and not is_simple_polygon(xy):
        raise InvalidGeometryError("polygon is not simple")
    if centroid is None:
        _, cx, cy = polygon_area_centroid(xy)
    else:
        cx, cy = float(centroid[0]), float(centroid[1])
    rs, w = triangle_rule(degree)
    pts, wts = _kernels.fan_quadrature(xy, cx, cy, rs, w)
    return QuadratureRule(pts, wts, degree)


def edge_rule(p0, p1, degree):
    """Gauss-Legendre rule on the segment p0-p1; weights sum to its length."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    length = math.hypot(*(p1 - p0))
    if length == 0.0:
        raise InvalidGeometryError("edge endpoints coincide")
    t, w = _legendre01(degree)
    pts = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
    return QuadratureRule(pts, w * length, degree, params=t)


# --------------------------------------------------------------------------
# scaled monomials
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def monomial_exponents(degree):
    """Exponent pairs (a, b) of xi^a eta^b, ordered 1, xi, eta, xi^2, xi eta, ..."""
    out = []
    for d in range(degree + 1):
        for b in range(d + 1):
            out.append((d - b, b))
    return tuple(out)


def monomial_count(degree):
    return (degree + 1) * (degree + 2) // 2


def eval_monomials(xi, eta, degree):
    """Values of the scaled monomials, shape (npts, dim)."""
    xi = np.atleast_1d(xi)
    eta = np.atleast_1d(eta)
    exps = monomial_exponents(degree)
    return np.stack([xi ** a * eta ** b for a, b in exps], axis=-1)


def eval_monomial_grads(xi, eta, degree, h):
    """Physical gradients of the scaled monomials, shape (npts, dim, 2)."""
    xi = np.atleast_1d(xi).astype(float)
    eta = np.atleast_1d(eta).astype(float)
    exps = monomial_exponents(degree)
    out = np.zeros(xi.shape + (len(exps), 2))
    for k, (a, b) in enumerate(exps):
        if a > 0:
            out[..., k, 0] = a * xi ** (a - 1) * eta ** b / h
        if b > 0:
            out[..., k, 1] = b * xi ** a * eta ** (b - 1) / h
    return out
