"""Polygonal meshes: data model, generators, geometry and interface merging."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
import hashlib
import math
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.spatial import Voronoi, cKDTree

from . import _kernels
from .errors import (
    DegenerateElementError,
    GeometricMismatchError,
    InvalidDomainError,
    InvalidGeometryError,
    InvalidMergeError,
    MeshGenerationError,
)
from .quadrature import is_simple_polygon, polygon_area_centroid

DEFAULT_MERGE_RTOL = 1e-9


@dataclass(frozen=True)
class Element:
    id: int
    vertices: Tuple[int, ...]
    region_tag: str


@dataclass(frozen=True)
class ElementGeometry:
    area: float
    centroid: Tuple[float, float]
    diameter: float


@dataclass(frozen=True, eq=False)
class PolygonalMesh:
    """Nodes, polygonal elements with region tags, and tagged boundary edges.

    ``elements[e]`` is an int array of node ids in counter-clockwise order,
    ``regions[e]`` the region tag of element ``e`` and ``boundary[tag]`` an
    (m, 2) int array of node pairs. ``region_materials`` maps a region tag to
    a material key; regions missing from it use their own tag as the key.
    """
    nodes: np.ndarray
    elements: List[np.ndarray]
    regions: List[str]
    boundary: Dict[str, np.ndarray] = field(default_factory=dict)
    region_materials: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float).reshape(-1, 2)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        elems = []
        for v in self.elements:
            a = np.asarray(v, dtype=np.int64).ravel().copy()
            a.setflags(write=False)
            elems.append(a)
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "regions", [str(r) for r in self.regions])
        if len(self.regions) != len(self.elements):
            raise InvalidGeometryError("regions and elements differ in length")
        bnd = {}
        for tag, edges in self.boundary.items():
            a = np.asarray(edges, dtype=np.int64).reshape(-1, 2).copy()
            a.setflags(write=False)
            bnd[str(tag)] = a
        object.__setattr__(self, "boundary", bnd)
        object.__setattr__(self, "region_materials", dict(self.region_materials))

    # -- basic accessors ---------------------------------------------------

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return len(self.elements)

    def element(self, eid):
        return Element(eid, tuple(int(i) for i in self.elements[eid]), self.regions[eid])

    def element_coords(self, eid):
        return self.nodes[self.elements[eid]]

    def material_key(self, eid):
        region = self.regions[eid]
        return self.region_materials.get(region, region)

    @property
    def region_tags(self):
        return sorted(set(self.regions))

    def boundary_nodes(self, tag):
        if tag not in self.boundary:
            raise KeyError(f"unknown boundary tag {tag!r}")
        return np.unique(self.boundary[tag])

    @cached_property
    def csr(self):
        """(conn, offsets) arrays of the element connectivity."""
        lengths = np.array([len(v) for v in self.elements], dtype=np.int64)
        offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        conn = (np.concatenate(self.elements) if self.elements
                else np.zeros(0, dtype=np.int64))
        return conn, offsets

    @cached_property
    def geometry(self):
        """Per-element (areas, centroids, diameters) arrays."""
        n = self.n_elements
        areas = np.empty(n)
        cents = np.empty((n, 2))
        diams = np.empty(n)
        for e in range(n):
            g = _polygon_geometry(self.element_coords(e))
            areas[e] = g.area
            cents[e] = g.centroid
            diams[e] = g.diameter
        return areas, cents, diams

    @property
    def bbox_diameter(self):
        if self.n_nodes == 0:
            return 0.0
        span = self.nodes.max(axis=0) - self.nodes.min(axis=0)
        return float(math.hypot(*span))

    def total_area(self):
        return float(self.geometry[0].sum())

    def with_region_materials(self, mapping):
        return PolygonalMesh(self.nodes, self.elements, self.regions, self.boundary,
                             {**self.region_materials, **mapping})

    def with_boundary(self, boundary):
        return PolygonalMesh(self.nodes, self.elements, self.regions, boundary,
                             self.region_materials)

    def retag_regions(self, mapping):
        regions = [mapping.get(r, r) for r in self.regions]
        return PolygonalMesh(self.nodes, self.elements, regions, self.boundary,
                             self.region_materials)

    def rename_boundary(self, mapping):
        bnd = {}
        for tag, edges in self.boundary.items():
            new = mapping.get(tag, tag)
            bnd[new] = np.vstack([bnd[new], edges]) if new in bnd else edges
        return self.with_boundary(bnd)

    def validate(self):
        """Raise if any element is malformed or references missing nodes."""
        if not np.all(np.isfinite(self.nodes)):
            raise InvalidGeometryError("node coordinates must be finite")
        n = self.n_nodes
        used = np.zeros(n, dtype=bool)
        for e, v in enumerate(self.elements):
            if len(v) < 3:
                raise InvalidGeometryError(f"element {e} has fewer than 3 vertices")
            if v.min() < 0 or v.max() >= n:
                raise InvalidGeometryError(f"element {e} references a missing node")
            if len(np.unique(v)) != len(v):
                raise InvalidGeometryError(f"element {e} repeats a vertex")
            xy = self.nodes[v]
            area, _, _ = polygon_area_centroid(xy)
            if area <= 0.0:
                raise InvalidGeometryError(f"element {e} is not counter-clockwise (signed area {area:g})")
            if not is_simple_polygon(xy):
                raise InvalidGeometryError(f"element {e} is self-intersecting")
            used[v] = True
        if not used.all():
            raise InvalidGeometryError(f"{int((~used).sum())} nodes are not used by any element")
        edges = edge_map(self)
        for tag, pairs in self.boundary.items():
            for i, j in pairs:
                key = (min(i, j), max(i, j))
                if len(edges.get(key, ())) != 1:
                    raise InvalidGeometryError(
                        f"boundary edge {tuple(int(k) for k in key)} of tag {tag!r} "
                        "does not lie on exactly one element")
        return self

    def content_hash(self):
        """Stable sha256 over geometry, connectivity, regions and boundary."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.nodes, dtype="<f8").tobytes())
        for v, r in zip(self.elements, self.regions):
            h.update(np.asarray(v, dtype="<i8").tobytes())
            h.update(r.encode())
            h.update(b"|")
        for tag in sorted(self.boundary):
            h.update(tag.encode())
            h.update(np.asarray(self.boundary[tag], dtype="<i8").tobytes())
        return h.hexdigest()


# --------------------------------------------------------------------------
# geometry
# --------------------------------------------------------------------------

def _polygon_geometry(xy):
    area, cx, cy = polygon_area_centroid(xy)
    if area <= 0.0:
        raise DegenerateElementError(f"polygon has non-positive signed area {area:g}")
    d = xy[:, None, :] - xy[None, :, :]
    diam = float(np.sqrt((d ** 2).sum(axis=-1)).max())
    return ElementGeometry(float(area), (float(cx), float(cy)), diam)


def element_geometry(mesh, element_id):
    """Area, centroid and diameter (largest vertex distance) of an element."""
    return _polygon_geometry(mesh.element_coords(element_id))


def edge_map(mesh):
    """Undirected edge (i, j) with i < j -> list of incident element ids."""
    edges = defaultdict(list)
    for e, v in enumerate(mesh.elements):
        n = len(v)
        for k in range(n):
            a, b = int(v[k]), int(v[(k + 1) % n])
            edges[(a, b) if a < b else (b, a)].append(e)
    return edges


@dataclass
class EdgeAudit:
    interior: int
    boundary: int
    overloaded: List[Tuple[int, int]]
    untagged_boundary: List[Tuple[int, int]]

    @property
    def watertight(self):
        return not self.overloaded and not self.untagged_boundary


def audit_edges(mesh):
    """Count edge incidences; flag edges with >2 elements or untagged free edges."""
    edges = edge_map(mesh)
    tagged = set()
    for pairs in mesh.boundary.values():
        for i, j in pairs:
            tagged.add((min(int(i), int(j)), max(int(i), int(j))))
    interior = boundary = 0
    over, untagged = [], []
    for key, els in edges.items():
        if len(els) == 2:
            interior += 1
        elif len(els) == 1:
            boundary += 1
            if key not in tagged:
                untagged.append(key)
        else:
            over.append(key)
    return EdgeAudit(interior, boundary, over, untagged)


def min_node_distance(mesh):
    if mesh.n_nodes < 2:
        return math.inf
    d, _ = cKDTree(mesh.nodes).query(mesh.nodes, k=2)
    return float(d[:, 1].min())


# --------------------------------------------------------------------------
# structured generators
# --------------------------------------------------------------------------

def _check_range(r, name):
    lo, hi = float(r[0]), float(r[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise InvalidDomainError(f"{name} range {r!r} is degenerate")
    return lo, hi


def generate_tensor_mesh(xs, ys, region_tag="domain"):
    """Quadrilateral mesh on the tensor grid of strictly increasing ``xs`` and ``ys``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2 or ys.size < 2 or np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise InvalidDomainError("grid coordinates must be strictly increasing with at least two entries")
    nx, ny = xs.size - 1, ys.size - 1
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return j * (nx + 1) + i

    elements = []
    for j in range(ny):
        for i in range(nx):
            elements.append([nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)])
    boundary = {
        "bottom": [[nid(i, 0), nid(i + 1, 0)] for i in range(nx)],
        "right": [[nid(nx, j), nid(nx, j + 1)] for j in range(ny)],
        "top": [[nid(i + 1, ny), nid(i, ny)] for i in range(nx)],
        "left": [[nid(0, j + 1), nid(0, j)] for j in range(ny)],
    }
    return PolygonalMesh(nodes, elements, [region_tag] * len(elements), boundary)


def generate_quad_mesh(x_range, y_range, nx, ny, region_tag="domain"):
    """Structured ``nx`` by ``ny`` quadrilateral mesh of a rectangle.

    Boundary edges are tagged ``left``, ``right``, ``top`` and ``bottom``.
    """
    x0, x1 = _check_range(x_range, "x")
    y0, y1 = _check_range(y_range, "y")
    if int(nx) < 1 or int(ny) < 1:
        raise InvalidDomainError("nx and ny must be at least 1")
    return generate_tensor_mesh(np.linspace(x0, x1, int(nx) + 1),
                                np.linspace(y0, y1, int(ny) + 1), region_tag)


def generate_polar_quad_mesh(r_range, theta_range, nr, ntheta, region_tag="domain"):
    """Structured quadrilateral mesh of an annular sector.

    Nodes lie on exact circles; element edges are straight. Boundary tags are
    ``inner``, ``outer``, ``theta0`` (start angle) and ``theta1`` (end angle).
    """
    r0, r1 = _check_range(r_range, "r")
    t0, t1 = _check_range(theta_range, "theta")
    if r0 <= 0.0:
        raise InvalidDomainError("inner radius must be positive")
    if int(nr) < 1 or int(ntheta) < 1:
        raise InvalidDomainError("nr and ntheta must be at least 1")
    nr, ntheta = int(nr), int(ntheta)
    rs = np.linspace(r0, r1, nr + 1)
    ts = np.linspace(t0, t1, ntheta + 1)
    R, T = np.meshgrid(rs, ts, indexing="xy")
    nodes = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])

    def nid(i, j):
        return j * (nr + 1) + i

    elements = []
    for j in range(ntheta):
        for i in range(nr):
            elements.append([nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)])
    boundary = {
        "theta0": [[nid(i, 0), nid(i + 1, 0)] for i in range(nr)],
        "outer": [[nid(nr, j), nid(nr, j + 1)] for j in range(ntheta)],
        "theta1": [[nid(i + 1, ntheta), nid(i, ntheta)] for i in range(nr)],
        "inner": [[nid(0, j + 1), nid(0, j)] for j in range(ntheta)],
    }
    return PolygonalMesh(nodes, elements, [region_tag] * len(elements), boundary)


# --------------------------------------------------------------------------
# polygon domains and Voronoi generation
# --------------------------------------------------------------------------

def _ccw(xy):
    xy = np.asarray(xy, dtype=float)
    x, y = xy[:, 0], xy[:, 1]
    if (x * np.roll(y, -1) - np.roll(x, -1) * y).sum() < 0:
        return xy[::-1].copy()
    return xy


@dataclass
class PolygonDomain:
    """Simple outer polygon with optional polygonal holes.

    ``outer_tags[i]`` names outer edge i (from vertex i to i+1) and
    ``hole_tags[k]`` names every edge of hole k. The outer ring is stored
    counter-clockwise, holes clockwise.
    """
    outer: np.ndarray
    holes: List[np.ndarray] = field(default_factory=list)
    outer_tags: Optional[List[str]] = None
    hole_tags: Optional[List[str]] = None

    def __post_init__(self):
        outer = np.asarray(self.outer, dtype=float).reshape(-1, 2)
        if len(outer) < 3 or not is_simple_polygon(outer):
            raise InvalidDomainError("outer boundary must be a simple polygon")
        x, y = outer[:, 0], outer[:, 1]
        flipped = (x * np.roll(y, -1) - np.roll(x, -1) * y).sum() < 0
        if flipped:
            outer = outer[::-1].copy()
        n = len(outer)
        if self.outer_tags is None:
            tags = ["boundary"] * n
        else:
            tags = list(self.outer_tags)
            if len(tags) != n:
                raise InvalidDomainError("outer_tags must name every outer edge")
            if flipped:
                # edge i ran v_i -> v_{i+1}; after reversal it is edge n-2-i
                tags = [tags[(n - 2 - i) % n] for i in range(n)]
        holes = []
        for hxy in self.holes:
            hxy = np.asarray(hxy, dtype=float).reshape(-1, 2)
            if len(hxy) < 3 or not is_simple_polygon(hxy):
                raise InvalidDomainError("holes must be simple polygons")
            holes.append(_ccw(hxy)[::-1].copy())
        htags = (list(self.hole_tags) if self.hole_tags is not None
                 else [f"hole{k}" for k in range(len(holes))])
        if len(htags) != len(holes):
            raise InvalidDomainError("hole_tags must name every hole")
        self.outer = outer
        self.holes = holes
        self.outer_tags = tags
        self.hole_tags = htags

    @cached_property
    def shape(self):
        from shapely.geometry import Polygon
        return Polygon(self.outer, [h for h in self.holes])

    @property
    def area(self):
        return float(self.shape.area)

    @property
    def diameter(self):
        span = self.outer.max(axis=0) - self.outer.min(axis=0)
        return float(math.hypot(*span))

    @cached_property
    def is_convex(self):
        if self.holes:
            return False
        xy = self.outer
        d1 = np.roll(xy, -1, axis=0) - xy
        d2 = np.roll(d1, -1, axis=0)
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        return bool(np.all(cross >= -1e-14 * self.diameter ** 2))

    def tagged_segments(self):
        """List of (p0, p1, tag) for every boundary segment."""
        out = []
        n = len(self.outer)
        for i in range(n):
            out.append((self.outer[i], self.outer[(i + 1) % n], self.outer_tags[i]))
        for hxy, tag in zip(self.holes, self.hole_tags):
            m = len(hxy)
            for i in range(m):
                out.append((hxy[i], hxy[(i + 1) % m], tag))
        return out

    def contains(self, points):
        from shapely import contains_xy
        pts = np.atleast_2d(points)
        return np.asarray(contains_xy(self.shape, pts[:, 0], pts[:, 1]))

    def sample(self, n, rng):
        lo = self.outer.min(axis=0)
        hi = self.outer.max(axis=0)
        out = np.empty((0, 2))
        for _ in range(1000):
            cand = rng.uniform(lo, hi, size=(max(2 * n, 16), 2))
            cand = cand[self.contains(cand)]
            out = np.vstack([out, cand])
            if len(out) >= n:
                return out[:n]
        raise MeshGenerationError("could not sample seeds inside the domain")


def rectangle_domain(x_range, y_range):
    x0, x1 = _check_range(x_range, "x")
    y0, y1 = _check_range(y_range, "y")
    return PolygonDomain([[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
                         outer_tags=["bottom", "right", "top", "left"])


def regular_polygon(center, radius, n, phase=0.0):
    ang = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)])


def annulus_sector_domain(r_inner, r_outer, theta0, theta1, n_arc):
    """Annular sector with arcs split into ``n_arc`` straight segments.

    Edges are tagged ``theta0``, ``outer``, ``theta1`` and ``inner``.
    """
    if not 0.0 < r_inner < r_outer:
        raise InvalidDomainError("need 0 < r_inner < r_outer")
    t = np.linspace(theta0, theta1, int(n_arc) + 1)
    outer = np.column_stack([r_outer * np.cos(t), r_outer * np.sin(t)])
    inner = np.column_stack([r_inner * np.cos(t[::-1]), r_inner * np.sin(t[::-1])])
    pts = np.vstack([outer, inner])
    # edges: outer arc (n_arc), theta1 cut (1), inner arc (n_arc), theta0 cut (1)
    tags = ["outer"] * n_arc + ["theta1"] + ["inner"] * n_arc + ["theta0"]
    return PolygonDomain(pts, outer_tags=tags)


def _bounded_voronoi_cells(seeds, center, radius):
    ring = 32
    ang = 2.0 * np.pi * np.arange(ring) / ring
    far = np.column_stack([center[0] + 10.0 * radius * np.cos(ang),
                           center[1] + 10.0 * radius * np.sin(ang)])
    vor = Voronoi(np.vstack([seeds, far]))
    cells = []
    for i in range(len(seeds)):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or not region:
            raise MeshGenerationError("unbounded Voronoi cell for an interior seed")
        cells.append(_ccw(vor.vertices[region]))
    return cells


def _shapely_parts(geom):
    from shapely.geometry import MultiPolygon, Polygon
    if geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        return [geom]
    if isinstance(geom, MultiPolygon):
        return list(geom.geoms)
    return [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon) and not g.is_empty]


def _split_holed(poly):
    """Cut a polygon containing holes into hole-free pieces."""
    from shapely.geometry import LineString
    from shapely.ops import split
    if not poly.interiors:
        return [poly]
    hx = poly.interiors[0].centroid.x
    y0, y1 = poly.bounds[1] - 1.0, poly.bounds[3] + 1.0
    pieces = []
    for part in split(poly, LineString([(hx, y0), (hx, y1)])).geoms:
        pieces.extend(_split_holed(part))
    return pieces


def _clip_cells(cells, domain):
    """Clip cells to the domain; returns a list (per seed) of coordinate arrays."""
    out = []
    if domain.is_convex:
        for c in cells:
            clipped = _kernels.clip_convex(np.ascontiguousarray(c), domain.outer)
            out.append([clipped] if len(clipped) >= 3 else [])
        return out
    from shapely.geometry import Polygon
    shape = domain.shape
    for c in cells:
        geom = Polygon(c).intersection(shape)
        parts = []
        for p in _shapely_parts(geom):
            for q in _split_holed(p):
                xy = np.asarray(q.exterior.coords)[:-1]
                if len(xy) >= 3 and q.area > 0.0:
                    parts.append(_ccw(xy))
        out.append(parts)
    return out


def _parts_centroid(parts):
    tot = 0.0
    acc = np.zeros(2)
    for xy in parts:
        a, cx, cy = polygon_area_centroid(xy)
        tot += a
        acc += a * np.array([cx, cy])
    if tot <= 0.0:
        return None, 0.0
    return acc / tot, tot


def mesh_from_polygons(polygons, regions, tol, domain=None, boundary_segments=None):
    """Build a mesh from independent polygon coordinate arrays.

    Vertices closer than ``tol`` are fused (transitively). Free edges are
    tagged from ``boundary_segments`` (or the domain's tagged segments) by
    collinearity within ``tol``.
    """
    counts = [len(p) for p in polygons]
    allpts = np.vstack(polygons)
    tree = cKDTree(allpts)
    parent = np.arange(len(allpts))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(tree.query_pairs(tol)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(allpts))])
    uniq, inverse = np.unique(roots, return_inverse=True)
    nodes = allpts[uniq]
    elements, regs = [], []
    pos = 0
    for c, reg in zip(counts, regions):
        ids = inverse[pos:pos + c]
        pos += c
        cleaned = [int(ids[0])]
        for k in ids[1:]:
            if int(k) != cleaned[-1]:
                cleaned.append(int(k))
        while len(cleaned) > 1 and cleaned[-1] == cleaned[0]:
            cleaned.pop()
        if len(cleaned) >= 3 and len(set(cleaned)) == len(cleaned):
            elements.append(cleaned)
            regs.append(reg)
    used = np.unique(np.concatenate([np.asarray(e) for e in elements]))
    remap = -np.ones(len(nodes), dtype=np.int64)
    remap[used] = np.arange(len(used))
    nodes = nodes[used]
    elements = [remap[np.asarray(e)] for e in elements]
    mesh = PolygonalMesh(nodes, elements, regs, {})
    segs = boundary_segments if boundary_segments is not None else (
        domain.tagged_segments() if domain is not None else [])
    if segs:
        mesh = mesh.with_boundary(_tag_free_edges(mesh, segs, tol))
    return mesh


def _point_segment_param(p, a, b):
    d = b - a
    L2 = float(d @ d)
    t = float((p - a) @ d) / L2
    proj = a + min(1.0, max(0.0, t)) * d
    return t, float(np.hypot(*(p - proj)))


def _tag_free_edges(mesh, segments, tol):
    boundary = defaultdict(list)
    for (a, b), els in edge_map(mesh).items():
        if len(els) != 1:
            continue
        e = els[0]
        v = mesh.elements[e]
        k = int(np.nonzero(v == a)[0][0])
        i, j = (a, b) if int(v[(k + 1) % len(v)]) == b else (b, a)
        pi, pj = mesh.nodes[i], mesh.nodes[j]
        tag = None
        for s0, s1, stag in segments:
            _, di = _point_segment_param(pi, s0, s1)
            _, dj = _point_segment_param(pj, s0, s1)
            if di <= tol and dj <= tol:
                tag = stag
                break
        if tag is None:
            raise MeshGenerationError(f"free edge ({i}, {j}) does not lie on the domain boundary")
        boundary[tag].append([i, j])
    return {t: np.array(v, dtype=np.int64) for t, v in boundary.items()}


def generate_polygonal_mesh(domain, n_seeds, lloyd_iterations=5, seed=0,
                            region_tag="domain", max_retries=20):
    """Centroidal Voronoi mesh of a polygonal domain.

    Seeds are drawn uniformly inside the domain with ``numpy.random
    .default_rng(seed)``, relaxed by ``lloyd_iterations`` Lloyd steps and the
    final cells are clipped to the domain (Sutherland-Hodgman for convex
    domains, shapely intersection otherwise). Cells split by a hole or a
    concave boundary become several elements.
    """
    if not isinstance(domain, PolygonDomain):
        domain = PolygonDomain(**domain) if isinstance(domain, Mapping) else PolygonDomain(domain)
    n_seeds = int(n_seeds)
    if n_seeds < 1:
        raise InvalidDomainError("n_seeds must be at least 1")
    rng = np.random.default_rng(seed)
    diam = domain.diameter
    center = 0.5 * (domain.outer.min(axis=0) + domain.outer.max(axis=0))
    if n_seeds == 1:
        parts = [[domain.outer]] if domain.is_convex else _clip_cells([_ccw(regular_polygon(center, 5 * diam, 8))], domain)
    else:
        seeds = domain.sample(n_seeds, rng)
        retries = 0
        it = 0
        while True:
            cells = _bounded_voronoi_cells(seeds, center, diam)
            parts = _clip_cells(cells, domain)
            empty = [i for i, p in enumerate(parts) if not p]
            if empty:
                retries += 1
                if retries > max_retries:
                    raise MeshGenerationError("seeds keep falling outside the domain")
                seeds[empty] = domain.sample(len(empty), rng)
                continue
            if it >= lloyd_iterations:
                break
            for i, p in enumerate(parts):
                c, _ = _parts_centroid(p)
                seeds[i] = c
            # a centroid of a non-convex cell can fall outside the domain
            outside = ~domain.contains(seeds)
            if outside.any():
                seeds[outside] = domain.sample(int(outside.sum()), rng)
            it += 1
    polys = [xy for p in parts for xy in p]
    return mesh_from_polygons(polys, [region_tag] * len(polys), 1e-8 * diam, domain=domain)


# --------------------------------------------------------------------------
# combining, merging and rotating
# --------------------------------------------------------------------------

def combine_meshes(mesh_a, mesh_b):
    """Disjoint union; boundary tags with equal names are concatenated."""
    off = mesh_a.n_nodes
    nodes = np.vstack([mesh_a.nodes, mesh_b.nodes])
    elements = list(mesh_a.elements) + [v + off for v in mesh_b.elements]
    regions = list(mesh_a.regions) + list(mesh_b.regions)
    boundary = {t: e for t, e in mesh_a.boundary.items()}
    for t, e in mesh_b.boundary.items():
        boundary[t] = np.vstack([boundary[t], e + off]) if t in boundary else e + off
    mats = {**mesh_a.region_materials, **mesh_b.region_materials}
    return PolygonalMesh(nodes, elements, regions, boundary, mats)


def _nodes_inside_edges(nodes, edges, cand_ids, tol):
    """For each edge, candidate node ids strictly between its endpoints, sorted."""
    out = {}
    if len(cand_ids) == 0:
        return out
    cxy = nodes[cand_ids]
    tree = cKDTree(cxy)
    for i, j in edges:
        a, b = nodes[i], nodes[j]
        d = b - a
        L = math.hypot(*d)
        mid = 0.5 * (a + b)
        near = tree.query_ball_point(mid, 0.5 * L + tol)
        hits = []
        for k in near:
            nid = int(cand_ids[k])
            if nid in (i, j):
                continue
            t, dist = _point_segment_param(nodes[nid], a, b)
            if dist <= tol and tol / L < t < 1.0 - tol / L:
                hits.append((t, nid))
        if hits:
            hits.sort()
            out[(int(i), int(j))] = [nid for _, nid in hits]
    return out


def _on_chain(points, nodes, edges, tol):
    """Boolean mask: which points lie within tol of any edge of the chain."""
    a = nodes[edges[:, 0]]
    b = nodes[edges[:, 1]]
    d = b - a
    L2 = (d ** 2).sum(axis=1)
    ok = np.zeros(len(points), dtype=bool)
    for s in range(0, len(points), 256):
        p = points[s:s + 256][:, None, :]
        t = np.clip(((p - a[None]) * d[None]).sum(-1) / L2[None], 0.0, 1.0)
        proj = a[None] + t[..., None] * d[None]
        dist = np.sqrt(((p - proj) ** 2).sum(-1)).min(axis=1)
        ok[s:s + 256] = dist <= tol
    return ok


def _apply_edge_splits(elements, boundary, splits):
    """Insert split chains into element polygons and boundary edge lists."""
    chain = {}
    for (i, j), mids in splits.items():
        chain[(i, j)] = mids
        chain[(j, i)] = mids[::-1]
    new_elems = []
    for v in elements:
        n = len(v)
        out = []
        for k in range(n):
            a, b = int(v[k]), int(v[(k + 1) % n])
            out.append(a)
            out.extend(chain.get((a, b), ()))
        new_elems.append(np.array(out, dtype=np.int64))
    new_bnd = {}
    for tag, edges in boundary.items():
        lst = []
        for a, b in edges:
            seq = [int(a)] + list(chain.get((int(a), int(b)), ())) + [int(b)]
            lst.extend([seq[k], seq[k + 1]] for k in range(len(seq) - 1))
        new_bnd[tag] = np.array(lst, dtype=np.int64).reshape(-1, 2)
    return new_elems, new_bnd


def merge_nonmatching_interface(mesh_a, mesh_b, interface_tag_a, interface_tag_b, tol=None):
    """Glue two independently meshed regions along coincident boundary chains.

    Interface nodes of each side that fall inside an interface edge of the
    other side are inserted into the abutting element as new polygon
    vertices; nodes closer than ``tol`` are fused. No elements are created
    or removed. Both interface tags are dropped from the result.
    """
    for m, t in ((mesh_a, interface_tag_a), (mesh_b, interface_tag_b)):
        if t not in m.boundary or len(m.boundary[t]) == 0:
            raise InvalidMergeError(f"interface tag {t!r} not found")
    combined = combine_meshes(mesh_a.rename_boundary({interface_tag_a: "\0ia"}),
                              mesh_b.rename_boundary({interface_tag_b: "\0ib"}))
    if tol is None:
        tol = DEFAULT_MERGE_RTOL * combined.bbox_diameter
    nodes = combined.nodes
    ea = combined.boundary["\0ia"]
    eb = combined.boundary["\0ib"]
    ida = np.unique(ea)
    idb = np.unique(eb)

    if not _on_chain(nodes[idb], nodes, ea, tol).all() or not _on_chain(nodes[ida], nodes, eb, tol).all():
        raise GeometricMismatchError("interface chains deviate by more than the merge tolerance")

    # fuse coincident nodes: B interface nodes onto A interface nodes
    remap = np.arange(len(nodes))
    dist, idx = cKDTree(nodes[ida]).query(nodes[idb])
    close = dist <= tol
    remap[idb[close]] = ida[idx[close]]
    elements = [remap[v] for v in combined.elements]
    boundary = {t: remap[e] for t, e in combined.boundary.items()}
    ea = boundary["\0ia"]
    eb = boundary["\0ib"]
    ida = np.unique(ea)
    idb = np.unique(eb)

    splits = _nodes_inside_edges(nodes, ea, idb, tol)
    splits.update(_nodes_inside_edges(nodes, eb, ida, tol))
    elements, boundary = _apply_edge_splits(elements, boundary, splits)
    boundary.pop("\0ia")
    boundary.pop("\0ib")

    used = np.unique(np.concatenate(elements))
    renum = -np.ones(len(nodes), dtype=np.int64)
    renum[used] = np.arange(len(used))
    merged = PolygonalMesh(nodes[used], [renum[v] for v in elements], combined.regions,
                           {t: renum[e] for t, e in boundary.items() if len(e)},
                           combined.region_materials)
    for e, v in enumerate(merged.elements):
        xy = merged.nodes[v]
        if len(np.unique(v)) != len(v) or not is_simple_polygon(xy) or polygon_area_centroid(xy)[0] <= 0:
            raise InvalidMergeError(f"merged element {e} is degenerate or self-intersecting")
    audit = audit_edges(merged)
    if audit.overloaded:
        raise InvalidMergeError(f"{len(audit.overloaded)} edges are shared by more than two elements after merge")
    return merged


def split_boundary_tag(mesh, tag, predicate, new_tag):
    """Move the edges of ``tag`` whose midpoints satisfy ``predicate`` to ``new_tag``.

    ``predicate`` receives an (m, 2) array of edge midpoints and returns a
    boolean mask.
    """
    if tag not in mesh.boundary:
        raise KeyError(f"unknown boundary tag {tag!r}")
    edges = mesh.boundary[tag]
    mid = 0.5 * (mesh.nodes[edges[:, 0]] + mesh.nodes[edges[:, 1]])
    sel = np.asarray(predicate(mid), dtype=bool)
    bnd = dict(mesh.boundary)
    moved = edges[sel]
    kept = edges[~sel]
    if len(kept):
        bnd[tag] = kept
    else:
        bnd.pop(tag)
    if len(moved):
        bnd[new_tag] = np.vstack([bnd[new_tag], moved]) if new_tag in bnd else moved
    return mesh.with_boundary(bnd)


def rotate_nodes(xy, angle, center):
    c, s = math.cos(angle), math.sin(angle)
    d = np.asarray(xy, dtype=float) - np.asarray(center, dtype=float)
    return np.column_stack([center[0] + c * d[:, 0] - s * d[:, 1],
                            center[1] + s * d[:, 0] + c * d[:, 1]])


def split_region(mesh, region_tag):
    """Split an unmerged mesh into (region part, rest); the parts must not share nodes."""
    inside = np.array([r == region_tag for r in mesh.regions])
    if not inside.any():
        raise KeyError(f"unknown region {region_tag!r}")

    def sub(mask):
        els = [mesh.elements[e] for e in np.nonzero(mask)[0]]
        regs = [mesh.regions[e] for e in np.nonzero(mask)[0]]
        used = np.unique(np.concatenate(els)) if els else np.zeros(0, dtype=np.int64)
        renum = -np.ones(mesh.n_nodes, dtype=np.int64)
        renum[used] = np.arange(len(used))
        bnd = {}
        for tag, edges in mesh.boundary.items():
            keep = np.all(np.isin(edges, used), axis=1)
            if keep.any():
                bnd[tag] = renum[edges[keep]]
        return PolygonalMesh(mesh.nodes[used], [renum[v] for v in els], regs, bnd,
                             mesh.region_materials), set(used.tolist())

    part, used_a = sub(inside)
    rest, used_b = sub(~inside)
    if used_a & used_b:
        raise InvalidMergeError(f"region {region_tag!r} shares nodes with the rest of the mesh; "
                                "rotate the unmerged assembly")
    return part, rest


def rotate_region_mesh(mesh, region_tag, angle, center, interface_tags=None, tol=None):
    """Rigidly rotate the elements of one region and re-merge the interface.

    ``mesh`` holds the region as a separate, not yet merged component (for
    example from :func:`combine_meshes`). With ``interface_tags`` given as
    ``(region_side_tag, host_side_tag)`` the rotated region is merged into
    the rest of the mesh; without it the rotated, still unmerged mesh is
    returned.
    """
    part, rest = split_region(mesh, region_tag)
    rotated = PolygonalMesh(rotate_nodes(part.nodes, angle, center), part.elements,
                            part.regions, part.boundary, part.region_materials)
    if interface_tags is None:
        return combine_meshes(rotated, rest) if rest.n_elements else rotated
    tag_region, tag_host = interface_tags
    return merge_nonmatching_interface(rotated, rest, tag_region, tag_host, tol)
