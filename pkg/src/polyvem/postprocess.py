"""Stress recovery, von Mises stress, interface-aware nodal averaging, error
metrics and line sampling."""
import csv
import warnings
from dataclasses import dataclass
from typing import Dict

import numpy as np

from ._kernels import locate_points
from .errors import ConfigurationError, MeshMismatchError, PointOutsideMeshError
from .vem_elastic import PLANE_STRAIN, PLANE_STRESS, elasticity_matrix
from .vem_thermal import scalar_projection


@dataclass(frozen=True, eq=False)
class StressField:
    """Recovered stresses (MPa) in Voigt order (sxx, syy, sxy).

    ``by_material[key]`` holds nodal averages over the elements of one
    material (NaN at nodes that material does not touch); ``nodal`` is the
    mean over the material-wise averages present at each node.
    ``element_szz`` is the out-of-plane stress (zero under plane stress).
    """
    element: np.ndarray
    element_szz: np.ndarray
    element_modes: tuple
    element_nu: np.ndarray
    by_material: Dict[str, np.ndarray]
    nodal: np.ndarray
    nodal_szz: np.ndarray
    mesh_hash: str

    def element_von_mises(self):
        return von_mises_general(self.element, self.element_szz)

    def nodal_von_mises(self):
        return von_mises_general(self.nodal, self.nodal_szz)


def material_nodal_average(mesh, element_values):
    """Average element values at nodes, separately per material, then across materials.

    Returns ``(by_material, averaged)``. A node touched by a single material
    gets the plain mean of its incident elements.
    """
    vals = np.asarray(element_values, dtype=float)
    squeeze = vals.ndim == 1
    if squeeze:
        vals = vals[:, None]
    if vals.shape[0] != mesh.n_elements:
        raise ValueError("one value per element expected")
    keys = [mesh.material_key(e) for e in range(mesh.n_elements)]
    conn, offsets = mesh.csr
    owner = np.repeat(np.arange(mesh.n_elements), np.diff(offsets))
    by_material = {}
    acc = np.zeros((mesh.n_nodes, vals.shape[1]))
    nmat = np.zeros(mesh.n_nodes)
    for key in sorted(set(keys)):
        sel = np.array([keys[o] == key for o in owner])
        s = np.zeros((mesh.n_nodes, vals.shape[1]))
        c = np.zeros(mesh.n_nodes)
        np.add.at(s, conn[sel], vals[owner[sel]])
        np.add.at(c, conn[sel], 1.0)
        touched = c > 0
        avg = np.full_like(s, np.nan)
        avg[touched] = s[touched] / c[touched, None]
        by_material[key] = avg[:, 0] if squeeze else avg
        acc[touched] += avg[touched]
        nmat[touched] += 1.0
    averaged = acc / np.maximum(nmat, 1.0)[:, None]
    return by_material, (averaged[:, 0] if squeeze else averaged)


def recover_stress(displacement, temperature, mesh, materials, T_ref=None):
    """Element stresses ``D (eps - eps_t)`` at centroids plus nodal averages.

    ``temperature`` may be None for a purely mechanical solution. ``T_ref``
    defaults to the reference temperature recorded in the displacement
    solution.
    """
    h = mesh.content_hash()
    if displacement.kind != "displacement":
        raise ConfigurationError("displacement solution expected")
    if displacement.mesh_hash != h:
        raise MeshMismatchError("displacement solution belongs to a different mesh")
    if temperature is not None and temperature.mesh_hash != h:
        raise MeshMismatchError("temperature solution belongs to a different mesh")
    if T_ref is None:
        T_ref = float(displacement.metadata.get("T_ref", 0.0))
    n = mesh.n_elements
    eps = displacement.element_field
    sig = np.empty((n, 3))
    szz = np.zeros(n)
    nus = np.empty(n)
    modes = []
    for e in range(n):
        key = mesh.material_key(e)
        if key not in materials:
            raise ConfigurationError(f"no material for {key!r}")
        mat = materials[key]
        D = elasticity_matrix(mat)
        dT = 0.0 if temperature is None else temperature.element_centroid_values[e] - T_ref
        eps_t = mat.thermal_strain_coefficient * dT * np.array([1.0, 1.0, 0.0])
        sig[e] = D @ (eps[e] - eps_t)
        if mat.mode == PLANE_STRAIN:
            szz[e] = mat.nu * (sig[e, 0] + sig[e, 1]) - mat.E * mat.alpha * dT
        nus[e] = mat.nu
        modes.append(mat.mode)
    by_mat, nodal = material_nodal_average(mesh, sig)
    _, nodal_szz = material_nodal_average(mesh, szz)
    return StressField(sig, szz, tuple(modes), nus, by_mat, nodal, nodal_szz, h)


def von_mises_general(stress, szz=None):
    """von Mises stress from (sxx, syy, sxy) and an out-of-plane normal stress."""
    s = np.asarray(stress, dtype=float)
    sx, sy, txy = s[..., 0], s[..., 1], s[..., 2]
    sz = np.zeros_like(sx) if szz is None else np.asarray(szz, dtype=float)
    val = 0.5 * ((sx - sy) ** 2 + (sy - sz) ** 2 + (sz - sx) ** 2) + 3.0 * txy ** 2
    return np.sqrt(np.maximum(val, 0.0))


def von_mises(stress, mode=PLANE_STRESS, nu=None, szz=None):
    """von Mises stress of in-plane stress components.

    For plane strain the out-of-plane stress defaults to ``nu (sxx + syy)``
    when ``szz`` is not given.
    """
    s = np.asarray(stress, dtype=float)
    if mode == PLANE_STRESS:
        return von_mises_general(s, None)
    if mode != PLANE_STRAIN:
        raise ConfigurationError(f"unknown mode {mode!r}")
    if szz is None:
        if nu is None:
            raise ConfigurationError("plane strain needs nu or szz")
        szz = nu * (s[..., 0] + s[..., 1])
    return von_mises_general(s, szz)


# --------------------------------------------------------------------------
# error metrics
# --------------------------------------------------------------------------

def error_eav(numerical, exact, zero_tol=0.0, return_excluded=False):
    """Mean relative error in percent, ``mean(|num - ex| / |ex|) * 100``.

    Samples with ``|exact| <= zero_tol`` are excluded (with a warning); pass
    ``return_excluded=True`` to also get the number of excluded samples.
    """
    num = np.asarray(numerical, dtype=float).ravel()
    ex = np.asarray(exact, dtype=float).ravel()
    if num.shape != ex.shape:
        raise ValueError("numerical and exact samples differ in length")
    keep = np.abs(ex) > zero_tol
    excluded = int(num.size - keep.sum())
    if excluded:
        warnings.warn(f"E_AV: {excluded} samples with zero exact value excluded", RuntimeWarning,
                      stacklevel=2)
    if not keep.any():
        raise ValueError("all exact samples are zero")
    val = float(np.mean(np.abs(num[keep] - ex[keep]) / np.abs(ex[keep])) * 100.0)
    return (val, excluded) if return_excluded else val


def error_rms(numerical, exact):
    """Root-mean-square error normalised by the largest exact magnitude.

    Samples may be scalars (shape (m,)) or vectors (shape (m, k)); for
    vectors the Euclidean norm of each sample is used.
    """
    num = np.asarray(numerical, dtype=float)
    ex = np.asarray(exact, dtype=float)
    if num.shape != ex.shape:
        raise ValueError("numerical and exact samples differ in shape")
    if num.ndim == 1:
        num, ex = num[:, None], ex[:, None]
    scale = np.max(np.linalg.norm(ex, axis=1))
    if scale == 0.0:
        raise ValueError("exact samples are all zero")
    diff2 = np.sum((num - ex) ** 2, axis=1)
    return float(np.sqrt(np.mean(diff2)) / scale)


# --------------------------------------------------------------------------
# polar transforms
# --------------------------------------------------------------------------

def polar_stress(stress, points, center=(0.0, 0.0)):
    """(sr, stheta, srtheta) from Cartesian Voigt stresses at points."""
    s = np.asarray(stress, dtype=float)
    p = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    th = np.arctan2(p[:, 1], p[:, 0])
    c, si = np.cos(th), np.sin(th)
    sx, sy, txy = s[:, 0], s[:, 1], s[:, 2]
    sr = sx * c * c + sy * si * si + 2 * txy * c * si
    st = sx * si * si + sy * c * c - 2 * txy * c * si
    srt = (sy - sx) * c * si + txy * (c * c - si * si)
    return np.column_stack([sr, st, srt])


def polar_vector(vec, points, center=(0.0, 0.0)):
    """(v_r, v_theta) components of Cartesian vectors at points."""
    v = np.asarray(vec, dtype=float)
    p = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    th = np.arctan2(p[:, 1], p[:, 0])
    c, s = np.cos(th), np.sin(th)
    return np.column_stack([v[:, 0] * c + v[:, 1] * s, -v[:, 0] * s + v[:, 1] * c])


# --------------------------------------------------------------------------
# line extraction
# --------------------------------------------------------------------------

def sample_polyline(polyline, n_samples):
    """``n_samples`` points equally spaced in arc length, with their arc lengths."""
    P = np.asarray(polyline, dtype=float)
    if P.ndim != 2 or P.shape[0] < 2 or P.shape[1] != 2:
        raise ValueError("polyline needs at least two 2D points")
    if n_samples < 2:
        raise ValueError("at least two samples are needed")
    seg = np.hypot(*np.diff(P, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.linspace(0.0, cum[-1], n_samples)
    x = np.interp(s, cum, P[:, 0])
    y = np.interp(s, cum, P[:, 1])
    return s, np.column_stack([x, y])


def _edge_hit(xy, p, tol):
    """(k, t) of the element edge within ``tol`` of ``p``, or None."""
    n = len(xy)
    for k in range(n):
        a, b = xy[k], xy[(k + 1) % n]
        d = b - a
        L2 = d @ d
        t = float(np.clip((p - a) @ d / L2, 0.0, 1.0))
        if np.hypot(*(a + t * d - p)) <= tol:
            return k, t
    return None


def extract_line(mesh, values, polyline, n_samples, tol=None):
    """Sample a field along a polyline.

    ``values`` is either per element (shape (n_el,) or (n_el, k)), sampled as
    element constants, or per node (shape (n_nodes,) or (n_nodes, k)),
    evaluated through the element energy projection. For element fields a
    sample lying on an edge between two materials takes the interface value
    of the material-averaged nodal field, interpolated along that edge.
    Returns ``(s, samples)``.
    """
    vals = np.asarray(values, dtype=float)
    s, pts = sample_polyline(polyline, n_samples)
    if tol is None:
        tol = 1e-9 * max(mesh.bbox_diameter, 1.0)
    conn, offsets = mesh.csr
    owner = locate_points(pts, mesh.nodes, conn, offsets, tol)
    bad = np.flatnonzero(owner < 0)
    if bad.size:
        p = pts[bad[0]]
        raise PointOutsideMeshError(f"sample point ({p[0]:.10g}, {p[1]:.10g}) is outside the mesh")
    squeeze = vals.ndim == 1
    V = vals[:, None] if squeeze else vals
    out = np.empty((len(pts), V.shape[1]))
    if V.shape[0] == mesh.n_elements and V.shape[0] != mesh.n_nodes:
        from .mesh import edge_map
        emap = edge_map(mesh)
        _, nodal = material_nodal_average(mesh, V)
        for i, (e, p) in enumerate(zip(owner, pts)):
            out[i] = V[e]
            v = mesh.elements[e]
            hit = _edge_hit(mesh.nodes[v], p, tol)
            if hit is None:
                continue
            k, t = hit
            a, b = int(v[k]), int(v[(k + 1) % len(v)])
            touching = emap[(min(a, b), max(a, b))]
            if len({mesh.material_key(x) for x in touching}) > 1:
                out[i] = (1.0 - t) * nodal[a] + t * nodal[b]
    elif V.shape[0] == mesh.n_nodes:
        cache = {}
        for i, (e, p) in enumerate(zip(owner, pts)):
            if e not in cache:
                cache[e] = scalar_projection(mesh.element_coords(e))
            op = cache[e].value_operator(p[:1], p[1:])
            out[i] = op @ V[mesh.elements[e]]
    else:
        raise ValueError("values must be given per element or per node")
    return s, (out[:, 0] if squeeze else out)


def write_profile_csv(path, s, values):
    """Write an ``s,value`` CSV with 17 significant digits."""
    s = np.asarray(s, dtype=float).ravel()
    v = np.asarray(values, dtype=float).ravel()
    if s.shape != v.shape:
        raise ValueError("s and values differ in length")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "value"])
        for a, b in zip(s, v):
            w.writerow([f"{a:.17g}", f"{b:.17g}"])


def read_profile_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


__all__ = [
    "StressField",
    "error_eav",
    "error_rms",
    "extract_line",
    "material_nodal_average",
    "polar_stress",
    "polar_vector",
    "read_profile_csv",
    "recover_stress",
    "sample_polyline",
    "von_mises",
    "von_mises_general",
    "write_profile_csv",
]
