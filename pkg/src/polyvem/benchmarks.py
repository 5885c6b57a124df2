"""Analytical verification cases and scripted studies.

* thick-walled cylinder under a radial temperature gradient (closed form),
* convergence studies on that cylinder,
* linear patch tests,
* a bimaterial strip with a copper channel in silicon,
* an inclusion whose mesh is rotated inside its host.
"""
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Dict, List

import numpy as np

from .assembly import (
    AssemblyParams,
    dirichlet,
    neumann,
    solve_elastic,
    solve_thermal,
    solve_thermomechanical,
)
from .errors import ConfigurationError, InvalidDomainError
from .mesh import (
    PolygonDomain,
    annulus_sector_domain,
    combine_meshes,
    generate_polar_quad_mesh,
    generate_polygonal_mesh,
    generate_quad_mesh,
    merge_nonmatching_interface,
    rectangle_domain,
    regular_polygon,
    rotate_region_mesh,
    split_boundary_tag,
)
from .postprocess import (
    error_eav,
    error_rms,
    extract_line,
    polar_stress,
    recover_stress,
    write_profile_csv,
)
from .vem_elastic import PLANE_STRESS, Material, elasticity_matrix

# --------------------------------------------------------------------------
# thick-walled cylinder
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderParams:
    """Geometry (mm), material (MPa, 1/K, W/(m K)) and wall temperatures (K)."""
    r_a: float = 20.0
    r_b: float = 60.0
    E: float = 460000.0
    nu: float = 0.3
    alpha: float = 7.4e-6
    conductivity: float = 20.0
    T_a: float = 0.0
    T_b: float = 500.0

    def __post_init__(self):
        if not 0.0 < self.r_a < self.r_b:
            raise InvalidDomainError("need 0 < r_a < r_b")

    @property
    def material(self):
        return Material(self.E, self.nu, self.alpha, self.conductivity, PLANE_STRESS)

    def coefficients(self):
        """Integration constants D, B1, B2, d1..d6, c1, c2 of the closed form."""
        a, b, nu, al = self.r_a, self.r_b, self.nu, self.alpha
        lnba = math.log(b / a)
        c1 = (self.T_b - self.T_a) / lnba
        c2 = self.T_a - c1 * math.log(a)
        D = al * (1.0 + nu) * (self.T_b - self.T_a) / (2.0 * lnba)
        d1 = 1.0 + nu
        d2 = (nu - 1.0) / a ** 2
        d3 = 1.0 + nu
        d4 = (nu - 1.0) / b ** 2
        d5 = -D * (math.log(a) + 1.0 + nu * math.log(a)) + al * (1.0 + nu) * self.T_a
        d6 = -D * (math.log(b) + 1.0 + nu * math.log(b)) + al * (1.0 + nu) * self.T_b
        det = d1 * d4 - d2 * d3
        B1 = (d4 * d5 - d2 * d6) / det
        B2 = (d1 * d6 - d3 * d5) / det
        return dict(D=D, B1=B1, B2=B2, d1=d1, d2=d2, d3=d3, d4=d4, d5=d5, d6=d6, c1=c1, c2=c2)


def cylinder_exact(r, params=None, rtol=1e-9):
    """Closed-form (T, u_r, sigma_r, sigma_theta) at radii ``r`` under plane stress."""
    p = params or CylinderParams()
    r = np.asarray(r, dtype=float)
    slack = rtol * p.r_b
    if np.any(r < p.r_a - slack) or np.any(r > p.r_b + slack):
        raise InvalidDomainError(f"radius outside [{p.r_a}, {p.r_b}]")
    c = p.coefficients()
    D, B1, B2 = c["D"], c["B1"], c["B2"]
    nu, al = p.nu, p.alpha
    lnr = np.log(r)
    T = p.T_a + (p.T_b - p.T_a) / math.log(p.r_b / p.r_a) * np.log(r / p.r_a)
    u = B1 * r + B2 / r + D * r * lnr
    k = p.E / (1.0 - nu * nu)
    sr = k * (B1 * (1 + nu) + B2 * (nu - 1) / r ** 2 + D * (lnr * (1 + nu) + 1) - al * (1 + nu) * T)
    st = k * (B1 * (1 + nu) + B2 * (1 - nu) / r ** 2 + D * (lnr * (1 + nu) + nu) - al * (1 + nu) * T)
    return T, u, sr, st


def quad_grid_for_nodes(n_nodes, params=None):
    """(nr, ntheta) element counts whose node count is closest to ``n_nodes``
    with near-square cells on a quarter annulus."""
    p = params or CylinderParams()
    ratio = 0.5 * math.pi * 0.5 * (p.r_a + p.r_b) / (p.r_b - p.r_a)
    best = None
    for nr in range(1, int(math.sqrt(n_nodes)) + 2):
        nt = max(1, round(ratio * nr))
        for cand in (nt - 1, nt, nt + 1):
            if cand < 1:
                continue
            err = (abs((nr + 1) * (cand + 1) - n_nodes), abs(cand / nr - ratio))
            if best is None or err < best[0]:
                best = (err, nr, cand)
    return best[1], best[2]


def cylinder_mesh(kind="quad", nodes=5073, params=None, n_seeds=None, seed=0, n_arc=None):
    """Quarter-annulus mesh: structured quads or a Voronoi polygon mesh.

    Boundary tags are ``inner``, ``outer``, ``theta0`` (on the x axis) and
    ``theta1`` (on the y axis).
    """
    p = params or CylinderParams()
    if kind == "quad":
        nr, nt = quad_grid_for_nodes(nodes, p)
        return generate_polar_quad_mesh((p.r_a, p.r_b), (0.0, 0.5 * math.pi), nr, nt)
    if kind == "polygon":
        # a Voronoi mesh with N cells has about 2N vertices
        n_seeds = n_seeds or max(8, nodes // 2)
        n_arc = n_arc or max(16, int(2 * math.sqrt(n_seeds)))
        dom = annulus_sector_domain(p.r_a, p.r_b, 0.0, 0.5 * math.pi, n_arc)
        return generate_polygonal_mesh(dom, n_seeds, seed=seed)
    raise ConfigurationError(f"unknown cylinder mesh kind {kind!r}")


def _cylinder_bcs(p):
    thermal = [dirichlet("thermal", "inner", p.T_a), dirichlet("thermal", "outer", p.T_b)]
    mech = [dirichlet("mechanical", "theta0", (0.0, 0.0), (False, True)),
            dirichlet("mechanical", "theta1", (0.0, 0.0), (True, False))]
    return thermal, mech


@dataclass
class CylinderReport:
    method: str
    mesh_kind: str
    n_nodes: int
    n_elements: int
    eav_r: float
    eav_theta: float
    rms_temperature: float
    rms_stress: float
    rms_displacement: float
    excluded_r: int
    excluded_theta: int
    residual: float
    seconds: float

    def to_dict(self):
        return asdict(self)


def run_cylinder_benchmark(mesh=None, method="vem", params=None, kind="quad", nodes=5073,
                           tau_h=0.5, uniform_order=None, solver=None, zero_rtol=1e-8):
    """Solve the quarter cylinder and compare against the closed form at every node.

    Stresses are the material-averaged nodal values rotated to polar
    components. Nodes where the exact stress is below ``zero_rtol`` times
    its peak are left out of E_AV, and so are the nodes of the traction-free
    inner and outer walls for the radial component.
    """
    p = params or CylinderParams()
    t0 = time.perf_counter()
    if mesh is None:
        mesh = cylinder_mesh(kind, nodes, p)
    mats = {key: p.material for key in {mesh.material_key(e) for e in range(mesh.n_elements)}}
    ap = AssemblyParams(method, tau_h, uniform_order, T_ref=0.0)
    thermal, mech = _cylinder_bcs(p)
    T = solve_thermal(mesh, mats, thermal, ap, solver)
    U = solve_elastic(mesh, mats, mech, ap, T, solver)
    S = recover_stress(U, T, mesh, mats)

    xy = mesh.nodes
    r = np.clip(np.hypot(xy[:, 0], xy[:, 1]), p.r_a, p.r_b)
    Te, ue, sre, ste = cylinder_exact(r, p)
    pol = polar_stress(S.nodal, xy)
    ur = (U.values[:, 0] * xy[:, 0] + U.values[:, 1] * xy[:, 1]) / r
    tol_r = zero_rtol * np.abs(sre).max()
    tol_t = zero_rtol * np.abs(ste).max()
    # sigma_r vanishes on the traction-free walls; nodes there only sample
    # the zero-division guard (or, on chorded arcs, a near-zero exact value)
    walls = np.zeros(mesh.n_nodes, dtype=bool)
    for tag in ("inner", "outer"):
        walls[mesh.boundary_nodes(tag)] = True
    sre_guarded = np.where(walls, 0.0, sre)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        eav_r, ex_r = error_eav(pol[:, 0], sre_guarded, tol_r, return_excluded=True)
        eav_t, ex_t = error_eav(pol[:, 1], ste, tol_t, return_excluded=True)
    rep = CylinderReport(
        method=method,
        mesh_kind=kind,
        n_nodes=mesh.n_nodes,
        n_elements=mesh.n_elements,
        eav_r=eav_r,
        eav_theta=eav_t,
        rms_temperature=error_rms(T.values, Te),
        rms_stress=error_rms(pol[:, :2], np.column_stack([sre, ste])),
        rms_displacement=error_rms(ur, ue),
        excluded_r=ex_r,
        excluded_theta=ex_t,
        residual=max(T.residual, U.residual),
        seconds=time.perf_counter() - t0,
    )
    return rep


@dataclass
class ConvergenceReport:
    method: str
    mesh_kind: str
    n_nodes: List[int]
    ndof_temperature: List[int]
    ndof_displacement: List[int]
    rms_temperature: List[float]
    rms_stress: List[float]
    slope_temperature: float
    slope_stress: float
    monotone: bool
    exact: bool = False

    def to_dict(self):
        return asdict(self)


def convergence_slope(ndof, errors):
    """Magnitude of the least-squares slope of log(error) against log(nDof).

    Returns NaN when every error is at round-off level (nothing to fit).
    """
    e = np.asarray(errors, dtype=float)
    if np.all(e < 1e-12):
        return float("nan")
    k, _ = np.polyfit(np.log(np.asarray(ndof, dtype=float)), np.log(e), 1)
    return float(-k)


def run_convergence(method="vem", levels=4, kind="quad", params=None, base=(7, 11),
                    seeds=(150, 600, 2400, 9600), seed=0, solver=None):
    """Cylinder errors over a refinement sequence.

    Quad levels are nested: level ``k`` has ``base * 2**k`` cells in each
    direction. Polygon levels are independent Voronoi meshes with the given
    seed counts. Temperature nDof counts nodes, displacement nDof twice that.
    """
    if levels < 4:
        raise ConfigurationError("a convergence study needs at least 4 levels")
    p = params or CylinderParams()
    meshes = []
    for k in range(levels):
        if kind == "quad":
            nr, nt = base[0] * 2 ** k, base[1] * 2 ** k
            meshes.append(generate_polar_quad_mesh((p.r_a, p.r_b), (0.0, 0.5 * math.pi), nr, nt))
        elif kind == "polygon":
            if k >= len(seeds):
                raise ConfigurationError("not enough seed counts for the requested levels")
            meshes.append(cylinder_mesh("polygon", params=p, n_seeds=seeds[k], seed=seed))
        else:
            raise ConfigurationError(f"unknown mesh kind {kind!r}")
    reps = [run_cylinder_benchmark(m, method, p, kind, solver=solver) for m in meshes]
    nn = [r.n_nodes for r in reps]
    rt = [r.rms_temperature for r in reps]
    rs = [r.rms_stress for r in reps]
    mono = all(a > b for a, b in zip(rt, rt[1:])) and all(a > b for a, b in zip(rs, rs[1:]))
    return ConvergenceReport(method, kind, nn, nn, [2 * n for n in nn], rt, rs,
                             convergence_slope(nn, rt), convergence_slope([2 * n for n in nn], rs),
                             mono)


# --------------------------------------------------------------------------
# patch tests
# --------------------------------------------------------------------------

# T = a + b x + c y
PATCH_TEMPERATURE = (1.5, 2.0, -0.7)
# u = (a0 + a1 x + a2 y, b0 + b1 x + b2 y)
PATCH_DISPLACEMENT = ((1e-3, 2e-3, -1e-3), (-5e-4, 4e-4, 1.5e-3))
PATCH_MATERIAL = Material(1000.0, 0.3, 0.0, 2.0)


def patch_temperature(xy):
    a, b, c = PATCH_TEMPERATURE
    return a + b * xy[:, 0] + c * xy[:, 1]


def patch_displacement(xy):
    (a0, a1, a2), (b0, b1, b2) = PATCH_DISPLACEMENT
    return np.column_stack([a0 + a1 * xy[:, 0] + a2 * xy[:, 1], b0 + b1 * xy[:, 0] + b2 * xy[:, 1]])


@dataclass
class PatchReport:
    field: str
    method: str
    n_elements: int
    nodal_error: float
    element_error: float

    def passed(self, nodal_tol=1e-9, element_tol=1e-8):
        return self.nodal_error <= nodal_tol and self.element_error <= element_tol


def run_patch_test(mesh, method="vem", field_="thermal", material=PATCH_MATERIAL, uniform_order=None):
    """Impose a linear field on every tagged boundary and measure the error inside.

    ``nodal_error`` is the largest interior nodal error relative to the
    largest exact value; ``element_error`` the largest element gradient
    (thermal) or stress (elastic) error relative to its exact norm.
    """
    mats = {key: material for key in {mesh.material_key(e) for e in range(mesh.n_elements)}}
    params = AssemblyParams(method, uniform_order=uniform_order)
    on_bnd = np.zeros(mesh.n_nodes, dtype=bool)
    for edges in mesh.boundary.values():
        on_bnd[np.unique(edges)] = True
    inner = ~on_bnd
    if field_ == "thermal":
        bcs = [dirichlet("thermal", t, patch_temperature) for t in mesh.boundary]
        sol = solve_thermal(mesh, mats, bcs, params)
        exact = patch_temperature(mesh.nodes)
        grad = np.array(PATCH_TEMPERATURE[1:])
        el = np.linalg.norm(sol.element_field - grad, axis=1).max() / np.linalg.norm(grad)
    elif field_ == "elastic":
        bcs = [dirichlet("mechanical", t, patch_displacement) for t in mesh.boundary]
        sol = solve_elastic(mesh, mats, bcs, params)
        exact = patch_displacement(mesh.nodes)
        (_, a1, a2), (_, b1, b2) = PATCH_DISPLACEMENT
        sig_ex = elasticity_matrix(material) @ np.array([a1, b2, a2 + b1])
        S = recover_stress(sol, None, mesh, mats)
        el = np.linalg.norm(S.element - sig_ex, axis=1).max() / np.linalg.norm(sig_ex)
    else:
        raise ConfigurationError(f"unknown field {field_!r}")
    scale = np.abs(exact).max()
    err = np.abs(sol.values - exact)
    nodal = float(err[inner].max() / scale) if inner.any() else 0.0
    return PatchReport(field_, method, mesh.n_elements, nodal, float(el))


def l_shape_mesh(seed=3):
    """L-shaped domain from a quad block and an independently meshed Voronoi block,
    glued along a non-matching interface."""
    lower = generate_quad_mesh((0.0, 2.0), (0.0, 1.0), 8, 4, region_tag="lower")
    lower = split_boundary_tag(lower, "top", lambda m: m[:, 0] < 1.0, "lower_interface")
    upper = generate_polygonal_mesh(rectangle_domain((0.0, 1.0), (1.0, 2.0)), 12, seed=seed,
                                    region_tag="upper")
    upper = upper.rename_boundary({t: "upper_" + t for t in upper.boundary})
    return merge_nonmatching_interface(lower, upper, "lower_interface", "upper_bottom")


# --------------------------------------------------------------------------
# bimaterial strip: copper channel in silicon
# --------------------------------------------------------------------------

COPPER = Material(155000.0, 0.3, 17e-6, 397.0)
SILICON = Material(140000.0, 0.25, 2.8e-6, 149.0)


@dataclass(frozen=True)
class BimaterialConfig:
    """Strip geometry in mm; the channel is open at the top surface."""
    width: float = 0.05
    height: float = 0.12
    channel_width: float = 0.01
    channel_depth: float = 0.1
    T_top: float = 125.0
    T_bottom: float = 25.0
    T_ref: float = 25.0
    method: str = "sfvem"
    mode: str = "plane-strain"
    refinement: int = 1
    n_samples: int = 201


def bimaterial_mesh(cfg=None):
    """Four structured blocks with mismatched spacing, merged pairwise.

    Boundary tags: ``top``, ``bottom``, ``left``, ``right``. Regions ``Cu``
    and ``Si``.
    """
    cfg = cfg or BimaterialConfig()
    k = int(cfg.refinement)
    hw, cw = 0.5 * cfg.width, 0.5 * cfg.channel_width
    y0 = cfg.height - cfg.channel_depth
    cu = generate_quad_mesh((-cw, cw), (y0, cfg.height), 4 * k, 30 * k, "Cu")
    cu = cu.rename_boundary({"left": "w", "right": "e", "bottom": "cu_bottom"})
    base = generate_quad_mesh((-cw, cw), (0.0, y0), 3 * k, 5 * k, "Si")
    base = base.rename_boundary({"left": "w", "right": "e", "top": "base_top"})
    m = merge_nonmatching_interface(cu, base, "cu_bottom", "base_top")
    left = generate_quad_mesh((-hw, -cw), (0.0, cfg.height), 6 * k, 22 * k, "Si")
    left = left.rename_boundary({"right": "left_iface"})
    m = merge_nonmatching_interface(m, left, "w", "left_iface")
    right = generate_quad_mesh((cw, hw), (0.0, cfg.height), 6 * k, 22 * k, "Si")
    right = right.rename_boundary({"left": "right_iface"})
    return merge_nonmatching_interface(m, right, "e", "right_iface")


@dataclass
class BimaterialReport:
    n_nodes: int
    n_elements: int
    T_min: float
    T_max: float
    heat_in: float
    heat_out: float
    conservation_error: float
    max_von_mises: float
    profile_s: np.ndarray = field(repr=False)
    profile_von_mises: np.ndarray = field(repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("profile_s")
        d.pop("profile_von_mises")
        return d


def interface_path(cfg):
    """Cu/Si interface from the top of the left wall, across the floor, up the right wall."""
    cw = 0.5 * cfg.channel_width
    y0 = cfg.height - cfg.channel_depth
    return np.array([[-cw, cfg.height], [-cw, y0], [cw, y0], [cw, cfg.height]])


def run_bimaterial_demo(cfg=None, csv_path=None, solver=None):
    """Heat the strip from the top, clamp its bottom and report the interface stress."""
    cfg = cfg or BimaterialConfig()
    mesh = bimaterial_mesh(cfg)
    mats = {"Cu": COPPER.with_mode(cfg.mode), "Si": SILICON.with_mode(cfg.mode)}
    params = AssemblyParams(cfg.method, T_ref=cfg.T_ref)
    tb = [dirichlet("thermal", "top", cfg.T_top), dirichlet("thermal", "bottom", cfg.T_bottom)]
    mb = [dirichlet("mechanical", "bottom", (0.0, 0.0))]
    T, U = solve_thermomechanical(mesh, mats, tb, mb, params, solver)
    S = recover_stress(U, T, mesh, mats)
    s, vm = extract_line(mesh, S.element_von_mises(), interface_path(cfg), cfg.n_samples)
    if csv_path is not None:
        write_profile_csv(csv_path, s, vm)
    q_in = float(T.reaction_total(mesh, "top"))
    q_out = float(T.reaction_total(mesh, "bottom"))
    return BimaterialReport(
        n_nodes=mesh.n_nodes,
        n_elements=mesh.n_elements,
        T_min=float(T.values.min()),
        T_max=float(T.values.max()),
        heat_in=q_in,
        heat_out=-q_out,
        conservation_error=abs(q_in + q_out) / abs(q_in),
        max_von_mises=float(S.element_von_mises().max()),
        profile_s=s,
        profile_von_mises=vm,
    )


# --------------------------------------------------------------------------
# rotated inclusion
# --------------------------------------------------------------------------

SILICA = Material(75000.0, 0.17)
COPPER_VIA = Material(150000.0, 0.3)


@dataclass(frozen=True)
class RotationConfig:
    side: float = 1.0
    radius: float = 0.2
    n_sides: int = 24
    host_seeds: int = 400
    inclusion_seeds: int = 120
    traction: float = 2.0
    method: str = "sfvem"
    n_samples: int = 121
    seed: int = 0


def inclusion_assembly(cfg=None):
    """Unmerged host square with a polygonal hole plus the inclusion mesh filling it."""
    cfg = cfg or RotationConfig()
    c = 0.5 * cfg.side
    ring = regular_polygon((c, c), cfg.radius, cfg.n_sides)
    square = [[0, 0], [cfg.side, 0], [cfg.side, cfg.side], [0, cfg.side]]
    host = generate_polygonal_mesh(
        PolygonDomain(square, [ring], ["bottom", "right", "top", "left"], ["host_interface"]),
        cfg.host_seeds, seed=cfg.seed, region_tag="SiO2")
    inc = generate_polygonal_mesh(PolygonDomain(ring, outer_tags=["inclusion_interface"] * cfg.n_sides),
                                  cfg.inclusion_seeds, seed=cfg.seed + 1, region_tag="Cu")
    return combine_meshes(inc, host)


def rotated_inclusion_mesh(angle_deg, cfg=None, assembly=None):
    cfg = cfg or RotationConfig()
    assembly = assembly if assembly is not None else inclusion_assembly(cfg)
    c = 0.5 * cfg.side
    return rotate_region_mesh(assembly, "Cu", math.radians(angle_deg), (c, c),
                              ("inclusion_interface", "host_interface"))


def arc_path(cfg):
    """Upper half of the inclusion boundary, from angle 0 to 180 degrees."""
    c = 0.5 * cfg.side
    k = np.arange(cfg.n_sides // 2 + 1)
    ang = 2.0 * np.pi * k / cfg.n_sides
    return np.column_stack([c + cfg.radius * np.cos(ang), c + cfg.radius * np.sin(ang)])


@dataclass
class RotationReport:
    angles: List[float]
    n_elements: List[int]
    max_deviation: float
    pairwise: Dict[str, float]
    profile_s: np.ndarray = field(repr=False)
    profiles: Dict[float, np.ndarray] = field(repr=False)

    def to_dict(self):
        return {"angles": self.angles, "n_elements": self.n_elements,
                "max_deviation": self.max_deviation, "pairwise": self.pairwise}


def profile_deviation(p, q):
    """Largest pointwise difference relative to the larger profile peak."""
    p, q = np.asarray(p), np.asarray(q)
    return float(np.abs(p - q).max() / max(np.abs(p).max(), np.abs(q).max()))


def run_rotation_study(angles=(0.0, 30.0, 60.0, 90.0), cfg=None, solver=None):
    """von Mises stress along the inclusion arc for each rotation of the inclusion mesh."""
    cfg = cfg or RotationConfig()
    assembly = inclusion_assembly(cfg)
    mats = {"SiO2": SILICA, "Cu": COPPER_VIA}
    params = AssemblyParams(cfg.method)
    bcs = [dirichlet("mechanical", "bottom", (0.0, 0.0)),
           neumann("mechanical", "top", (0.0, cfg.traction))]
    profiles, counts, s = {}, [], None
    for a in angles:
        mesh = rotated_inclusion_mesh(a, cfg, assembly)
        U = solve_elastic(mesh, mats, bcs, params, solver=solver)
        S = recover_stress(U, None, mesh, mats)
        s, vm = extract_line(mesh, S.element_von_mises(), arc_path(cfg), cfg.n_samples)
        profiles[float(a)] = vm
        counts.append(mesh.n_elements)
    pair = {}
    keys = list(profiles)
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            pair[f"{keys[i]:g}-{keys[j]:g}"] = profile_deviation(profiles[keys[i]], profiles[keys[j]])
    return RotationReport([float(a) for a in angles], counts, max(pair.values(), default=0.0),
                          pair, s, profiles)


def run_linear_convergence(method="vem", levels=4, base=2):
    """Refinement study with a linear exact solution on nested unit-square meshes.

    Both fields are reproduced to round-off on every level, so the slopes are
    undefined (NaN) and the report is flagged ``exact``.
    """
    if levels < 4:
        raise ConfigurationError("a convergence study needs at least 4 levels")
    nn, rt, rs = [], [], []
    for k in range(levels):
        n = base * 2 ** k
        mesh = generate_quad_mesh((0.0, 1.0), (0.0, 1.0), n, n)
        mats = {"domain": PATCH_MATERIAL}
        params = AssemblyParams(method)
        T = solve_thermal(mesh, mats, [dirichlet("thermal", t, patch_temperature) for t in mesh.boundary],
                          params)
        U = solve_elastic(mesh, mats, [dirichlet("mechanical", t, patch_displacement)
                                       for t in mesh.boundary], params)
        S = recover_stress(U, None, mesh, mats)
        (_, a1, a2), (_, b1, b2) = PATCH_DISPLACEMENT
        sig = elasticity_matrix(PATCH_MATERIAL) @ np.array([a1, b2, a2 + b1])
        nn.append(mesh.n_nodes)
        rt.append(error_rms(T.values, patch_temperature(mesh.nodes)))
        rs.append(error_rms(S.nodal, np.tile(sig, (mesh.n_nodes, 1))))
    exact = max(rt + rs) < 1e-12
    st = convergence_slope(nn, rt)
    ss = convergence_slope([2 * n for n in nn], rs)
    return ConvergenceReport(method, "quad", nn, nn, [2 * n for n in nn], rt, rs, st, ss,
                             monotone=False, exact=exact)
