"""Global assembly, boundary conditions, linear solves and the one-way
thermal-to-mechanical pipeline."""
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._kernels import scatter_coo
from .errors import ConfigurationError, SolverError
from .mesh import ElementGeometry
from .quadrature import edge_rule
from .sfvem import (
    gradient_projection_scalar,
    select_order,
    select_order_vector,
    sfvem_elastic_stiffness,
    sfvem_thermal_force,
    sfvem_thermal_stiffness,
)
from .vem_elastic import elastic_stiffness, elasticity_matrix, thermal_force, vector_projection
from .vem_thermal import DEFAULT_TAU, scalar_projection, thermal_stiffness

METHODS = ("vem", "sfvem")
FIELDS = ("thermal", "mechanical")
DIRECT_LIMIT = 200_000

Value = Union[float, Sequence[float], Callable]


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet or Neumann data on one tagged boundary.

    ``value`` is a scalar for the thermal field (temperature in K, or outward
    heat flux) and a 2-vector for the mechanical field (displacement in mm,
    or traction in MPa). A callable ``value(xy)`` evaluated at node or
    quadrature coordinates (shape (m, 2)) is accepted as well.
    ``component_mask`` selects which displacement components a mechanical
    Dirichlet condition fixes.
    """
    kind: str
    field: str
    target: str
    value: Value = 0.0
    component_mask: tuple = (True, True)

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann"):
            raise ConfigurationError(f"unknown boundary condition kind {self.kind!r}")
        if self.field not in FIELDS:
            raise ConfigurationError(f"unknown boundary condition field {self.field!r}")
        mask = tuple(bool(m) for m in self.component_mask)
        if len(mask) != 2 or not any(mask):
            raise ConfigurationError("component_mask needs two flags, at least one set")
        object.__setattr__(self, "component_mask", mask)

    def evaluate(self, xy):
        """Values at points: (m,) for thermal, (m, 2) for mechanical."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        m = xy.shape[0]
        if callable(self.value):
            v = np.asarray(self.value(xy), dtype=float)
        else:
            v = np.asarray(self.value, dtype=float)
        if self.field == "thermal":
            if v.ndim == 0:
                v = np.full(m, float(v))
            if v.shape != (m,):
                raise ConfigurationError(f"thermal value for {self.target!r} must be scalar")
            return v
        if v.ndim == 0:
            v = np.full((m, 2), float(v))
        elif v.shape == (2,):
            v = np.tile(v, (m, 1))
        if v.shape != (m, 2):
            raise ConfigurationError(f"mechanical value for {self.target!r} must be a 2-vector")
        return v


def dirichlet(field_, target, value, component_mask=(True, True)):
    return BoundaryCondition("dirichlet", field_, target, value, component_mask)


def neumann(field_, target, value):
    return BoundaryCondition("neumann", field_, target, value)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: Optional[int] = None
    method: str = "auto"  # auto | direct | cg
    direct_limit: int = DIRECT_LIMIT

    def __post_init__(self):
        if self.method not in ("auto", "direct", "cg"):
            raise ConfigurationError(f"unknown solver method {self.method!r}")
        if not self.tol > 0.0:
            raise ConfigurationError("solver tolerance must be positive")


@dataclass(frozen=True)
class AssemblyParams:
    """Discretization choices shared by the thermal and mechanical stages.

    ``tau_h`` only enters the classical method; ``uniform_order`` forces one
    projection order on every element of the stabilization-free method.
    """
    method: str = "vem"
    tau_h: float = DEFAULT_TAU
    uniform_order: Optional[int] = None
    T_ref: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.tau_h > 0.0:
            raise ConfigurationError("tau_h must be positive")
        if self.uniform_order is not None and self.uniform_order < 1:
            raise ConfigurationError("uniform_order must be at least 1")


@dataclass(eq=False)
class LinearSystem:
    """Assembled global system ``K u = F`` plus per-element recovery data.

    ``recovery[e]`` maps element DOFs to the field's constant part at the
    centroid: the gradient (2, k) for temperature, the Voigt strain (3, k)
    for displacement. ``coefficients[e]`` maps them to the full polynomial
    coefficients of the projection used by the method.
    """
    K: sp.csr_matrix
    F: np.ndarray
    field: str
    dofs_per_node: int
    element_dofs: List[np.ndarray]
    recovery: List[np.ndarray]
    coefficients: List[np.ndarray]
    orders: Optional[np.ndarray] = None

    @property
    def n_dofs(self):
        return self.F.shape[0]


@dataclass(frozen=True, eq=False)
class FieldSolution:
    """Nodal field plus projected per-element quantities.

    ``values`` has shape (n_nodes,) for temperature and (n_nodes, 2) for
    displacement. ``element_field`` holds the projected gradient (n_el, 2)
    or strain (n_el, 3) at element centroids; ``element_centroid_values``
    holds the projected temperature at the centroids (temperature only).
    ``reactions`` are ``K u - F`` at constrained DOFs and zero elsewhere.
    """
    kind: str
    values: np.ndarray
    element_field: np.ndarray
    element_coefficients: List[np.ndarray]
    metadata: Dict[str, object]
    reactions: np.ndarray
    residual: float
    element_centroid_values: Optional[np.ndarray] = None

    @property
    def dof_vector(self):
        return self.values.reshape(-1)

    @property
    def mesh_hash(self):
        return self.metadata["mesh_hash"]

    def reaction_total(self, mesh, tag):
        """Summed reaction (heat or force) over the nodes of a boundary tag."""
        nodes = mesh.boundary_nodes(tag)
        return self.reactions[nodes].sum(axis=0)


# --------------------------------------------------------------------------
# element loop
# --------------------------------------------------------------------------

def _material_for(mesh, materials, eid):
    key = mesh.material_key(eid)
    try:
        return materials[key]
    except KeyError:
        raise ConfigurationError(
            f"no material for region {mesh.regions[eid]!r} (key {key!r})") from None


def _check_materials(mesh, materials):
    missing = sorted({mesh.material_key(e) for e in range(mesh.n_elements)} - set(materials))
    if missing:
        raise ConfigurationError(f"no material given for {missing}")


def _element_order(n_v, params, vector):
    if params.uniform_order is not None:
        return params.uniform_order
    return select_order_vector(n_v) if vector else select_order(n_v)


def _thermal_element(mesh, e, mat, params, geom):
    xy = mesh.element_coords(e)
    sk = scalar_projection(xy, mat.conductivity, geom)
    if params.method == "vem":
        K = thermal_stiffness(sk, params.tau_h)
        return K, sk.gradient_operator(), sk.Pi_star, 0
    l = _element_order(len(xy), params, vector=False)
    gk = gradient_projection_scalar(xy, l, base_projection=sk, geometry=geom)
    K = sfvem_thermal_stiffness(gk, mat.conductivity)
    cx, cy = geom.centroid
    grad = gk.gradient_operator(np.array([cx]), np.array([cy]))[0]
    return K, grad, gk.Pi_m, l


def _elastic_element(mesh, e, mat, params, geom, dT_e):
    xy = mesh.element_coords(e)
    Dmat = elasticity_matrix(mat)
    sk = scalar_projection(xy, 1.0, geom)
    n = len(xy)
    if params.method == "vem":
        vk = vector_projection(xy, Dmat, geom)
        K = elastic_stiffness(vk, params.tau_h)
        f = None
        if dT_e is not None and mat.alpha != 0.0:
            f = thermal_force(vk, dT_e, mat, sk)
        return K, f, vk.strain_operator(), vk.Pi_star, 0
    l = _element_order(n, params, vector=True)
    gk = gradient_projection_scalar(xy, l, base_projection=sk, geometry=geom)
    K = sfvem_elastic_stiffness(gk, Dmat)
    f = None
    if dT_e is not None and mat.alpha != 0.0:
        f = sfvem_thermal_force(gk, Dmat, dT_e, mat)
    cx, cy = geom.centroid
    strain = gk.strain_operator(np.array([cx]), np.array([cy]))[0]
    return K, f, strain, gk.Pi_vector, l


def _global_matrix(n_dofs, element_dofs, element_mats):
    lengths = np.array([len(d) for d in element_dofs], dtype=np.int64)
    dof_off = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=dof_off[1:])
    val_off = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths * lengths, out=val_off[1:])
    dofs = np.concatenate(element_dofs).astype(np.int64)
    vals = np.concatenate([np.ascontiguousarray(K).ravel() for K in element_mats])
    rows, cols, v = scatter_coo(dofs, dof_off, vals, val_off)
    K = sp.coo_matrix((v, (rows, cols)), shape=(n_dofs, n_dofs)).tocsr()
    K.sum_duplicates()
    # exact symmetry; summation order of duplicates is fixed by the COO order
    return ((K + K.T) * 0.5).tocsr()


def _edge_load(mesh, bc, dofs_per_node):
    """Consistent nodal loads of a Neumann condition (2-point Gauss per edge)."""
    F = np.zeros((mesh.n_nodes, dofs_per_node))
    sign = -1.0 if bc.field == "thermal" else 1.0
    for i, j in mesh.boundary[bc.target]:
        a, b = mesh.nodes[i], mesh.nodes[j]
        rule = edge_rule(a, b, 2)
        vals = bc.evaluate(rule.points).reshape(len(rule.weights), -1)
        t = rule.params
        F[i] += sign * ((rule.weights * (1.0 - t)) @ vals)
        F[j] += sign * ((rule.weights * t) @ vals)
    return F.reshape(-1)


def _check_bcs(mesh, bcs, field_):
    dir_tags, neu_tags = set(), set()
    for bc in bcs:
        if bc.field != field_:
            continue
        if bc.target not in mesh.boundary:
            raise ConfigurationError(f"boundary tag {bc.target!r} does not exist in the mesh")
        (dir_tags if bc.kind == "dirichlet" else neu_tags).add(bc.target)
    both = dir_tags & neu_tags
    if both:
        raise ConfigurationError(f"tags {sorted(both)} carry both Dirichlet and Neumann data")


def assemble(mesh, materials, field_="thermal", params=None, bcs=(), temperature=None):
    """Assemble the global stiffness and load of one field.

    ``field_`` is ``"thermal"`` or ``"elastic"``. For the elastic field a
    nodal ``temperature`` array (K) adds thermal-strain forces relative to
    ``params.T_ref``. Neumann data from ``bcs`` enter the load vector.
    """
    params = params or AssemblyParams()
    if field_ == "mechanical":
        field_ = "elastic"
    if field_ not in ("thermal", "elastic"):
        raise ConfigurationError(f"unknown field {field_!r}")
    _check_materials(mesh, materials)
    bc_field = "thermal" if field_ == "thermal" else "mechanical"
    _check_bcs(mesh, bcs, bc_field)

    areas, cents, diams = mesh.geometry
    dpn = 1 if field_ == "thermal" else 2
    n_dofs = dpn * mesh.n_nodes
    F = np.zeros(n_dofs)
    dT = None
    if field_ == "elastic" and temperature is not None:
        temperature = np.asarray(temperature, dtype=float)
        if temperature.shape != (mesh.n_nodes,):
            raise ConfigurationError("temperature must hold one value per node")
        dT = temperature - params.T_ref

    element_dofs, mats, recovery, coeffs = [], [], [], []
    orders = np.zeros(mesh.n_elements, dtype=np.int64)
    for e in range(mesh.n_elements):
        v = mesh.elements[e]
        geom = ElementGeometry(float(areas[e]), (float(cents[e, 0]), float(cents[e, 1])), float(diams[e]))
        mat = _material_for(mesh, materials, e)
        if field_ == "thermal":
            K, rec, co, l = _thermal_element(mesh, e, mat, params, geom)
            dofs = v
        else:
            K, f, rec, co, l = _elastic_element(mesh, e, mat, params, geom,
                                                None if dT is None else dT[v])
            dofs = np.column_stack([2 * v, 2 * v + 1]).ravel()
            if f is not None:
                np.add.at(F, dofs, f)
        element_dofs.append(dofs)
        mats.append(K)
        recovery.append(rec)
        coeffs.append(co)
        orders[e] = l

    K = _global_matrix(n_dofs, element_dofs, mats)
    for bc in bcs:
        if bc.field == bc_field and bc.kind == "neumann":
            F += _edge_load(mesh, bc, dpn)
    return LinearSystem(K, F, field_, dpn, element_dofs, recovery, coeffs,
                        orders if params.method == "sfvem" else None)


# --------------------------------------------------------------------------
# constraints and solve
# --------------------------------------------------------------------------

def dirichlet_values(mesh, bcs, field_):
    """Map of constrained DOF -> prescribed value, checking for conflicts."""
    dpn = 1 if field_ == "thermal" else 2
    fixed: Dict[int, float] = {}
    for bc in bcs:
        if bc.field != field_ or bc.kind != "dirichlet":
            continue
        if bc.target not in mesh.boundary:
            raise ConfigurationError(f"boundary tag {bc.target!r} does not exist in the mesh")
        nodes = mesh.boundary_nodes(bc.target)
        vals = bc.evaluate(mesh.nodes[nodes]).reshape(len(nodes), -1)
        for c in range(dpn):
            if dpn == 2 and not bc.component_mask[c]:
                continue
            for node, val in zip(nodes, vals[:, c]):
                dof = int(node) * dpn + c
                val = float(val)
                old = fixed.get(dof)
                if old is not None and abs(old - val) > 1e-12 * max(1.0, abs(old), abs(val)):
                    raise ConfigurationError(
                        f"conflicting Dirichlet values {old} and {val} on node {int(node)}")
                fixed[dof] = val
    return fixed


@dataclass(eq=False)
class ReducedSystem:
    A: sp.csr_matrix
    b: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    n_dofs: int

    def expand(self, x_free):
        u = np.empty(self.n_dofs)
        u[self.free] = x_free
        u[self.fixed] = self.fixed_values
        return u


def apply_dirichlet(K, F, fixed):
    """Eliminate constrained DOFs; their columns move to the right-hand side."""
    n = F.shape[0]
    fixed_idx = np.array(sorted(fixed), dtype=np.int64)
    fixed_val = np.array([fixed[i] for i in fixed_idx], dtype=float)
    if fixed_idx.size and (fixed_idx.min() < 0 or fixed_idx.max() >= n):
        raise ConfigurationError("Dirichlet DOF outside the system")
    mask = np.ones(n, dtype=bool)
    mask[fixed_idx] = False
    free = np.flatnonzero(mask)
    K = sp.csr_matrix(K)
    A = K[free][:, free].tocsr()
    b = F[free] - K[free][:, fixed_idx] @ fixed_val
    return ReducedSystem(A, b, free, fixed_idx, fixed_val, n)


def solve_linear(A, b, config=None):
    """Solve the SPD system ``A x = b``; returns ``(x, relative residual)``."""
    config = config or SolverConfig()
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if n == 0:
        return np.zeros(0), 0.0
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros(n), 0.0
    A = sp.csr_matrix(A)
    use_direct = config.method == "direct" or (config.method == "auto" and n < config.direct_limit)
    if use_direct:
        x = spla.spsolve(A.tocsc(), b)
        if not np.all(np.isfinite(x)):
            raise SolverError("direct factorization failed (singular system?)", np.inf)
    else:
        d = A.diagonal()
        if np.any(d <= 0.0):
            raise SolverError("non-positive diagonal; system is not SPD", np.inf)
        M = spla.LinearOperator((n, n), matvec=lambda r: r / d, dtype=float)
        maxiter = config.max_iter or 10 * n
        x, info = spla.cg(A, b, rtol=config.tol, atol=0.0, maxiter=maxiter, M=M)
        if info != 0:
            res = np.linalg.norm(A @ x - b) / nb
            raise SolverError(f"conjugate gradient did not converge in {maxiter} iterations "
                              f"(relative residual {res:.3e})", res)
    res = float(np.linalg.norm(A @ x - b) / nb)
    if res > config.tol:
        raise SolverError(f"relative residual {res:.3e} exceeds tolerance {config.tol:g}", res)
    return x, res


# --------------------------------------------------------------------------
# pipelines
# --------------------------------------------------------------------------

def _metadata(mesh, params, system, field_):
    meta = {"mesh_hash": mesh.content_hash(), "method": params.method, "field": field_}
    if params.method == "vem":
        meta["tau_h"] = params.tau_h
    else:
        orders = system.orders
        meta["l"] = int(params.uniform_order) if params.uniform_order is not None else sorted(
            int(x) for x in np.unique(orders))
    return meta


def _solve_system(mesh, system, bcs, bc_field, solver):
    fixed = dirichlet_values(mesh, bcs, bc_field)
    red = apply_dirichlet(system.K, system.F, fixed)
    x, res = solve_linear(red.A, red.b, solver)
    u = red.expand(x)
    reactions = np.zeros_like(u)
    if red.fixed.size:
        reactions[red.fixed] = (system.K[red.fixed] @ u) - system.F[red.fixed]
    return u, reactions, res


def solve_thermal(mesh, materials, bcs, params=None, solver=None):
    """Steady heat conduction; returns a temperature :class:`FieldSolution`."""
    params = params or AssemblyParams()
    system = assemble(mesh, materials, "thermal", params, bcs)
    T, reactions, res = _solve_system(mesh, system, bcs, "thermal", solver)
    grads = np.array([R @ T[d] for R, d in zip(system.recovery, system.element_dofs)])
    coeffs = [C @ T[d] for C, d in zip(system.coefficients, system.element_dofs)]
    # energy projection at the centroid: the constant monomial coefficient
    cvals = np.empty(mesh.n_elements)
    for e, d in enumerate(system.element_dofs):
        xy = mesh.element_coords(e)
        cvals[e] = scalar_projection(xy).Pi_star[0] @ T[d]
    meta = _metadata(mesh, params, system, "thermal")
    return FieldSolution("temperature", T, grads.reshape(-1, 2), coeffs, meta, reactions, res, cvals)


def solve_elastic(mesh, materials, bcs, params=None, temperature=None, solver=None):
    """Linear elasticity, optionally loaded by a temperature field.

    ``temperature`` may be a nodal array or a temperature :class:`FieldSolution`.
    """
    params = params or AssemblyParams()
    if isinstance(temperature, FieldSolution):
        if temperature.kind != "temperature":
            raise ConfigurationError("temperature solution expected")
        temperature = temperature.values
    system = assemble(mesh, materials, "elastic", params, bcs, temperature)
    u, reactions, res = _solve_system(mesh, system, bcs, "mechanical", solver)
    strains = np.array([R @ u[d] for R, d in zip(system.recovery, system.element_dofs)])
    coeffs = [C @ u[d] for C, d in zip(system.coefficients, system.element_dofs)]
    meta = _metadata(mesh, params, system, "elastic")
    meta["T_ref"] = params.T_ref
    meta["thermal_load"] = temperature is not None
    return FieldSolution("displacement", u.reshape(-1, 2), strains.reshape(-1, 3), coeffs, meta,
                         reactions.reshape(-1, 2), res)


def solve_thermomechanical(mesh, materials, thermal_bcs, mech_bcs, params=None, solver=None):
    """One-way coupling: solve temperature, then load the mechanical problem with it."""
    params = params or AssemblyParams()
    _check_bcs(mesh, thermal_bcs, "thermal")
    _check_bcs(mesh, mech_bcs, "mechanical")
    T = solve_thermal(mesh, materials, thermal_bcs, params, solver)
    U = solve_elastic(mesh, materials, mech_bcs, params, T, solver)
    return T, U


__all__ = [
    "AssemblyParams",
    "BoundaryCondition",
    "FieldSolution",
    "LinearSystem",
    "ReducedSystem",
    "SolverConfig",
    "apply_dirichlet",
    "assemble",
    "dirichlet",
    "dirichlet_values",
    "neumann",
    "solve_elastic",
    "solve_linear",
    "solve_thermal",
    "solve_thermomechanical",
]
