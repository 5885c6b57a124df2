"""Mesh JSON, VTK legacy output, run configuration and run manifests."""
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from ._accel import backend_name
from .assembly import AssemblyParams, BoundaryCondition, SolverConfig
from .errors import ConfigurationError
from .mesh import (
    PolygonalMesh,
    PolygonDomain,
    generate_polar_quad_mesh,
    generate_polygonal_mesh,
    generate_quad_mesh,
)
from .vem_elastic import MODES, PLANE_STRESS, Material

UNITS = {"length": "mm", "stress": "MPa", "temperature": "K", "conductivity": "W/(m K)",
         "force": "N"}

# --------------------------------------------------------------------------
# mesh JSON
# --------------------------------------------------------------------------

_MESH_KEYS = {"nodes", "elements", "boundary", "region_materials"}


def mesh_to_dict(mesh):
    return {
        "nodes": mesh.nodes.tolist(),
        "elements": [{"v": [int(i) for i in v], "region": r} for v, r in zip(mesh.elements, mesh.regions)],
        "boundary": {t: e.tolist() for t, e in sorted(mesh.boundary.items())},
        "region_materials": dict(sorted(mesh.region_materials.items())),
    }


def mesh_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigurationError("mesh document must be a JSON object")
    unknown = set(data) - _MESH_KEYS
    if unknown:
        raise ConfigurationError(f"unknown mesh keys {sorted(unknown)}")
    for key in ("nodes", "elements"):
        if key not in data:
            raise ConfigurationError(f"mesh document lacks {key!r}")
    elems, regions = [], []
    for k, el in enumerate(data["elements"]):
        if not isinstance(el, dict) or set(el) - {"v", "region"} or "v" not in el:
            raise ConfigurationError(f"element {k} must be an object with keys 'v' and 'region'")
        elems.append(el["v"])
        regions.append(el.get("region", "domain"))
    mesh = PolygonalMesh(np.asarray(data["nodes"], dtype=float), elems, regions,
                         data.get("boundary", {}), data.get("region_materials", {}))
    return mesh.validate()


def write_mesh_json(path, mesh):
    with open(path, "w") as fh:
        json.dump(mesh_to_dict(mesh), fh, indent=1)
        fh.write("\n")


def read_mesh_json(path):
    with open(path) as fh:
        return mesh_from_dict(json.load(fh))


# --------------------------------------------------------------------------
# VTK legacy ASCII
# --------------------------------------------------------------------------

VTK_POLYGON = 7


def _fmt(x):
    return f"{float(x):.17g}"


def vtk_string(mesh, point_data=None, cell_data=None, title="polyvem output"):
    """VTK legacy 2.0 ASCII document of a polygon mesh.

    ``point_data``/``cell_data`` map names to arrays of shape (n,) written as
    SCALARS or (n, 2)/(n, 3) written as VECTORS (2-vectors get z = 0).
    Fields are written in sorted name order so output is deterministic.
    """
    point_data = point_data or {}
    cell_data = cell_data or {}
    lines = ["# vtk DataFile Version 2.0", title.replace("\n", " ")[:255], "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {mesh.n_nodes} double"]
    for x, y in mesh.nodes:
        lines.append(f"{_fmt(x)} {_fmt(y)} 0")
    size = sum(len(v) + 1 for v in mesh.elements)
    lines.append(f"CELLS {mesh.n_elements} {size}")
    for v in mesh.elements:
        lines.append(" ".join([str(len(v))] + [str(int(i)) for i in v]))
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines.extend([str(VTK_POLYGON)] * mesh.n_elements)

    def block(header, n, data):
        if not data:
            return
        lines.append(f"{header} {n}")
        for name in sorted(data):
            arr = np.asarray(data[name], dtype=float)
            if arr.shape[0] != n:
                raise ValueError(f"field {name!r} has {arr.shape[0]} entries, expected {n}")
            safe = name.replace(" ", "_")
            if arr.ndim == 1:
                lines.append(f"SCALARS {safe} double 1")
                lines.append("LOOKUP_TABLE default")
                lines.extend(_fmt(a) for a in arr)
            elif arr.ndim == 2 and arr.shape[1] in (2, 3):
                lines.append(f"VECTORS {safe} double")
                for row in arr:
                    z = row[2] if len(row) == 3 else 0.0
                    lines.append(f"{_fmt(row[0])} {_fmt(row[1])} {_fmt(z)}")
            else:
                raise ValueError(f"field {name!r} must be scalar or a 2/3-vector")

    block("POINT_DATA", mesh.n_nodes, point_data)
    block("CELL_DATA", mesh.n_elements, cell_data)
    return "\n".join(lines) + "\n"


def write_vtk(path, mesh, point_data=None, cell_data=None, title="polyvem output"):
    text = vtk_string(mesh, point_data, cell_data, title)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def read_vtk_counts(path):
    """(n_points, n_cells) declared in a legacy VTK file."""
    npts = ncells = None
    with open(path) as fh:
        for line in fh:
            if line.startswith("POINTS"):
                npts = int(line.split()[1])
            elif line.startswith("CELLS"):
                ncells = int(line.split()[1])
    return npts, ncells


# --------------------------------------------------------------------------
# run configuration
# --------------------------------------------------------------------------

_MATERIAL_KEYS = {"E", "nu", "alpha", "conductivity"}
_BC_KEYS = {"kind", "field", "target", "value", "mask"}
_GENERATORS = {
    "quad": {"type", "x_range", "y_range", "nx", "ny", "region"},
    "polar": {"type", "r_range", "theta_range", "nr", "ntheta", "region"},
    "polygon": {"type", "outer", "outer_tags", "holes", "hole_tags", "n_seeds", "seed",
                "lloyd_iterations", "region"},
}


@dataclass
class RunConfig:
    """Validated run description.

    Defaults: ``method="vem"``, ``tau_h=0.5``, ``mode="plane-stress"``,
    ``T_ref=0``, ``solver_tol=1e-10``. Exactly one of ``mesh`` (path to a
    mesh JSON file, relative to the config file) and ``mesh_generator`` must
    be set.
    """
    method: str = "vem"
    tau_h: float = 0.5
    uniform_order: Optional[int] = None
    mode: str = PLANE_STRESS
    T_ref: float = 0.0
    solver_tol: float = 1e-10
    materials: Dict[str, Dict[str, float]] = field(default_factory=dict)
    regions: Dict[str, str] = field(default_factory=dict)
    bcs: List[Dict[str, Any]] = field(default_factory=list)
    mesh: Optional[str] = None
    mesh_generator: Optional[Dict[str, Any]] = None
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.method not in ("vem", "sfvem"):
            raise ConfigurationError(f"method must be 'vem' or 'sfvem', got {self.method!r}")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}")
        if not float(self.tau_h) > 0.0:
            raise ConfigurationError("tau_h must be positive")
        if self.uniform_order is not None and (int(self.uniform_order) != self.uniform_order
                                               or self.uniform_order < 1):
            raise ConfigurationError("uniform_order must be a positive integer")
        if not float(self.solver_tol) > 0.0:
            raise ConfigurationError("solver_tol must be positive")
        if (self.mesh is None) == (self.mesh_generator is None):
            raise ConfigurationError("give exactly one of 'mesh' and 'mesh_generator'")
        for name, props in self.materials.items():
            if not isinstance(props, dict):
                raise ConfigurationError(f"material {name!r} must be an object")
            unknown = set(props) - _MATERIAL_KEYS
            if unknown:
                raise ConfigurationError(f"unknown keys {sorted(unknown)} in material {name!r}")
            if "E" not in props or "nu" not in props:
                raise ConfigurationError(f"material {name!r} needs E and nu")
        for k, bc in enumerate(self.bcs):
            if not isinstance(bc, dict):
                raise ConfigurationError(f"boundary condition {k} must be an object")
            unknown = set(bc) - _BC_KEYS
            if unknown:
                raise ConfigurationError(f"unknown keys {sorted(unknown)} in boundary condition {k}")
            for key in ("kind", "field", "target"):
                if key not in bc:
                    raise ConfigurationError(f"boundary condition {k} lacks {key!r}")
        if self.mesh_generator is not None:
            g = self.mesh_generator
            kind = g.get("type")
            if kind not in _GENERATORS:
                raise ConfigurationError(f"mesh_generator type must be one of {sorted(_GENERATORS)}")
            unknown = set(g) - _GENERATORS[kind]
            if unknown:
                raise ConfigurationError(f"unknown keys {sorted(unknown)} in mesh_generator")
        return self

    # -- (de)serialisation ----------------------------------------------

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def config_hash(self):
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    # -- domain objects ---------------------------------------------------

    def material_objects(self):
        return {name: Material(float(p["E"]), float(p["nu"]), float(p.get("alpha", 0.0)),
                               float(p.get("conductivity", 1.0)), self.mode)
                for name, p in self.materials.items()}

    def boundary_conditions(self, field_=None):
        out = []
        for bc in self.bcs:
            if field_ is not None and bc["field"] != field_:
                continue
            value = bc.get("value", 0.0)
            if isinstance(value, list):
                value = tuple(float(v) for v in value)
            out.append(BoundaryCondition(bc["kind"], bc["field"], bc["target"], value,
                                         tuple(bc.get("mask", (True, True)))))
        return out

    def assembly_params(self):
        return AssemblyParams(self.method, float(self.tau_h),
                              None if self.uniform_order is None else int(self.uniform_order),
                              float(self.T_ref))

    def solver_config(self):
        return SolverConfig(tol=float(self.solver_tol))

    def build_mesh(self, base_dir="."):
        if self.mesh is not None:
            path = self.mesh if os.path.isabs(self.mesh) else os.path.join(base_dir, self.mesh)
            mesh = read_mesh_json(path)
        else:
            g = dict(self.mesh_generator)
            kind = g.pop("type")
            region = g.pop("region", "domain")
            if kind == "quad":
                mesh = generate_quad_mesh(g["x_range"], g["y_range"], g["nx"], g["ny"], region)
            elif kind == "polar":
                mesh = generate_polar_quad_mesh(g["r_range"], g["theta_range"], g["nr"],
                                                g["ntheta"], region)
            else:
                dom = PolygonDomain(g["outer"], g.get("holes", []), g.get("outer_tags"),
                                    g.get("hole_tags"))
                mesh = generate_polygonal_mesh(dom, g["n_seeds"], g.get("lloyd_iterations", 5),
                                               g.get("seed", 0), region)
        if self.regions:
            mesh = mesh.with_region_materials(self.regions)
        return mesh


def load_config(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(data)


def save_config(path, config):
    with open(path, "w") as fh:
        fh.write(config.to_json())
        fh.write("\n")


def manifest(config, mesh, extra=None):
    data = {
        "config_hash": config.config_hash() if config is not None else None,
        "mesh_hash": mesh.content_hash() if mesh is not None else None,
        "method": config.method if config is not None else None,
        "version": __version__,
        "backend": backend_name(),
        "units": UNITS,
    }
    if extra:
        data.update(extra)
    return data


def write_json(path, data):
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"cannot serialise {type(o).__name__}")

    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True, default=default)
        fh.write("\n")


__all__ = [
    "RunConfig",
    "UNITS",
    "load_config",
    "manifest",
    "mesh_from_dict",
    "mesh_to_dict",
    "read_mesh_json",
    "read_vtk_counts",
    "save_config",
    "vtk_string",
    "write_json",
    "write_mesh_json",
    "write_vtk",
]
