"""Virtual element and stabilization-free virtual element solvers for 2D
steady heat conduction and sequentially coupled thermoelasticity on
polygonal meshes."""
__version__ = "0.1.0"

from ._accel import backend_name
from .assembly import (
    AssemblyParams,
    BoundaryCondition,
    FieldSolution,
    SolverConfig,
    apply_dirichlet,
    assemble,
    dirichlet,
    neumann,
    solve_elastic,
    solve_linear,
    solve_thermal,
    solve_thermomechanical,
)
from .mesh import (
    PolygonalMesh,
    PolygonDomain,
    element_geometry,
    generate_polar_quad_mesh,
    generate_polygonal_mesh,
    generate_quad_mesh,
    merge_nonmatching_interface,
    rotate_region_mesh,
)
from .postprocess import error_eav, error_rms, extract_line, recover_stress, von_mises
from .vem_elastic import Material, elasticity_matrix

__all__ = [
    "AssemblyParams",
    "BoundaryCondition",
    "FieldSolution",
    "Material",
    "PolygonDomain",
    "PolygonalMesh",
    "SolverConfig",
    "apply_dirichlet",
    "assemble",
    "backend_name",
    "dirichlet",
    "element_geometry",
    "elasticity_matrix",
    "error_eav",
    "error_rms",
    "extract_line",
    "generate_polar_quad_mesh",
    "generate_polygonal_mesh",
    "generate_quad_mesh",
    "merge_nonmatching_interface",
    "neumann",
    "recover_stress",
    "rotate_region_mesh",
    "solve_elastic",
    "solve_linear",
    "solve_thermal",
    "solve_thermomechanical",
    "von_mises",
]
