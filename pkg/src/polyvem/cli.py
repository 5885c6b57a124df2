"""Command-line entry point ``polyvem``.

Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors. Messages
go to standard error; results are written to files.
"""
import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import PolyVEMError

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _log(msg):
    print(msg, file=sys.stderr)


def _ensure_dir(path):
    if path:
        os.makedirs(path, exist_ok=True)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_mesh_gen(args):
    from .io import write_mesh_json
    from .mesh import (PolygonDomain, generate_polar_quad_mesh, generate_polygonal_mesh,
                       generate_quad_mesh, rectangle_domain)
    if args.kind == "quad":
        mesh = generate_quad_mesh(args.x_range, args.y_range, args.nx, args.ny, args.region)
    elif args.kind == "polar":
        mesh = generate_polar_quad_mesh(args.r_range, [math.radians(t) for t in args.theta_range],
                                        args.nr, args.ntheta, args.region)
    else:
        if args.domain:
            with open(args.domain) as fh:
                dom = PolygonDomain(**json.load(fh))
        else:
            dom = rectangle_domain(args.x_range, args.y_range)
        mesh = generate_polygonal_mesh(dom, args.n_seeds, args.lloyd, args.seed, args.region)
    write_mesh_json(args.out, mesh)
    _log(f"wrote {mesh.n_nodes} nodes, {mesh.n_elements} elements to {args.out}")


def cmd_merge(args):
    from .io import read_mesh_json, write_mesh_json
    from .mesh import merge_nonmatching_interface
    a = read_mesh_json(args.mesh_a)
    b = read_mesh_json(args.mesh_b)
    merged = merge_nonmatching_interface(a, b, args.tag_a, args.tag_b, args.tol)
    write_mesh_json(args.out, merged)
    _log(f"merged mesh: {merged.n_nodes} nodes, {merged.n_elements} elements -> {args.out}")


def _solve(args, stage):
    from .assembly import solve_elastic, solve_thermal
    from .io import load_config, manifest, write_json, write_mesh_json, write_vtk
    from .postprocess import recover_stress

    cfg = load_config(args.config)
    if args.method:
        cfg.method = args.method
        cfg.validate()
    out = args.out_dir or os.path.join(os.path.dirname(os.path.abspath(args.config)), cfg.output_dir)
    _ensure_dir(out)
    mesh = cfg.build_mesh(os.path.dirname(os.path.abspath(args.config)))
    mats = cfg.material_objects()
    params = cfg.assembly_params()
    solver = cfg.solver_config()
    point, cell, report, arrays = {}, {}, {}, {}
    T = U = None
    if stage in ("thermal", "coupled"):
        T = solve_thermal(mesh, mats, cfg.boundary_conditions("thermal"), params, solver)
        point["temperature"] = T.values
        cell["heat_flux"] = -np.array([mats[mesh.material_key(e)].conductivity
                                       for e in range(mesh.n_elements)])[:, None] * T.element_field
        arrays["temperature"] = T.values
        report.update(T_min=float(T.values.min()), T_max=float(T.values.max()),
                      thermal_residual=T.residual)
    if stage in ("elastic", "coupled"):
        U = solve_elastic(mesh, mats, cfg.boundary_conditions("mechanical"), params, T, solver)
        S = recover_stress(U, T, mesh, mats)
        point["displacement"] = U.values
        for k, name in enumerate(("sxx", "syy", "sxy")):
            cell[name] = S.element[:, k]
        cell["von_mises"] = S.element_von_mises()
        point["von_mises_nodal"] = S.nodal_von_mises()
        arrays.update(displacement=U.values, stress=S.element, von_mises=S.element_von_mises(),
                      stress_nodal=S.nodal, von_mises_nodal=S.nodal_von_mises())
        report.update(max_displacement=float(np.linalg.norm(U.values, axis=1).max()),
                      max_von_mises=float(cell["von_mises"].max()), elastic_residual=U.residual)
    write_vtk(os.path.join(out, "result.vtk"), mesh, point, cell, title=f"polyvem {stage}")
    write_mesh_json(os.path.join(out, "mesh.json"), mesh)
    np.savez(os.path.join(out, "result.npz"), mesh_hash=mesh.content_hash(), **arrays)
    write_json(os.path.join(out, "report.json"), report)
    write_json(os.path.join(out, "manifest.json"), manifest(cfg, mesh, {"stage": stage}))
    _log(f"{stage} solve finished; results in {out}")


def cmd_solve_thermal(args):
    _solve(args, "thermal")


def cmd_solve_elastic(args):
    _solve(args, "elastic")


def cmd_solve_coupled(args):
    _solve(args, "coupled")


def cmd_benchmark(args):
    from .benchmarks import run_convergence, run_cylinder_benchmark, run_rotation_study
    from .io import manifest, write_json
    from .postprocess import write_profile_csv
    if args.bench == "cylinder":
        rep = run_cylinder_benchmark(method=args.method, kind=args.mesh, nodes=args.nodes,
                                     tau_h=args.tau_h)
        data = rep.to_dict()
    elif args.bench == "convergence":
        rep = run_convergence(args.method, args.levels, args.mesh)
        data = rep.to_dict()
    else:
        rep = run_rotation_study(tuple(args.angles))
        data = rep.to_dict()
        if args.csv_dir:
            _ensure_dir(args.csv_dir)
            for a, prof in rep.profiles.items():
                write_profile_csv(os.path.join(args.csv_dir, f"arc_{a:g}.csv"), rep.profile_s, prof)
    opts = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    opts_hash = hashlib.sha256(json.dumps(opts, sort_keys=True, default=list).encode()).hexdigest()
    data["manifest"] = manifest(None, None, {"benchmark": args.bench, "method": args.method,
                                             "config_hash": opts_hash, "options": opts})
    if args.out:
        _ensure_dir(os.path.dirname(os.path.abspath(args.out)))
        write_json(args.out, data)
    else:
        _log(json.dumps(data, indent=1, default=float))
    _log(f"benchmark {args.bench} finished")


def cmd_extract_line(args):
    from .errors import MeshMismatchError
    from .io import read_mesh_json
    from .postprocess import extract_line, write_profile_csv
    mesh = read_mesh_json(os.path.join(args.result_dir, "mesh.json"))
    data = np.load(os.path.join(args.result_dir, "result.npz"))
    if str(data["mesh_hash"]) != mesh.content_hash():
        raise MeshMismatchError("result.npz does not belong to mesh.json")
    name = args.field
    comp = {"sxx": ("stress", 0), "syy": ("stress", 1), "sxy": ("stress", 2),
            "ux": ("displacement", 0), "uy": ("displacement", 1)}
    if name in comp:
        key, k = comp[name]
        if key not in data:
            raise PolyVEMError(f"field {name!r} is not in the result")
        values = data[key][:, k]
    elif name in data and name != "mesh_hash":
        values = data[name]
    else:
        raise PolyVEMError(f"field {name!r} is not in the result")
    pts = np.asarray(args.polyline, dtype=float)
    if pts.size % 2 or pts.size < 4:
        raise UsageError("--polyline needs an even number (>= 4) of coordinates")
    s, v = extract_line(mesh, values, pts.reshape(-1, 2), args.samples)
    write_profile_csv(args.out, s, v)
    _log(f"wrote {len(s)} samples to {args.out}")


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="polyvem", description="Polygonal virtual element solver.")
    p.add_argument("--version", action="version", version=f"polyvem {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("mesh-gen", help="generate a mesh and write it as JSON")
    g.add_argument("--kind", choices=("quad", "polar", "polygon"), default="quad")
    g.add_argument("--x-range", type=float, nargs=2, default=(0.0, 1.0))
    g.add_argument("--y-range", type=float, nargs=2, default=(0.0, 1.0))
    g.add_argument("--nx", type=int, default=4)
    g.add_argument("--ny", type=int, default=4)
    g.add_argument("--r-range", type=float, nargs=2, default=(1.0, 2.0))
    g.add_argument("--theta-range", type=float, nargs=2, default=(0.0, 90.0), help="degrees")
    g.add_argument("--nr", type=int, default=4)
    g.add_argument("--ntheta", type=int, default=4)
    g.add_argument("--domain", help="JSON file with PolygonDomain fields")
    g.add_argument("--n-seeds", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--lloyd", type=int, default=5)
    g.add_argument("--region", default="domain")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_mesh_gen)

    m = sub.add_parser("merge", help="glue two meshes along a non-matching interface")
    m.add_argument("mesh_a")
    m.add_argument("mesh_b")
    m.add_argument("--tag-a", required=True)
    m.add_argument("--tag-b", required=True)
    m.add_argument("--tol", type=float)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_merge)

    for name, func, hlp in (("solve-thermal", cmd_solve_thermal, "steady heat conduction"),
                            ("solve-elastic", cmd_solve_elastic, "linear elasticity"),
                            ("solve-coupled", cmd_solve_coupled, "thermal then mechanical solve")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("--config", required=True)
        s.add_argument("--out-dir")
        s.add_argument("--method", choices=("vem", "sfvem"))
        s.set_defaults(func=func)

    b = sub.add_parser("benchmark", help="built-in verification studies")
    b.add_argument("bench", choices=("cylinder", "convergence", "rotation"))
    b.add_argument("--method", choices=("vem", "sfvem"), default="sfvem")
    b.add_argument("--mesh", choices=("quad", "polygon"), default="quad")
    b.add_argument("--nodes", type=int, default=5073)
    b.add_argument("--tau-h", type=float, default=0.5)
    b.add_argument("--levels", type=int, default=4)
    b.add_argument("--angles", type=float, nargs="+", default=(0.0, 30.0, 60.0, 90.0))
    b.add_argument("--csv-dir")
    b.add_argument("--out")
    b.set_defaults(func=cmd_benchmark)

    e = sub.add_parser("extract-line", help="sample a solved field along a polyline")
    e.add_argument("--result-dir", required=True)
    e.add_argument("--field", required=True,
                   help="temperature, von_mises, von_mises_nodal, sxx, syy, sxy, ux or uy")
    e.add_argument("--polyline", type=float, nargs="+", required=True, metavar="X_Y")
    e.add_argument("--samples", type=int, default=101)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_extract_line)
    return p


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if not argv:
            raise UsageError(parser.format_usage().strip())
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise UsageError(parser.format_usage().strip())
        args.func(args)
    except UsageError as exc:
        _log(str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    except (PolyVEMError, OSError, ValueError, KeyError) as exc:
        _log(f"error: {exc}")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
