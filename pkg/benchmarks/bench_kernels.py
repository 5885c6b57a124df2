"""Time the numba kernels against their numpy fallbacks.

Run with ``python benchmarks/bench_kernels.py``. Each kernel is called once
to trigger compilation before timing.
"""
import argparse
import timeit

import numpy as np

from polyvem import _kernels as K
from polyvem._accel import HAVE_NUMBA
from polyvem.benchmarks import cylinder_mesh
from polyvem.quadrature import triangle_rule


def _cases(n_elements):
    mesh = cylinder_mesh("quad", nodes=n_elements)
    conn, offsets = mesh.csr
    rng = np.random.default_rng(0)
    lo, hi = mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)
    pts = rng.uniform(lo, hi, size=(400, 2))
    rs, w = triangle_rule(6)
    poly = mesh.element_coords(0)
    c = poly.mean(axis=0)
    clip = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    subject = np.column_stack([1.5 * np.cos(np.linspace(0, 2 * np.pi, 33)[:-1]),
                               1.5 * np.sin(np.linspace(0, 2 * np.pi, 33)[:-1])])
    k = np.diff(offsets)
    dofs = conn.astype(np.int64)
    val_off = np.zeros(len(k) + 1, dtype=np.int64)
    np.cumsum(k * k, out=val_off[1:])
    vals = rng.standard_normal(val_off[-1])
    return {
        "fan_quadrature": (K.fan_quadrature_numpy, K.fan_quadrature_numba,
                           (poly, c[0], c[1], rs, w)),
        "locate_points": (K.locate_points_numpy, K.locate_points_numba,
                          (pts, mesh.nodes, conn, offsets, 1e-9)),
        "clip_convex": (K.clip_convex_numpy, K.clip_convex_numba, (subject, clip)),
        "scatter_coo": (K.scatter_coo_numpy, K.scatter_coo_numba, (dofs, offsets, vals, val_off)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=5073)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, (f_np, f_nb, a) in _cases(args.nodes).items():
        t_np = min(timeit.repeat(lambda: f_np(*a), number=1, repeat=args.repeat)) * 1e3
        if HAVE_NUMBA:
            f_nb(*a)
            t_nb = min(timeit.repeat(lambda: f_nb(*a), number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<16}{t_np:12.3f}{t_nb:12.3f}{t_np / t_nb:10.1f}")
        else:
            print(f"{name:<16}{t_np:12.3f}{'n/a':>12}{'':>10}")


if __name__ == "__main__":
    main()
