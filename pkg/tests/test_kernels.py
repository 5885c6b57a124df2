import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_convex_polygon
from polyvem import _kernels as K
from polyvem._accel import HAVE_NUMBA
from polyvem.mesh import generate_polygonal_mesh, rectangle_domain
from polyvem.quadrature import triangle_rule

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@needs_numba
@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 15), seed=st.integers(0, 10 ** 6), deg=st.integers(0, 8))
def test_fan_quadrature_parity(n, seed, deg):
    xy = random_convex_polygon(np.random.default_rng(seed), n)
    rs, w = triangle_rule(deg)
    c = xy.mean(axis=0)
    a = K.fan_quadrature_numpy(xy, c[0], c[1], rs, w)
    b = K.fan_quadrature_numba(xy, c[0], c[1], rs, w)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-14, atol=1e-15)


@needs_numba
def test_locate_points_parity(rng):
    m = generate_polygonal_mesh(rectangle_domain((0, 1), (0, 1)), 60, seed=0)
    conn, off = m.csr
    pts = rng.uniform(-0.1, 1.1, size=(500, 2))
    a = K.locate_points_numpy(pts, m.nodes, conn, off, 1e-12)
    b = K.locate_points_numba(pts, m.nodes, conn, off, 1e-12)
    inside = (pts >= 0).all(axis=1) & (pts <= 1).all(axis=1)
    assert np.array_equal(a >= 0, inside) and np.array_equal(b >= 0, inside)
    # interior points have a unique owner
    assert np.array_equal(a, b)


@needs_numba
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_clip_convex_parity(seed):
    rng = np.random.default_rng(seed)
    s = random_convex_polygon(rng, int(rng.integers(3, 10)))
    c = random_convex_polygon(rng, int(rng.integers(3, 10)), center=rng.uniform(-0.5, 0.5, 2))
    a = K.clip_convex_numpy(s, c)
    b = K.clip_convex_numba(s, c)
    assert a.shape == b.shape
    assert np.allclose(a, b, atol=1e-14)


@needs_numba
def test_scatter_parity(rng):
    sizes = rng.integers(3, 9, size=40)
    dofs = np.concatenate([rng.choice(100, k, replace=False) for k in sizes]).astype(np.int64)
    doff = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    voff = np.concatenate([[0], np.cumsum(sizes ** 2)]).astype(np.int64)
    vals = rng.normal(size=voff[-1])
    for x, y in zip(K.scatter_coo_numpy(dofs, doff, vals, voff), K.scatter_coo_numba(dofs, doff, vals, voff)):
        assert np.array_equal(x, y)


def test_clip_convex_square_overlap():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    poly = K.clip_convex(sq, sq + 0.5)
    x, y = poly[:, 0], poly[:, 1]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    assert area == pytest.approx(0.25, rel=1e-14)


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("1", "numba" if HAVE_NUMBA else "numpy")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, POLYVEM_NUMBA=flag)
    code = ("import polyvem._kernels as k, polyvem._accel as a;"
            "print(a.backend_name(), k.scatter_coo.__name__)")
    r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, fn = r.stdout.split()
    assert name == expected and fn == f"scatter_coo_{expected}"


def test_numpy_backend_solves_identically(tmp_path):
    """The numpy fallback gives the same strip solution as the default backend."""
    code = ("import numpy as np;"
            "from polyvem.assembly import solve_thermal, dirichlet;"
            "from polyvem.mesh import generate_polygonal_mesh, rectangle_domain;"
            "from polyvem.vem_elastic import Material;"
            "m = generate_polygonal_mesh(rectangle_domain((0, 3), (0, 1)), 40, seed=2);"
            "T = solve_thermal(m, {'domain': Material(1.0, 0.3)}, [dirichlet('thermal','left',1.0),"
            " dirichlet('thermal','right',0.0)]);"
            f"np.save(r'{tmp_path}/' + __import__('os').environ['POLYVEM_NUMBA'] + '.npy', T.values)")
    for flag in ("0", "1"):
        subprocess.run([sys.executable, "-c", code], env=dict(os.environ, POLYVEM_NUMBA=flag), check=True)
    a = np.load(tmp_path / "0.npy")
    b = np.load(tmp_path / "1.npy")
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)
