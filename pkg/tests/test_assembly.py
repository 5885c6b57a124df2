import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from polyvem.assembly import (
    AssemblyParams,
    SolverConfig,
    apply_dirichlet,
    assemble,
    dirichlet,
    dirichlet_values,
    neumann,
    solve_elastic,
    solve_linear,
    solve_thermal,
    solve_thermomechanical,
)
from polyvem.errors import ConfigurationError, SolverError
from polyvem.mesh import generate_polygonal_mesh, generate_quad_mesh, rectangle_domain
from polyvem.vem_elastic import Material, elastic_stiffness, elasticity_matrix, vector_projection
from polyvem.vem_thermal import scalar_projection, thermal_stiffness

MAT = Material(E=1000.0, nu=0.3, alpha=1e-5, conductivity=2.0)
MATS = {"domain": MAT}
METHODS = ["vem", "sfvem"]


def test_single_quad_row_sums():
    m = generate_quad_mesh((0, 1), (0, 1), 1, 1)
    K = assemble(m, MATS, "thermal").K.toarray()
    assert K.shape == (4, 4)
    assert np.allclose(K.sum(axis=1), 0.0, atol=1e-14)
    assert np.allclose(K, K.T)


@pytest.mark.parametrize("field_", ["thermal", "elastic"])
def test_global_matrix_equals_dense_scatter(field_):
    m = generate_quad_mesh((0, 2), (0, 1), 2, 2)
    K = assemble(m, MATS, field_, AssemblyParams(tau_h=0.5)).K.toarray()
    dpn = 1 if field_ == "thermal" else 2
    ref = np.zeros((dpn * m.n_nodes,) * 2)
    for e in range(m.n_elements):
        xy = m.element_coords(e)
        v = m.elements[e]
        if field_ == "thermal":
            Ke = thermal_stiffness(scalar_projection(xy, MAT.conductivity), 0.5)
            d = v
        else:
            Ke = elastic_stiffness(vector_projection(xy, elasticity_matrix(MAT)), 0.5)
            d = np.column_stack([2 * v, 2 * v + 1]).ravel()
        for a in range(len(d)):
            for b in range(len(d)):
                ref[d[a], d[b]] += Ke[a, b]
    assert np.allclose(K, 0.5 * (ref + ref.T), rtol=0, atol=1e-12 * np.abs(ref).max())


def test_traction_resultant_split_evenly():
    m = generate_quad_mesh((0, 0.036), (0, 0.036), 1, 1)
    F = assemble(m, MATS, "elastic", bcs=[neumann("mechanical", "right", (10.0, 0.0))]).F
    right = m.boundary_nodes("right")
    assert F[2 * right] == pytest.approx([0.18, 0.18], rel=1e-14)
    assert F.sum() == pytest.approx(0.36, rel=1e-14)


def test_heat_flux_is_outflow_positive():
    m = generate_quad_mesh((0, 1), (0, 1), 4, 4)
    bcs = [dirichlet("thermal", "left", 0.0), neumann("thermal", "right", 3.0)]
    T = solve_thermal(m, MATS, bcs)
    # outflow q at x = 1 with k = 2 gives dT/dx = -q/k
    assert np.allclose(T.values, -1.5 * m.nodes[:, 0], atol=1e-12)
    # the reaction K T - F is the heat the left wall injects; it equals the outflow
    assert T.reaction_total(m, "left") == pytest.approx(3.0, rel=1e-10)


@pytest.mark.parametrize("method", METHODS)
def test_strip_profile_linear(method):
    dom = rectangle_domain((0, 10), (0, 2))
    m = generate_polygonal_mesh(dom, 40, seed=1)
    bcs = [dirichlet("thermal", "left", 80.0), dirichlet("thermal", "right", 25.0)]
    T = solve_thermal(m, MATS, bcs, AssemblyParams(method=method))
    assert np.abs(T.values - (80.0 - 5.5 * m.nodes[:, 0])).max() <= 1e-10 * 80.0
    assert T.residual <= 1e-10


def test_all_dofs_fixed():
    K = sp.identity(3, format="csr") * 2
    red = apply_dirichlet(K, np.ones(3), {0: 1.0, 1: 2.0, 2: 3.0})
    x, res = solve_linear(red.A, red.b)
    assert x.size == 0 and res == 0.0
    assert np.array_equal(red.expand(x), [1.0, 2.0, 3.0])


def test_random_spd_with_constraints_matches_dense(rng):
    n = 30
    Q = rng.normal(size=(n, n))
    A = Q @ Q.T + n * np.eye(n)
    F = rng.normal(size=n)
    fixed = {int(i): float(rng.normal()) for i in rng.choice(n, 8, replace=False)}
    red = apply_dirichlet(sp.csr_matrix(A), F, fixed)
    x, _ = solve_linear(red.A, red.b)
    u = red.expand(x)
    free = np.array([i for i in range(n) if i not in fixed])
    fi = np.array(sorted(fixed))
    fv = np.array([fixed[i] for i in fi])
    oracle = np.linalg.solve(A[np.ix_(free, free)], F[free] - A[np.ix_(free, fi)] @ fv)
    assert np.allclose(u[free], oracle, rtol=1e-12, atol=1e-12)
    assert np.array_equal(u[fi], fv)


def test_identity_system():
    b = np.array([1.0, -2.0, 3.5])
    x, res = solve_linear(sp.identity(3), b)
    assert np.array_equal(x, b) and res == 0.0


@pytest.mark.parametrize("method", ["direct", "cg"])
def test_chain_closed_form(method):
    n = 50
    A = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")
    x, res = solve_linear(A, np.ones(n), SolverConfig(method=method, tol=1e-12))
    i = np.arange(1, n + 1)
    assert np.allclose(x, i * (n + 1 - i) / 2.0, rtol=1e-10)
    assert res <= 1e-12


def test_solver_errors():
    A = sp.diags([-np.ones(199), 2 * np.ones(200), -np.ones(199)], [-1, 0, 1], format="csr")
    with pytest.raises(SolverError) as info:
        solve_linear(A, np.ones(200), SolverConfig(method="cg", max_iter=3))
    assert info.value.residual > 1e-10
    with pytest.raises(SolverError):
        solve_linear(sp.csr_matrix(np.diag([1.0, 0.0, -1.0])), np.ones(3), SolverConfig(method="cg"))


def test_configuration_errors():
    m = generate_quad_mesh((0, 1), (0, 1), 2, 2)
    with pytest.raises(ConfigurationError, match="conflicting"):
        dirichlet_values(m, [dirichlet("thermal", "left", 1.0), dirichlet("thermal", "bottom", 2.0)], "thermal")
    with pytest.raises(ConfigurationError, match="both"):
        solve_thermal(m, MATS, [dirichlet("thermal", "left", 1.0), neumann("thermal", "left", 1.0)])
    with pytest.raises(ConfigurationError, match="does not exist"):
        solve_thermal(m, MATS, [dirichlet("thermal", "west", 1.0)])
    with pytest.raises(ConfigurationError, match="no material"):
        solve_thermal(m, {"copper": MAT}, [dirichlet("thermal", "left", 1.0)])
    with pytest.raises(ConfigurationError):
        AssemblyParams(method="fem")
    with pytest.raises(ConfigurationError):
        AssemblyParams(uniform_order=0)
    with pytest.raises(ConfigurationError):
        dirichlet("mechanical", "left", 0.0, component_mask=(False, False))
    # equal values on a shared corner are not a conflict
    fixed = dirichlet_values(m, [dirichlet("thermal", "left", 1.0), dirichlet("thermal", "bottom", 1.0)], "thermal")
    assert len(fixed) == 5


@pytest.mark.parametrize("method", METHODS)
def test_reaction_equilibrium(method):
    m = generate_polygonal_mesh(rectangle_domain((0, 4), (0, 1)), 50, seed=3)
    bcs = [dirichlet("mechanical", "left", (0.0, 0.0)), neumann("mechanical", "right", (2.0, -1.0)),
           neumann("mechanical", "top", (0.0, -0.5))]
    U = solve_elastic(m, MATS, bcs, AssemblyParams(method=method))
    applied = np.array([2.0, -1.0]) * 1.0 + np.array([0.0, -0.5]) * 4.0
    total = U.reactions.sum(axis=0)
    assert np.allclose(total, -applied, rtol=1e-8, atol=1e-8 * np.abs(applied).max())


@pytest.mark.parametrize("method", METHODS)
def test_uniform_reference_temperature_has_no_effect(method):
    m = generate_quad_mesh((0, 2), (0, 1), 4, 2)
    params = AssemblyParams(method=method, T_ref=40.0)
    tb = [dirichlet("thermal", "left", 40.0), dirichlet("thermal", "right", 40.0)]
    mb = [dirichlet("mechanical", "left", (0.0, 0.0)), neumann("mechanical", "right", (1.0, 0.0))]
    T, U = solve_thermomechanical(m, MATS, tb, mb, params)
    U0 = solve_elastic(m, MATS, mb, params)
    # interior temperatures equal T_ref up to round-off, so the thermal load is ~1e-16
    assert np.abs(U.values - U0.values).max() <= 1e-12 * np.abs(U0.values).max()
    exact = solve_elastic(m, MATS, mb, params, temperature=np.full(m.n_nodes, 40.0))
    assert np.array_equal(exact.values, U0.values)


@pytest.mark.parametrize("method", METHODS)
def test_determinism_and_metadata(method):
    m = generate_polygonal_mesh(rectangle_domain((0, 1), (0, 1)), 30, seed=0)
    bcs = [dirichlet("thermal", "left", 1.0), dirichlet("thermal", "right", 0.0)]
    a = solve_thermal(m, MATS, bcs, AssemblyParams(method=method))
    b = solve_thermal(m, MATS, bcs, AssemblyParams(method=method))
    assert np.array_equal(a.values, b.values)
    assert a.mesh_hash == m.content_hash()
    assert a.metadata["method"] == method
    assert ("tau_h" in a.metadata) == (method == "vem")
    assert ("l" in a.metadata) == (method == "sfvem")


def test_shapes_do_not_depend_on_method():
    m = generate_polygonal_mesh(rectangle_domain((0, 1), (0, 1)), 20, seed=0)
    bcs = [dirichlet("mechanical", "left", (0.0, 0.0)), neumann("mechanical", "right", (1.0, 0.0))]
    a = solve_elastic(m, MATS, bcs, AssemblyParams(method="vem"))
    b = solve_elastic(m, MATS, bcs, AssemblyParams(method="sfvem"))
    assert a.values.shape == b.values.shape and a.element_field.shape == b.element_field.shape


def test_uniform_order_too_low_is_reported():
    from polyvem.errors import InsufficientOrderError
    m = generate_polygonal_mesh(rectangle_domain((0, 1), (0, 1)), 30, seed=0)
    with pytest.raises(InsufficientOrderError):
        assemble(m, MATS, "elastic", AssemblyParams(method="sfvem", uniform_order=1))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(5, 40))
def test_random_spd_property(seed, n):
    rng = np.random.default_rng(seed)
    Q = rng.normal(size=(n, n))
    A = Q @ Q.T + n * np.eye(n)
    b = rng.normal(size=n)
    x, res = solve_linear(sp.csr_matrix(A), b)
    assert res <= 1e-10
    assert np.allclose(A @ x, b, atol=1e-9 * np.linalg.norm(b))
