import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cst_stiffness, frob_rel, random_convex_polygon, random_triangle
from polyvem.errors import UnsupportedMaterialError
from polyvem.vem_elastic import (
    PLANE_STRAIN,
    PLANE_STRESS,
    Material,
    elastic_stiffness,
    elasticity_matrix,
    rigid_body_modes,
    thermal_force,
    vector_projection,
)
from polyvem.vem_thermal import vertex_normal_weights

STEEL = Material(E=200000.0, nu=0.3, alpha=1.2e-5)


def traction_loads(xy, sigma):
    """Nodal forces int sigma n phi_i for a constant Voigt stress."""
    S = vertex_normal_weights(xy)
    sxx, syy, sxy = sigma
    f = np.empty(2 * len(xy))
    f[0::2] = sxx * S[:, 0] + sxy * S[:, 1]
    f[1::2] = sxy * S[:, 0] + syy * S[:, 1]
    return f


def test_elasticity_matrices():
    m = Material(E=1.0, nu=0.25)
    assert np.allclose(elasticity_matrix(m), 1 / (1 - 0.0625) * np.array(
        [[1, 0.25, 0], [0.25, 1, 0], [0, 0, 0.375]]))
    ps = Material(E=1.0, nu=0.25, mode=PLANE_STRAIN)
    c = 1.0 / (1.25 * 0.5)
    assert np.allclose(elasticity_matrix(ps), c * np.array([[0.75, 0.25, 0], [0.25, 0.75, 0], [0, 0, 0.25]]))


@pytest.mark.parametrize("mode", [PLANE_STRESS, PLANE_STRAIN])
def test_triangle_equals_cst(rng, mode):
    D = elasticity_matrix(STEEL.with_mode(mode))
    for _ in range(10):
        xy = random_triangle(rng)
        ker = vector_projection(xy, D)
        K = elastic_stiffness(ker)
        assert frob_rel(K, cst_stiffness(xy, D)) < 1e-13
        assert not ker.K_s.any()


@pytest.mark.parametrize("n", [3, 4, 5, 7, 10, 15])
def test_rank_and_rigid_modes(rng, n):
    xy = random_convex_polygon(rng, n, scale=0.3)
    K = elastic_stiffness(vector_projection(xy, elasticity_matrix(STEEL)))
    s = np.linalg.svd(K, compute_uv=False)
    assert np.sum(s > 1e-10 * s[0]) == 2 * n - 3
    assert np.abs(K @ rigid_body_modes(xy)).max() <= 1e-11 * s[0]


def test_linear_displacement_consistency(rng):
    xy = random_convex_polygon(rng, 6, scale=2.0, center=(3.0, -1.0))
    D = elasticity_matrix(STEEL)
    ker = vector_projection(xy, D)
    K = elastic_stiffness(ker)
    G = rng.normal(size=(2, 2))
    c = rng.normal(size=2)
    u = (xy @ G.T + c).ravel()
    assert np.allclose(ker.Pi_nodal @ u, u, atol=1e-12)
    eps = np.array([G[0, 0], G[1, 1], G[0, 1] + G[1, 0]])
    assert np.allclose(ker.strain_operator() @ u, eps, atol=1e-12)
    assert np.allclose(K @ u, traction_loads(xy, D @ eps), rtol=1e-11, atol=1e-9)


@pytest.mark.parametrize("mode", [PLANE_STRESS, PLANE_STRAIN])
def test_constant_temperature_force(rng, mode):
    mat = STEEL.with_mode(mode)
    D = elasticity_matrix(mat)
    xy = random_convex_polygon(rng, 7)
    ker = vector_projection(xy, D)
    dT = 40.0
    F = thermal_force(ker, np.full(7, dT), mat)
    sig_t = D @ (mat.thermal_strain_coefficient * dT * np.array([1.0, 1.0, 0.0]))
    assert np.allclose(F, traction_loads(xy, sig_t), rtol=1e-12, atol=1e-12)
    # self-equilibrated: no net force or moment
    assert abs(F @ rigid_body_modes(xy)).max() <= 1e-12 * np.abs(F).max()


def test_linear_temperature_force_equilibrium(rng):
    xy = random_convex_polygon(rng, 9)
    D = elasticity_matrix(STEEL)
    ker = vector_projection(xy, D)
    dT = 10 + 3 * xy[:, 0] - 5 * xy[:, 1]
    F = thermal_force(ker, dT, STEEL)
    assert abs(F @ rigid_body_modes(xy)).max() <= 1e-12 * np.abs(F).max()


def test_plane_strain_thermal_coefficient():
    m = Material(E=1.0, nu=0.3, alpha=2e-5, mode=PLANE_STRAIN)
    assert m.thermal_strain_coefficient == pytest.approx(1.3 * 2e-5)
    assert m.with_mode(PLANE_STRESS).thermal_strain_coefficient == 2e-5


@pytest.mark.parametrize("kwargs", [
    dict(E=1.0, nu=0.5), dict(E=0.0, nu=0.3), dict(E=1.0, nu=0.6), dict(E=1.0, nu=-1.0),
    dict(E=1.0, nu=0.3, alpha=-1.0), dict(E=1.0, nu=0.3, conductivity=0.0),
    dict(E=1.0, nu=0.3, mode="axisymmetric")])
def test_material_validation(kwargs):
    with pytest.raises(UnsupportedMaterialError):
        Material(**kwargs)


def test_thermal_force_requires_temperature():
    xy = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
    ker = vector_projection(xy, elasticity_matrix(STEEL))
    with pytest.raises(ValueError):
        thermal_force(ker, None, STEEL)
    with pytest.raises(ValueError):
        thermal_force(ker, np.zeros(4), STEEL)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(3, 14), seed=st.integers(0, 2 ** 31 - 1), nu=st.floats(-0.5, 0.45))
def test_properties(n, seed, nu):
    rng = np.random.default_rng(seed)
    xy = random_convex_polygon(rng, n, scale=rng.uniform(0.01, 100.0))
    D = elasticity_matrix(Material(E=1000.0, nu=nu))
    K = elastic_stiffness(vector_projection(xy, D))
    nrm = np.linalg.norm(K)
    assert np.allclose(K, K.T, atol=1e-13 * nrm)
    assert np.abs(K @ rigid_body_modes(xy)).max() <= 1e-11 * nrm
    assert np.linalg.eigvalsh(K).min() >= -1e-11 * nrm
