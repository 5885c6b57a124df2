"""Stabilization-free kernels built on an L2 projection of the gradient.

The gradient of a lowest-order virtual function is projected onto vector
polynomials of degree ``l``; when ``(l+1)(l+2) > n_v - 1`` the resulting
stiffness has the correct rank on its own and no stabilization term is
added.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import ConditioningError, InsufficientOrderError
from .mesh import ElementGeometry, _polygon_geometry
from .quadrature import (
    MAX_POLYGON_DEGREE,
    edge_rule,
    eval_monomial_grads,
    eval_monomials,
    monomial_count,
    polygon_rule,
)
from .vem_elastic import rigid_body_modes
from .vem_thermal import ScalarElementKernel, scalar_projection

COND_LIMIT = 1e12
RANK_RTOL = 1e-10

# Voigt gather: (exx, eyy, gxy) from (du/dx, dv/dx, du/dy, dv/dy)
VOIGT_GATHER = np.array([[1.0, 0.0, 0.0, 0.0],
                         [0.0, 0.0, 0.0, 1.0],
                         [0.0, 1.0, 1.0, 0.0]])


def order_satisfied(l, n_v):
    return (l + 1) * (l + 2) > n_v - 1


def select_order(n_v):
    """Smallest l >= 1 with (l+1)(l+2) > n_v - 1."""
    if n_v < 3:
        raise ValueError("an element needs at least 3 vertices")
    l = 1
    while not order_satisfied(l, n_v):
        l += 1
    return l


def vector_order_satisfied(l, n_v):
    """Necessary condition for a full-rank vector stiffness.

    The projected displacement gradients span at most 2(n_v - 1) dimensions
    of the 4*dim_l gradient polynomials, of which dim_l are strain-free
    (skew). Only one skew direction (the rigid rotation) may survive, which
    needs 3*dim_l >= 2*n_v - 3.
    """
    return order_satisfied(l, n_v) and 3 * monomial_count(l) >= 2 * n_v - 3


def select_order_vector(n_v):
    """Smallest l giving rank 2*n_v - 3 for the elastic stiffness."""
    l = select_order(n_v)
    while not vector_order_satisfied(l, n_v):
        l += 1
    return l


@dataclass
class GradientProjectionKernel:
    """L2 gradient projection of one element.

    ``Pi_m`` has shape (2*dim_l, n_v): the first ``dim_l`` rows are the
    monomial coefficients of d/dx, the rest those of d/dy.
    ``orthonormalized`` records whether the mass matrix had to be inverted
    through an orthonormalised monomial basis.
    """
    geometry: ElementGeometry
    xy: np.ndarray
    l: int
    base: ScalarElementKernel
    qpoints: np.ndarray
    qweights: np.ndarray
    Gtilde: np.ndarray
    Btilde: np.ndarray
    Pi_m: np.ndarray
    orthonormalized: bool = False
    K: Optional[np.ndarray] = None

    @property
    def n_vertices(self):
        return self.xy.shape[0]

    @property
    def dim(self):
        return monomial_count(self.l)

    def scaled(self, x, y):
        cx, cy = self.geometry.centroid
        h = self.geometry.diameter
        return (np.asarray(x) - cx) / h, (np.asarray(y) - cy) / h

    def Np(self, x, y):
        """(npts, 2, 2*dim) matrix N^p at physical points."""
        xi, eta = self.scaled(x, y)
        m = eval_monomials(xi, eta, self.l)
        d = self.dim
        out = np.zeros((m.shape[0], 2, 2 * d))
        out[:, 0, :d] = m
        out[:, 1, d:] = m
        return out

    def gradient_operator(self, x, y):
        """(npts, 2, n) map from nodal values to projected gradients at points."""
        return self.Np(x, y) @ self.Pi_m

    def strain_matrix(self, x, y):
        """(npts, 3, 4*dim) strains A (N^p kron I2) at points."""
        Np = self.Np(x, y)
        big = np.einsum("pij,kl->pikjl", Np, np.eye(2)).reshape(Np.shape[0], 4, -1)
        return VOIGT_GATHER[None] @ big

    @property
    def Pi_vector(self):
        """Kronecker expansion Pi_m kron I2 acting on interleaved displacements."""
        return np.kron(self.Pi_m, np.eye(2))

    def strain_operator(self, x, y):
        """(npts, 3, 2n) map from nodal displacements to projected strain."""
        return self.strain_matrix(x, y) @ self.Pi_vector


def gradient_projection_scalar(xy, l=None, base_projection=None, geometry=None, check_conditioning=True):
    """Build the L2 gradient projection matrix ``Pi_m = G~^-1 B~`` of an element.

    The boundary part of ``B~`` integrates the monomials against the linear
    traces of the hat functions; the volume part replaces each hat function
    by its energy projection from :func:`polyvem.vem_thermal.scalar_projection`.
    """
    xy = np.asarray(xy, dtype=float)
    n = xy.shape[0]
    if l is None:
        l = select_order(n)
    g = geometry if geometry is not None else _polygon_geometry(xy)
    base = base_projection if base_projection is not None else scalar_projection(xy, 1.0, g)
    h = g.diameter
    cx, cy = g.centroid
    d = monomial_count(l)

    if 2 * l > MAX_POLYGON_DEGREE:
        raise ValueError(f"projection order {l} exceeds the available quadrature")
    rule = polygon_rule(xy, min(2 * l + 2, MAX_POLYGON_DEGREE), centroid=g.centroid)
    xi = (rule.points[:, 0] - cx) / h
    eta = (rule.points[:, 1] - cy) / h
    mq = eval_monomials(xi, eta, l)
    w = rule.weights
    mass = (mq * w[:, None]).T @ mq

    # boundary term: int_dE m_a n phi_i
    Bt = np.zeros((2 * d, n))
    for k in range(n):
        k1 = (k + 1) % n
        a, b = xy[k], xy[k1]
        er = edge_rule(a, b, l + 2)
        L = np.hypot(*(b - a))
        nx, ny = (b[1] - a[1]) / L, (a[0] - b[0]) / L
        me = eval_monomials((er.points[:, 0] - cx) / h, (er.points[:, 1] - cy) / h, l)
        t = er.params
        wa = er.weights * (1.0 - t)
        wb = er.weights * t
        ia = me.T @ wa
        ib = me.T @ wb
        Bt[:d, k] += nx * ia
        Bt[:d, k1] += nx * ib
        Bt[d:, k] += ny * ia
        Bt[d:, k1] += ny * ib

    # volume term: int_E div(p) Pi phi_i, with Pi phi_i linear in (1, xi, eta)
    grads = eval_monomial_grads(xi, eta, l, h)
    P1 = np.column_stack([np.ones_like(xi), xi, eta])
    Vx = (grads[:, :, 0] * w[:, None]).T @ P1
    Vy = (grads[:, :, 1] * w[:, None]).T @ P1
    Bt[:d] -= Vx @ base.Pi_star
    Bt[d:] -= Vy @ base.Pi_star

    Gt = np.zeros((2 * d, 2 * d))
    Gt[:d, :d] = mass
    Gt[d:, d:] = mass

    cond = np.linalg.cond(mass)
    ortho = False
    if cond <= COND_LIMIT or not check_conditioning:
        try:
            cf = cho_factor(mass)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(f"monomial mass matrix is not positive definite (element with {n} vertices)") from exc
        Pi = np.vstack([cho_solve(cf, Bt[:d]), cho_solve(cf, Bt[d:])])
    else:
        if np.any(w < 0.0):
            raise ConditioningError(f"mass matrix condition {cond:.3e} exceeds {COND_LIMIT:g} "
                                    f"(element centroid {g.centroid})")
        # orthonormalise the monomials in the quadrature inner product
        _, R = np.linalg.qr(np.sqrt(w)[:, None] * mq)
        if np.min(np.abs(np.diag(R))) <= 1e-14 * np.max(np.abs(np.diag(R))):
            raise ConditioningError(f"monomial basis is numerically dependent on element at {g.centroid}")

        def solve(rhs):
            y = solve_triangular(R, rhs, trans="T")
            return solve_triangular(R, y)

        Pi = np.vstack([solve(Bt[:d]), solve(Bt[d:])])
        ortho = True
    return GradientProjectionKernel(g, xy, l, base, rule.points, w, Gt, Bt, Pi, ortho)


def _rank(K):
    s = np.linalg.svd(K, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0


def sfvem_thermal_stiffness(kernel, conductivity=1.0, check_rank=True):
    """K = lambda Pi_m^T G~ Pi_m with no stabilization term."""
    P = kernel.Pi_m
    K = conductivity * (P.T @ kernel.Gtilde @ P)
    K = 0.5 * (K + K.T)
    if check_rank:
        r = _rank(K)
        if r != kernel.n_vertices - 1:
            raise InsufficientOrderError(
                f"scalar stiffness rank {r} != {kernel.n_vertices - 1} with l={kernel.l}")
    kernel.K = K
    return K


def sfvem_elastic_stiffness(kernel, Dmat, check_rank=True):
    """Stabilization-free elastic stiffness from the Kronecker-expanded projection."""
    Psi = kernel.strain_matrix(kernel.qpoints[:, 0], kernel.qpoints[:, 1])
    Kq = np.einsum("p,pai,ab,pbj->ij", kernel.qweights, Psi, Dmat, Psi)
    P = kernel.Pi_vector
    K = P.T @ Kq @ P
    K = 0.5 * (K + K.T)
    if check_rank:
        r = _rank(K)
        if r != 2 * kernel.n_vertices - 3:
            raise InsufficientOrderError(
                f"vector stiffness rank {r} != {2 * kernel.n_vertices - 3} with l={kernel.l}")
    return K


def sfvem_thermal_force(kernel, Dmat, nodal_dT, material):
    """Equivalent nodal forces of the thermal strain, projected with Pi_m kron I2."""
    nodal_dT = np.asarray(nodal_dT, dtype=float)
    if nodal_dT.shape != (kernel.n_vertices,):
        raise ValueError("nodal_dT must hold one value per element vertex")
    x, y = kernel.qpoints[:, 0], kernel.qpoints[:, 1]
    dT = kernel.base.value_operator(x, y) @ nodal_dT
    eps_t = material.thermal_strain_coefficient * np.array([1.0, 1.0, 0.0])
    Psi = kernel.strain_matrix(x, y)
    f = np.einsum("p,pai,ab,b->i", kernel.qweights * dT, Psi, Dmat, eps_t)
    return kernel.Pi_vector.T @ f


__all__ = [
    "GradientProjectionKernel",
    "select_order",
    "select_order_vector",
    "vector_order_satisfied",
    "order_satisfied",
    "gradient_projection_scalar",
    "sfvem_thermal_stiffness",
    "sfvem_elastic_stiffness",
    "sfvem_thermal_force",
    "rigid_body_modes",
]
