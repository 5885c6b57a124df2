"""Lowest-order virtual element kernel for scalar (heat conduction) problems."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateElementError
from .mesh import ElementGeometry, _polygon_geometry

DEFAULT_TAU = 0.5


@dataclass
class ScalarElementKernel:
    """Projection and stiffness matrices of one element.

    Monomials are ``1, xi, eta`` with ``xi = (x - xc) / h``.
    ``Pi_star`` maps nodal values to monomial coefficients of the energy
    projection and ``Pi_nodal`` evaluates that projection back at the
    vertices.
    """
    geometry: ElementGeometry
    xy: np.ndarray
    conductivity: float
    D: np.ndarray
    G: np.ndarray
    B: np.ndarray
    Pi_star: np.ndarray
    Pi_nodal: np.ndarray
    K_c: Optional[np.ndarray] = None
    K_s: Optional[np.ndarray] = None
    K: Optional[np.ndarray] = None

    @property
    def n_vertices(self):
        return self.xy.shape[0]

    @property
    def scaled(self):
        cx, cy = self.geometry.centroid
        h = self.geometry.diameter
        return (self.xy[:, 0] - cx) / h, (self.xy[:, 1] - cy) / h

    def energy_matrix(self):
        """a(p_a, p_b) on the monomials; the constant row and column vanish."""
        g = self.geometry
        return self.conductivity * g.area / g.diameter ** 2 * np.diag([0.0, 1.0, 1.0])

    def gradient_operator(self):
        """(2, n) map from nodal values to the constant projected gradient."""
        return self.Pi_star[1:3] / self.geometry.diameter

    def value_operator(self, x, y):
        """(npts, n) map from nodal values to projected values at points."""
        cx, cy = self.geometry.centroid
        h = self.geometry.diameter
        x = np.atleast_1d(x)
        y = np.atleast_1d(y)
        P = np.column_stack([np.ones_like(x), (x - cx) / h, (y - cy) / h])
        return P @ self.Pi_star


def vertex_normal_weights(xy):
    """Half the sum of the two length-scaled outward normals at each vertex.

    For hat functions with linear edge traces ``int_dE phi_i n dGamma``
    equals this vector.
    """
    nxt = np.roll(xy, -1, axis=0)
    edge_n = np.column_stack([nxt[:, 1] - xy[:, 1], xy[:, 0] - nxt[:, 0]])
    return 0.5 * (edge_n + np.roll(edge_n, 1, axis=0))


def scalar_projection(xy, conductivity=1.0, geometry=None):
    """Energy projection of the k=1 scalar virtual element space.

    The constant part of the projection is fixed by requiring the vertex
    average of the projected field to equal the vertex average of the nodal
    values.
    """
    xy = np.asarray(xy, dtype=float)
    if conductivity <= 0.0:
        raise ValueError("conductivity must be positive")
    g = geometry if geometry is not None else _polygon_geometry(xy)
    n = xy.shape[0]
    h = g.diameter
    cx, cy = g.centroid
    D = np.column_stack([np.ones(n), (xy[:, 0] - cx) / h, (xy[:, 1] - cy) / h])
    S = vertex_normal_weights(xy)
    B = np.empty((3, n))
    B[0] = 1.0 / n
    B[1] = conductivity * S[:, 0] / h
    B[2] = conductivity * S[:, 1] / h
    G = B @ D
    try:
        Pi_star = np.linalg.solve(G, B)
    except np.linalg.LinAlgError as exc:
        raise DegenerateElementError("singular projection matrix G") from exc
    if not np.all(np.isfinite(Pi_star)):
        raise DegenerateElementError("singular projection matrix G")
    return ScalarElementKernel(g, xy, float(conductivity), D, G, B, Pi_star, D @ Pi_star)


def thermal_stiffness(kernel, tau_h=DEFAULT_TAU):
    """Consistency plus scaled-trace stabilization stiffness.

    Fills ``kernel.K_c``, ``kernel.K_s`` and ``kernel.K`` and returns ``K``.
    """
    if tau_h <= 0.0:
        raise ValueError("tau_h must be positive")
    P = kernel.Pi_star
    K_c = P.T @ kernel.energy_matrix() @ P
    if kernel.n_vertices == 3:
        # the virtual space of a triangle is P1, so I - Pi vanishes identically
        K_s = np.zeros_like(K_c)
    else:
        R = np.eye(kernel.n_vertices) - kernel.Pi_nodal
        K_s = tau_h * np.trace(K_c) * (R.T @ R)
    kernel.K_c = K_c
    kernel.K_s = K_s
    kernel.K = K_c + K_s
    return kernel.K
