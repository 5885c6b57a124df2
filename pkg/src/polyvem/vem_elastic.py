"""Lowest-order virtual element kernel for plane elasticity with thermal strain."""
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .errors import DegenerateElementError, UnsupportedMaterialError
from .mesh import ElementGeometry, _polygon_geometry
from .quadrature import polygon_rule
from .vem_thermal import DEFAULT_TAU, scalar_projection, vertex_normal_weights

PLANE_STRESS = "plane-stress"
PLANE_STRAIN = "plane-strain"
MODES = (PLANE_STRESS, PLANE_STRAIN)


@dataclass(frozen=True)
class Material:
    """Isotropic linear thermoelastic material.

    Units follow the mm-MPa-K convention: ``E`` in MPa, ``alpha`` in 1/K,
    ``conductivity`` in W/(m K).
    """
    E: float
    nu: float
    alpha: float = 0.0
    conductivity: float = 1.0
    mode: str = PLANE_STRESS

    def __post_init__(self):
        if self.mode not in MODES:
            raise UnsupportedMaterialError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.E > 0.0:
            raise UnsupportedMaterialError("Young's modulus must be positive")
        if self.nu == 0.5:
            raise UnsupportedMaterialError("incompressible material (nu = 0.5) is not supported")
        if not -1.0 < self.nu < 0.5:
            raise UnsupportedMaterialError("Poisson's ratio must lie in (-1, 0.5)")
        if self.alpha < 0.0:
            raise UnsupportedMaterialError("thermal expansion must be non-negative")
        if not self.conductivity > 0.0:
            raise UnsupportedMaterialError("conductivity must be positive")

    @property
    def lame(self):
        lam = self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))
        mu = self.E / (2.0 * (1.0 + self.nu))
        return lam, mu

    @property
    def thermal_strain_coefficient(self):
        """In-plane stress-free strain per kelvin.

        Under plane strain the suppressed out-of-plane expansion raises the
        effective in-plane coefficient to (1 + nu) alpha.
        """
        if self.mode == PLANE_STRAIN:
            return (1.0 + self.nu) * self.alpha
        return self.alpha

    def with_mode(self, mode):
        d = asdict(self)
        d["mode"] = mode
        return Material(**d)


def elasticity_matrix(material):
    """3x3 Voigt matrix relating (exx, eyy, gxy) to (sxx, syy, sxy)."""
    E, nu = material.E, material.nu
    if material.mode == PLANE_STRESS:
        c = E / (1.0 - nu * nu)
        return c * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1.0 - nu)]])
    lam, mu = material.lame
    return np.array([[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]])


def basis_strains(h):
    """Voigt strains of the six vector monomials (columns m1..m6)."""
    eps = np.zeros((3, 6))
    eps[0, 4] = 1.0 / h
    eps[1, 5] = 1.0 / h
    eps[2, 3] = 2.0 / h
    return eps


def basis_at(xi, eta):
    """(2*npts, 6) values of m1..m6 at scaled points, x and y rows interleaved."""
    xi = np.atleast_1d(xi)
    eta = np.atleast_1d(eta)
    n = xi.size
    out = np.zeros((2 * n, 6))
    out[0::2, 0] = 1.0
    out[1::2, 1] = 1.0
    out[0::2, 2] = -eta
    out[1::2, 2] = xi
    out[0::2, 3] = eta
    out[1::2, 3] = xi
    out[0::2, 4] = xi
    out[1::2, 5] = eta
    return out


@dataclass
class VectorElementKernel:
    """Projection and stiffness matrices of one element for elasticity."""
    geometry: ElementGeometry
    xy: np.ndarray
    Dmat: np.ndarray
    eps_m: np.ndarray
    Bbar: np.ndarray
    Dbar: np.ndarray
    M: np.ndarray
    Pi_star: np.ndarray
    Pi_nodal: np.ndarray
    K_c: Optional[np.ndarray] = None
    K_s: Optional[np.ndarray] = None
    K: Optional[np.ndarray] = None
    F_th: Optional[np.ndarray] = None

    @property
    def n_vertices(self):
        return self.xy.shape[0]

    def energy_matrix(self):
        return self.geometry.area * self.eps_m.T @ self.Dmat @ self.eps_m

    def strain_operator(self):
        """(3, 2n) map from nodal displacements to the constant projected strain."""
        return self.eps_m @ self.Pi_star


def rigid_body_modes(xy):
    """(2n, 3) nodal vectors of x-translation, y-translation and rotation."""
    n = xy.shape[0]
    c = xy.mean(axis=0)
    r = np.zeros((2 * n, 3))
    r[0::2, 0] = 1.0
    r[1::2, 1] = 1.0
    r[0::2, 2] = -(xy[:, 1] - c[1])
    r[1::2, 2] = xy[:, 0] - c[0]
    return r


def vector_projection(xy, Dmat, geometry=None):
    """Energy projection of the k=1 vector virtual element space.

    Rows for the zero-strain members m1, m2, m3 are replaced by vertex
    averages of the two displacement components and the element mean of the
    infinitesimal rotation (computed exactly from the boundary traces).
    """
    xy = np.asarray(xy, dtype=float)
    g = geometry if geometry is not None else _polygon_geometry(xy)
    n = xy.shape[0]
    h = g.diameter
    cx, cy = g.centroid
    xi = (xy[:, 0] - cx) / h
    eta = (xy[:, 1] - cy) / h
    Dbar = basis_at(xi, eta)
    eps_m = basis_strains(h)
    S = vertex_normal_weights(xy)

    Bbar = np.zeros((6, 2 * n))
    Bbar[0, 0::2] = 1.0 / n
    Bbar[1, 1::2] = 1.0 / n
    rot = h / (2.0 * g.area)
    Bbar[2, 0::2] = -rot * S[:, 1]
    Bbar[2, 1::2] = rot * S[:, 0]
    sig = Dmat @ eps_m
    for a in range(3, 6):
        sxx, syy, sxy = sig[:, a]
        Bbar[a, 0::2] = sxx * S[:, 0] + sxy * S[:, 1]
        Bbar[a, 1::2] = sxy * S[:, 0] + syy * S[:, 1]
    M = Bbar @ Dbar
    try:
        Pi_star = np.linalg.solve(M, Bbar)
    except np.linalg.LinAlgError as exc:
        raise DegenerateElementError("singular projection matrix M") from exc
    if not np.all(np.isfinite(Pi_star)):
        raise DegenerateElementError("singular projection matrix M")
    return VectorElementKernel(g, xy, np.asarray(Dmat, dtype=float), eps_m, Bbar, Dbar, M,
                               Pi_star, Dbar @ Pi_star)


def elastic_stiffness(kernel, tau_h=DEFAULT_TAU):
    if tau_h <= 0.0:
        raise ValueError("tau_h must be positive")
    P = kernel.Pi_star
    K_c = P.T @ kernel.energy_matrix() @ P
    K_c = 0.5 * (K_c + K_c.T)
    if kernel.n_vertices == 3:
        K_s = np.zeros_like(K_c)  # P1 triangle: nothing to stabilize
    else:
        R = np.eye(2 * kernel.n_vertices) - kernel.Pi_nodal
        K_s = tau_h * np.trace(K_c) * (R.T @ R)
    kernel.K_c = K_c
    kernel.K_s = K_s
    kernel.K = K_c + K_s
    return kernel.K


def thermal_force(kernel, nodal_dT, material, scalar_kernel=None):
    """Equivalent nodal forces of the thermal strain over one element.

    ``nodal_dT`` holds T - T_ref at the element vertices. The temperature
    change inside the element is taken from its energy projection (a linear
    polynomial) and integrated exactly.
    """
    if nodal_dT is None:
        raise ValueError("a temperature field is required for thermal loads")
    nodal_dT = np.asarray(nodal_dT, dtype=float)
    if nodal_dT.shape != (kernel.n_vertices,):
        raise ValueError("nodal_dT must hold one value per element vertex")
    sk = scalar_kernel if scalar_kernel is not None else scalar_projection(kernel.xy, 1.0, kernel.geometry)
    rule = polygon_rule(kernel.xy, 1, centroid=kernel.geometry.centroid)
    dT = sk.value_operator(rule.points[:, 0], rule.points[:, 1]) @ nodal_dT
    int_dT = float(rule.weights @ dT)
    eps_t = material.thermal_strain_coefficient * np.array([1.0, 1.0, 0.0])
    f = kernel.eps_m.T @ kernel.Dmat @ eps_t * int_dT
    kernel.F_th = kernel.Pi_star.T @ f
    return kernel.F_th
