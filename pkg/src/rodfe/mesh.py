"""Mesh, Lagrangian shape functions, quadrature and nodal bookkeeping.

The rod parameter runs over [0, 1], divided into ``n_el`` uniform element
intervals.  Kinematic fields use continuous Lagrange polynomials of degree
p in {1, 2}; the resultant contact force/moment fields of the mixed
formulation use discontinuous degree p-1 polynomials with p nodes per
element.  Nodal kinematic unknowns are (r, P) with 7 components, nodal
test directions (virtual displacement, virtual rotation) have 6.
"""

from dataclasses import dataclass

import numpy as np

from . import rotations
from .errors import DegenerateTangent, OutOfElement, UnsupportedOrder

_SQ3 = np.sqrt(3.0)
_SQ5 = np.sqrt(5.0)
_SQ30 = np.sqrt(30.0)
_SQ70 = np.sqrt(70.0)

# Gauss-Legendre nodes/weights on [-1, 1] in closed form (m <= 5); validated
# against monomial integrals in the test suite
_GAUSS = {
    1: (np.array([0.0]), np.array([2.0])),
    2: (np.array([-1.0, 1.0]) / _SQ3, np.array([1.0, 1.0])),
    3: (
        np.array([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)]),
        np.array([5.0, 8.0, 5.0]) / 9.0,
    ),
    4: (
        np.array(
            [
                -np.sqrt((3.0 + 2.0 * np.sqrt(6.0 / 5.0)) / 7.0),
                -np.sqrt((3.0 - 2.0 * np.sqrt(6.0 / 5.0)) / 7.0),
                np.sqrt((3.0 - 2.0 * np.sqrt(6.0 / 5.0)) / 7.0),
                np.sqrt((3.0 + 2.0 * np.sqrt(6.0 / 5.0)) / 7.0),
            ]
        ),
        np.array(
            [
                (18.0 - _SQ30) / 36.0,
                (18.0 + _SQ30) / 36.0,
                (18.0 + _SQ30) / 36.0,
                (18.0 - _SQ30) / 36.0,
            ]
        ),
    ),
    5: (
        np.array(
            [
                -np.sqrt(5.0 + 2.0 * np.sqrt(10.0 / 7.0)) / 3.0,
                -np.sqrt(5.0 - 2.0 * np.sqrt(10.0 / 7.0)) / 3.0,
                0.0,
                np.sqrt(5.0 - 2.0 * np.sqrt(10.0 / 7.0)) / 3.0,
                np.sqrt(5.0 + 2.0 * np.sqrt(10.0 / 7.0)) / 3.0,
            ]
        ),
        np.array(
            [
                (322.0 - 13.0 * _SQ70) / 900.0,
                (322.0 + 13.0 * _SQ70) / 900.0,
                128.0 / 225.0,
                (322.0 + 13.0 * _SQ70) / 900.0,
                (322.0 - 13.0 * _SQ70) / 900.0,
            ]
        ),
    ),
}


def gauss_rule(m, span=(-1.0, 1.0)):
    """m-point Gauss-Legendre rule mapped to ``span``; exact up to degree 2m-1."""
    if m not in _GAUSS:
        raise UnsupportedOrder(f"Gauss rule with m = {m} points not available")
    x, w = _GAUSS[m]
    a, b = span
    return a + 0.5 * (x + 1.0) * (b - a), 0.5 * (b - a) * w


def lagrange_basis(degree, span, xi):
    """Values and xi-derivatives of the Lagrange basis of given degree on
    ``span`` with equally spaced nodes.

    degree 0 yields the single constant function 1 with derivative 0.
    Raises OutOfElement if xi lies outside the closure of the interval.
    """
    a, b = span
    h = b - a
    if xi < a - 1.0e-12 * max(1.0, abs(h)) or xi > b + 1.0e-12 * max(1.0, abs(h)):
        raise OutOfElement(f"xi = {xi} outside [{a}, {b}]")
    if degree == 0:
        return np.array([1.0]), np.array([0.0])
    nodes = a + np.arange(degree + 1) / degree * h
    values = np.ones(degree + 1)
    derivatives = np.zeros(degree + 1)
    for i in range(degree + 1):
        denom = 1.0
        for j in range(degree + 1):
            if j != i:
                values[i] *= xi - nodes[j]
                denom *= nodes[i] - nodes[j]
        values[i] /= denom
        # derivative via the product-rule sum, stable at the nodes
        for k in range(degree + 1):
            if k == i:
                continue
            term = 1.0
            for j in range(degree + 1):
                if j != i and j != k:
                    term *= xi - nodes[j]
            derivatives[i] += term / denom
    return values, derivatives


@dataclass(frozen=True)
class Kinematics:
    """Interpolated kinematic fields at one point of one element."""

    r: np.ndarray
    r_xi: np.ndarray
    quat: np.ndarray
    quat_xi: np.ndarray

    @property
    def rotation(self):
        return rotations.quat_to_rotation(self.quat)

    @property
    def gamma_bar(self):
        return self.rotation.T @ self.r_xi

    @property
    def kappa_bar(self):
        return rotations.quat_tangent(self.quat) @ self.quat_xi


@dataclass(frozen=True)
class ReferenceGeometry:
    """Per-element, per-quadrature-point reference data (J, strains)."""

    points: np.ndarray  # (n_el, m) global xi
    weights: np.ndarray  # (m,) weights on one element
    J: np.ndarray  # (n_el, m)
    gamma_bar0: np.ndarray  # (n_el, m, 3)
    kappa_bar0: np.ndarray  # (n_el, m, 3)


class Discretization:
    """Uniform rod mesh with degree-p kinematics and degree-(p-1) force fields."""

    def __init__(self, p, n_el, formulation="MX", integration="full"):
        if p not in (1, 2):
            raise ValueError("polynomial degree must be 1 or 2")
        if n_el < 1:
            raise ValueError("need at least one element")
        if formulation not in ("DB", "MX"):
            raise ValueError("formulation must be 'DB' or 'MX'")
        if integration not in ("full", "reduced"):
            raise ValueError("integration must be 'full' or 'reduced'")
        self.p = p
        self.n_el = n_el
        self.formulation = formulation
        self.integration = integration

        self.n_nodes = p * n_el + 1
        self.node_xi = np.linspace(0.0, 1.0, self.n_nodes)
        # force nodes: p per element, degree p-1 layout (single node at the
        # element's left end for p = 1)
        self.force_node_xi = np.concatenate(
            [self.force_nodes(e) for e in range(n_el)]
        )

        # element -> kinematic node indices, (n_el, p+1)
        self.elem_nodes = np.array(
            [[p * e + i for i in range(p + 1)] for e in range(n_el)], dtype=int
        )
        nodes7 = 7 * self.elem_nodes[:, :, None] + np.arange(7)[None, None, :]
        nodes6 = 6 * self.elem_nodes[:, :, None] + np.arange(6)[None, None, :]
        self.elem_q_dofs = nodes7.reshape(n_el, 7 * (p + 1))
        self.elem_test_dofs = nodes6.reshape(n_el, 6 * (p + 1))
        self.elem_lam_dofs = (
            6 * p * np.arange(n_el)[:, None] + np.arange(6 * p)[None, :]
        )

        self.n_kinematic_dofs = 7 * self.n_nodes
        self.n_test_dofs = 6 * self.n_nodes
        self.n_multipliers = 6 * p * n_el if formulation == "MX" else 0

    # ------------------------------------------------------------------
    # geometry of the parameter space
    # ------------------------------------------------------------------
    def elem_span(self, e):
        return e / self.n_el, (e + 1) / self.n_el

    def element_of(self, xi):
        """Element index containing xi; the right endpoint belongs to the
        last element."""
        return min(int(xi * self.n_el), self.n_el - 1)

    def force_nodes(self, e):
        a, b = self.elem_span(e)
        if self.p == 1:
            return np.array([a])
        return a + np.arange(self.p) / (self.p - 1) * (b - a)

    def internal_quadrature_order(self):
        """full: 2 points for p=1, 5 for p=2; reduced: p points."""
        if self.integration == "reduced":
            return self.p
        return 2 if self.p == 1 else 5

    def external_quadrature_order(self, p_ext):
        return int(np.ceil((self.p + p_ext + 1) / 2))

    # ------------------------------------------------------------------
    # shape functions
    # ------------------------------------------------------------------
    def basis(self, e, xi):
        return lagrange_basis(self.p, self.elem_span(e), xi)

    def force_basis(self, e, xi):
        values, _ = lagrange_basis(self.p - 1, self.elem_span(e), xi)
        return values

    def element_coordinates(self, q, e):
        """Element tuple q_e (nodal r and P interleaved), shape (7(p+1),)."""
        return np.asarray(q)[self.elem_q_dofs[e]]

    def interpolate_kinematics(self, q_e, xi, e=None):
        """Interpolated (r, r_xi, P, P_xi) of one element at global xi."""
        if e is None:
            e = self.element_of(xi)
        N, N_xi = self.basis(e, xi)
        nodal = np.asarray(q_e).reshape(self.p + 1, 7)
        r = N @ nodal[:, :3]
        r_xi = N_xi @ nodal[:, :3]
        quat = N @ nodal[:, 3:]
        quat_xi = N_xi @ nodal[:, 3:]
        return Kinematics(r=r, r_xi=r_xi, quat=quat, quat_xi=quat_xi)

    # ------------------------------------------------------------------
    # initialization and reference data
    # ------------------------------------------------------------------
    def initialize_from_curve(self, curve):
        """Nodal coordinates sampling a reference curve xi -> (r, A).

        Quaternions are extracted with Spurrier's algorithm; consecutive
        nodes are kept in the same hemisphere (P_k . P_{k+1} > 0) so the
        interpolated quaternion stays away from zero.
        """
        q = np.empty(self.n_kinematic_dofs)
        prev = None
        for k, xi in enumerate(self.node_xi):
            r, A = curve(xi)
            P = rotations.rotation_to_quat(A)
            if prev is not None and prev @ P < 0.0:
                P = -P
            q[7 * k : 7 * k + 3] = r
            q[7 * k + 3 : 7 * k + 7] = P
            prev = P
        return q

    def quadrature_points(self, m):
        """Global quadrature points/weights, shapes (n_el, m) and (m,)."""
        points = np.empty((self.n_el, m))
        for e in range(self.n_el):
            points[e], weights = gauss_rule(m, self.elem_span(e))
        return points, weights

    def reference_geometry(self, q0, m=None):
        """Reference tangent length and strains at the quadrature points.

        Cached quantities feed the strain measures: with them the reference
        configuration is exactly stress-free.
        """
        if m is None:
            m = self.internal_quadrature_order()
        points, weights = self.quadrature_points(m)
        J = np.empty((self.n_el, m))
        gamma0 = np.empty((self.n_el, m, 3))
        kappa0 = np.empty((self.n_el, m, 3))
        for e in range(self.n_el):
            q_e = self.element_coordinates(q0, e)
            for g in range(m):
                kin = self.interpolate_kinematics(q_e, points[e, g], e)
                Jg = np.linalg.norm(kin.r_xi)
                if Jg <= 1.0e-12:
                    raise DegenerateTangent(
                        f"J = {Jg:.3e} at xi = {points[e, g]:.6f}"
                    )
                J[e, g] = Jg
                gamma0[e, g] = kin.gamma_bar
                kappa0[e, g] = kin.kappa_bar
        return ReferenceGeometry(
            points=points, weights=weights, J=J, gamma_bar0=gamma0, kappa_bar0=kappa0
        )
