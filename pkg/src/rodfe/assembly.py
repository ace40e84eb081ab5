"""Element and global residual/Jacobian assembly.

Unknown vector layout: x = [q | lam_c | lam_bc] with the nodal coordinates
q (7 per node: centerline position, quaternion), the compliance multipliers
lam_c (mixed formulation only, 6p per element: nodal resultant contact
forces/moments) and the boundary-condition multipliers lam_bc.

Residual row layout: [virtual-work rows (6 per node) | compliance rows
(MX) | quaternion unit-norm rows (1 per node) | constraint rows].  The
norm rows carry no multipliers: together with the 6N virtual-work rows
they exactly balance the 7N kinematic unknowns.

Geometric Jacobian blocks are differentiated element-wise with complex
step (machine-exact); blocks that are linear in the multipliers are
assembled analytically.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import rotations
from .errors import DegenerateQuaternion, MisplacedPointLoad
from .mesh import Discretization, ReferenceGeometry

_CS_STEP = 1.0e-30  # complex-step size


# ----------------------------------------------------------------------
# batched kinematic kernels (complex-step capable)
# ----------------------------------------------------------------------
def _skew_batch(v):
    S = np.zeros(v.shape[:-1] + (3, 3), dtype=v.dtype)
    S[..., 0, 1] = -v[..., 2]
    S[..., 0, 2] = v[..., 1]
    S[..., 1, 0] = v[..., 2]
    S[..., 1, 2] = -v[..., 0]
    S[..., 2, 0] = -v[..., 1]
    S[..., 2, 1] = v[..., 0]
    return S


def _rotation_batch(P):
    """quat_to_rotation for a (B, 4) array of quaternions."""
    s = np.sum(P * P, axis=-1)
    if not np.iscomplexobj(P) and np.min(s) <= rotations.NORM_EPS**2:
        raise DegenerateQuaternion("interpolated quaternion close to zero")
    px = _skew_batch(P[..., 1:])
    return (
        np.eye(3)
        + 2.0 * (P[..., :1, None] * px + px @ px) / s[..., None, None]
    )


def _curvature_batch(P, P_xi):
    """Scaled curvature T(P) @ P_xi for (B, 4) arrays."""
    s = np.sum(P * P, axis=-1)
    p0, pv = P[..., :1], P[..., 1:]
    q0, qv = P_xi[..., :1], P_xi[..., 1:]
    return 2.0 * (-q0 * pv + p0 * qv - np.cross(pv, qv)) / s[..., None]


@dataclass(frozen=True)
class _ShapeTables:
    """Shape-function values at the quadrature points of one element
    (identical for all elements of the uniform mesh)."""

    N: np.ndarray  # (m, p+1) kinematic/test values
    dN: np.ndarray  # (m, p+1) xi-derivatives
    Nf: np.ndarray  # (m, p) force-field values (degree p-1)
    w: np.ndarray  # (m,) weights


def _make_tables(disc, ref):
    m = ref.weights.shape[0]
    N = np.empty((m, disc.p + 1))
    dN = np.empty((m, disc.p + 1))
    Nf = np.empty((m, disc.p))
    for g in range(m):
        N[g], dN[g] = disc.basis(0, ref.points[0, g])
        Nf[g] = disc.force_basis(0, ref.points[0, g])
    return _ShapeTables(N=N, dN=dN, Nf=Nf, w=ref.weights.copy())


def _element_rows(tables, ref, q_nodes, law=None, lam_nodes=None):
    """Internal virtual-work rows of all elements, plus the compliance
    length rows when multipliers are given.

    q_nodes: (n_el, p+1, 7).  With ``law`` the stress comes from the
    constitutive equations (displacement-based); with ``lam_nodes``
    (n_el, p, 6) it is interpolated from the nodal multipliers (mixed).
    Returns (kin_rows (n_el, p+1, 6), lc_rows (n_el, p, 6) or None).
    """
    N, dN, Nf, w = tables.N, tables.dN, tables.Nf, tables.w
    r_nodes = q_nodes[..., :3]
    P_nodes = q_nodes[..., 3:]
    kin = np.zeros(q_nodes.shape[:2] + (6,), dtype=q_nodes.dtype)
    lc = None
    if lam_nodes is not None:
        lc = np.zeros(lam_nodes.shape[:1] + (Nf.shape[1], 6), dtype=q_nodes.dtype)
    for g in range(w.shape[0]):
        r_xi = np.einsum("i,eik->ek", dN[g], r_nodes)
        P = np.einsum("i,eik->ek", N[g], P_nodes)
        P_xi = np.einsum("i,eik->ek", dN[g], P_nodes)
        A = _rotation_batch(P)
        gamma = np.einsum("eji,ej->ei", A, r_xi)
        kappa = _curvature_batch(P, P_xi)
        if lam_nodes is None:
            eps_g = (gamma - ref.gamma_bar0[:, g]) / ref.J[:, g, None]
            eps_k = (kappa - ref.kappa_bar0[:, g]) / ref.J[:, g, None]
            n = law.stiffness_gamma * eps_g
            mm = law.stiffness_kappa * eps_k
        else:
            n = np.einsum("j,ejk->ek", Nf[g], lam_nodes[..., :3])
            mm = np.einsum("j,ejk->ek", Nf[g], lam_nodes[..., 3:])
            lc[..., :3] += w[g] * Nf[g][None, :, None] * (
                (gamma - ref.gamma_bar0[:, g])[:, None, :]
            )
            lc[..., 3:] += w[g] * Nf[g][None, :, None] * (
                (kappa - ref.kappa_bar0[:, g])[:, None, :]
            )
        An = np.einsum("eij,ej->ei", A, n)
        arm = np.cross(gamma, n) + np.cross(kappa, mm)
        kin[..., :3] -= w[g] * dN[g][None, :, None] * An[:, None, :]
        kin[..., 3:] -= w[g] * (
            dN[g][None, :, None] * mm[:, None, :]
            - N[g][None, :, None] * arm[:, None, :]
        )
    return kin, lc


def _compliance_directions(tables, ref, q_nodes):
    """Matrix of compliance force directions W_c per element,
    (n_el, 6(p+1), 6p); pairs test directions with nodal multipliers."""
    N, dN, Nf, w = tables.N, tables.dN, tables.Nf, tables.w
    n_el, nn = q_nodes.shape[0], q_nodes.shape[1]
    nf = Nf.shape[1]
    W = np.zeros((n_el, nn, 6, nf, 6))
    for g in range(w.shape[0]):
        r_xi = np.einsum("i,eik->ek", dN[g], q_nodes[..., :3])
        P = np.einsum("i,eik->ek", N[g], q_nodes[..., 3:])
        P_xi = np.einsum("i,eik->ek", dN[g], q_nodes[..., 3:])
        A = _rotation_batch(P)
        gamma = np.einsum("eji,ej->ei", A, r_xi)
        kappa = _curvature_batch(P, P_xi)
        W[:, :, :3, :, :3] -= w[g] * np.einsum("i,j,exy->eixjy", dN[g], Nf[g], A)
        W[:, :, 3:, :, :3] += w[g] * np.einsum(
            "i,j,exy->eixjy", N[g], Nf[g], _skew_batch(gamma)
        )
        W[:, :, 3:, :, 3:] -= w[g] * (
            np.einsum("i,j,xy->ixjy", dN[g], Nf[g], np.eye(3))[None]
            - np.einsum("i,j,exy->eixjy", N[g], Nf[g], _skew_batch(kappa))
        )
    return W.reshape(n_el, 6 * nn, 6 * nf)


def _compliance_matrix(disc, law, tables, ref):
    """Constant compliance blocks Kc^{-1} per element, (n_el, 6p, 6p)."""
    M = np.einsum("g,gi,gj,eg->eij", tables.w, tables.Nf, tables.Nf, ref.J)
    K = np.zeros((disc.n_el, 6 * disc.p, 6 * disc.p))
    view = K.reshape(disc.n_el, disc.p, 6, disc.p, 6)
    for c in range(3):
        view[:, :, c, :, c] = law.compliance_gamma[c] * M
        view[:, :, 3 + c, :, 3 + c] = law.compliance_kappa[c] * M
    return K


# ----------------------------------------------------------------------
# loads
# ----------------------------------------------------------------------
def _linear_ramp(t):
    return t


@dataclass(frozen=True)
class PointLoad:
    """Force/moment at an element boundary.

    ``frame`` fixes the components: inertial forces and cross-section
    moments are configuration-independent, the two opposite pairings
    rotate with the cross section at the load point.
    """

    xi: float
    force: np.ndarray | None = None
    moment: np.ndarray | None = None
    frame: str = "inertial"  # or "cross_section"

    def __post_init__(self):
        if self.frame not in ("inertial", "cross_section"):
            raise ValueError(f"unknown frame {self.frame!r}")
        if self.force is not None:
            object.__setattr__(self, "force", np.asarray(self.force, dtype=float))
        if self.moment is not None:
            object.__setattr__(self, "moment", np.asarray(self.moment, dtype=float))


@dataclass(frozen=True)
class LoadCase:
    """Distributed and point loads with a scalar load schedule.

    Distributed force components are inertial, distributed moment
    components cross-section-fixed; both are densities with respect to
    the reference arc length with polynomial degree p_ext.
    """

    point_loads: tuple = ()
    distributed_force: Callable | None = None
    distributed_moment: Callable | None = None
    p_ext: int = 0
    scaling: Callable = _linear_ramp

    @property
    def has_distributed(self):
        return self.distributed_force is not None or self.distributed_moment is not None


# ----------------------------------------------------------------------
# bilateral constraints
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Clamp:
    """Node pose fixed to its reference placement (6 constraint rows)."""

    xi: float


@dataclass(frozen=True)
class DrivenRotation:
    """Prescribed rotation angle about a fixed inertial axis at a node.

    One constraint row; the multiplier is the driving moment about the
    axis.  The residual is the angle deviation wrapped to (-pi, pi], so
    prescribed angles may exceed pi (winding is tracked by continuation).
    """

    xi: float
    angle: Callable[[float], float]
    axis: int = 0


def _wrap_pi(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


class _ClampImpl:
    n_rows = 6

    def __init__(self, node, r_ref, A_ref):
        self.node = node
        self.r_ref = r_ref
        self.A_ref = A_ref

    def rows(self, r, P, t):
        return np.concatenate((r - self.r_ref, self.rotation_rows(P)))

    def rotation_rows(self, P):
        # scale-invariant in P; vanishes iff A(P) equals the reference
        R = self.A_ref.T @ _rotation_batch(P[None])[0]
        return np.array([R[2, 1], R[0, 2], R[1, 0]])

    def force_map(self, P):
        """G with delta(g) = G @ (delta r, delta phi); rotational part from
        delta A = A skew(delta phi)."""
        R = self.A_ref.T @ _rotation_batch(P[None])[0]
        G = np.zeros((6, 6), dtype=P.dtype)
        G[:3, :3] = np.eye(3)
        G[3, 3:] = (R[2, 2], 0.0, -R[2, 0])
        G[4, 3:] = (-R[0, 1], R[0, 0], 0.0)
        G[5, 3:] = (0.0, -R[1, 2], R[1, 1])
        return G


class _DrivenRotationImpl:
    n_rows = 1

    def __init__(self, node, A_ref, angle, axis):
        self.node = node
        self.A_ref = A_ref
        self.angle = angle
        self.axis = axis
        i = axis
        self._j, self._k = (i + 1) % 3, (i + 2) % 3

    def _atan2_args(self, P):
        R = _rotation_batch(P[None])[0] @ self.A_ref.T
        j, k = self._j, self._k
        return R[k, j] - R[j, k], R[j, j] + R[k, k]

    def extracted_angle(self, P):
        f1, f2 = self._atan2_args(P)
        return np.arctan2(f1, f2)

    def rows(self, r, P, t):
        return np.array([_wrap_pi(self.extracted_angle(P) - self.angle(t))])

    def force_map(self, P):
        """d(angle)/d(delta phi) with the virtual rotation in the
        cross-section basis; exact conjugate of the axis moment while the
        relative rotation stays about the axis."""
        A = _rotation_batch(P[None])[0]
        j, k = self._j, self._k
        f1, f2 = self._atan2_args(P)
        # dR[i, j] = dphi . (A_ref_row_j x A_row_i)
        df1 = np.cross(self.A_ref[j], A[k]) - np.cross(self.A_ref[k], A[j])
        df2 = np.cross(self.A_ref[j], A[j]) + np.cross(self.A_ref[k], A[k])
        G = np.zeros((1, 6), dtype=P.dtype)
        G[0, 3:] = (f2 * df1 - f1 * df2) / (f1 * f1 + f2 * f2)
        return G

    def row_jacobian_quat(self, P):
        """d(angle)/dP via complex step of the atan2 arguments."""
        f1, f2 = self._atan2_args(P)
        d = np.empty(4)
        for c in range(4):
            Pc = P.astype(complex)
            Pc[c] += 1j * _CS_STEP
            f1c, f2c = self._atan2_args(Pc)
            d[c] = (f2 * f1c.imag - f1 * f2c.imag) / _CS_STEP / (f1 * f1 + f2 * f2)
        return d


# ----------------------------------------------------------------------
# the assembled static problem
# ----------------------------------------------------------------------
class StaticProblem:
    """Static equilibrium of one rod: residual and Jacobian over the full
    unknown vector, ready for a root finder."""

    def __init__(self, disc: Discretization, law, q_ref, load=None, constraints=()):
        self.disc = disc
        self.law = law
        self.q_ref = np.asarray(q_ref, dtype=float)
        self.load = load if load is not None else LoadCase()

        m = disc.internal_quadrature_order()
        self.ref = disc.reference_geometry(self.q_ref, m)
        self.tables = _make_tables(disc, self.ref)

        if disc.formulation == "MX":
            self.Kc_inv = _compliance_matrix(disc, law, self.tables, self.ref)
        else:
            law.stiffness_gamma  # raises ConstrainedLaw early for rigid laws
            self.Kc_inv = None

        # external loads
        self._point_loads = []
        for pl in self.load.point_loads:
            e_float = pl.xi * disc.n_el
            e = int(round(e_float))
            if abs(e_float - e) > 1.0e-9 or not 0 <= e <= disc.n_el:
                raise MisplacedPointLoad(
                    f"xi = {pl.xi} is not an element boundary for n_el = {disc.n_el}"
                )
            self._point_loads.append((disc.p * e, pl))
        if self.load.has_distributed:
            m_ext = disc.external_quadrature_order(self.load.p_ext)
            self.ref_ext = disc.reference_geometry(self.q_ref, m_ext)
            self.tables_ext = _make_tables(disc, self.ref_ext)
        else:
            self.ref_ext = None

        # constraints, resolved to nodes and reference poses
        self._constraints = []
        for c in constraints:
            k_float = c.xi * (disc.n_nodes - 1)
            k = int(round(k_float))
            if abs(k_float - k) > 1.0e-9:
                raise ValueError(f"constraint xi = {c.xi} is not a node")
            r_ref = self.q_ref[7 * k : 7 * k + 3].copy()
            A_ref = rotations.quat_to_rotation(self.q_ref[7 * k + 3 : 7 * k + 7])
            if isinstance(c, Clamp):
                self._constraints.append(_ClampImpl(k, r_ref, A_ref))
            elif isinstance(c, DrivenRotation):
                self._constraints.append(_DrivenRotationImpl(k, A_ref, c.angle, c.axis))
            else:
                raise TypeError(f"unknown constraint {c!r}")

        # unknown/row offsets
        N = disc.n_nodes
        self.nq = 7 * N
        self.nlam = disc.n_multipliers
        self.nbc = sum(c.n_rows for c in self._constraints)
        self.n_unknowns = self.nq + self.nlam + self.nbc
        self._row_comp = 6 * N
        self._row_gs = self._row_comp + self.nlam
        self._row_bc = self._row_gs + N

        # scatter index grids for the element Jacobian blocks
        d = disc
        self._kin_rows = np.broadcast_to(
            d.elem_test_dofs[:, :, None],
            (d.n_el, 6 * (d.p + 1), 7 * (d.p + 1)),
        ).ravel()
        self._kin_cols = np.broadcast_to(
            d.elem_q_dofs[:, None, :],
            (d.n_el, 6 * (d.p + 1), 7 * (d.p + 1)),
        ).ravel()
        if self.nlam:
            lam_cols = self.nq + d.elem_lam_dofs
            self._kinlam_rows = np.broadcast_to(
                d.elem_test_dofs[:, :, None], (d.n_el, 6 * (d.p + 1), 6 * d.p)
            ).ravel()
            self._kinlam_cols = np.broadcast_to(
                lam_cols[:, None, :], (d.n_el, 6 * (d.p + 1), 6 * d.p)
            ).ravel()
            comp_rows = self._row_comp + d.elem_lam_dofs
            self._comp_rows_q = np.broadcast_to(
                comp_rows[:, :, None], (d.n_el, 6 * d.p, 7 * (d.p + 1))
            ).ravel()
            self._comp_cols_q = np.broadcast_to(
                d.elem_q_dofs[:, None, :], (d.n_el, 6 * d.p, 7 * (d.p + 1))
            ).ravel()
            self._comp_rows_lam = np.broadcast_to(
                comp_rows[:, :, None], (d.n_el, 6 * d.p, 6 * d.p)
            ).ravel()
            self._comp_cols_lam = np.broadcast_to(
                lam_cols[:, None, :], (d.n_el, 6 * d.p, 6 * d.p)
            ).ravel()

    # ------------------------------------------------------------------
    def initial_state(self):
        """Reference coordinates with zero multipliers; satisfies g_S = 0."""
        x = np.zeros(self.n_unknowns)
        x[: self.nq] = self.q_ref
        return x

    def _split(self, x):
        return (
            x[: self.nq],
            x[self.nq : self.nq + self.nlam],
            x[self.nq + self.nlam :],
        )

    def _gather(self, q):
        return q.reshape(self.disc.n_nodes, 7)[self.disc.elem_nodes]

    # ------------------------------------------------------------------
    # pieces (also the public in-process API used by the tests)
    # ------------------------------------------------------------------
    def internal_force(self, q):
        """Displacement-based internal forces, (6N,)."""
        kin, _ = _element_rows(self.tables, self.ref, self._gather(q), law=self.law)
        return self._scatter_kin(kin)

    def mixed_kinematic_force(self, q, lam_c):
        """W_c(q) @ lam_c evaluated through the interpolated stress."""
        lam_nodes = lam_c.reshape(self.disc.n_el, self.disc.p, 6)
        kin, _ = _element_rows(
            self.tables, self.ref, self._gather(q), lam_nodes=lam_nodes
        )
        return self._scatter_kin(kin)

    def compliance_rows(self, q, lam_c):
        """Kc^{-1} lam_c - l_c(q), flat (6 p n_el,)."""
        lam_nodes = lam_c.reshape(self.disc.n_el, self.disc.p, 6)
        _, lc = _element_rows(
            self.tables, self.ref, self._gather(q), lam_nodes=lam_nodes
        )
        lam_e = lam_c.reshape(self.disc.n_el, 6 * self.disc.p)
        out = np.einsum("eij,ej->ei", self.Kc_inv, lam_e)
        out = out - lc.reshape(self.disc.n_el, 6 * self.disc.p)
        return out.ravel()

    def compliance_direction_matrix(self, q):
        """Element blocks W_c,e, (n_el, 6(p+1), 6p)."""
        return _compliance_directions(self.tables, self.ref, self._gather(q))

    def _scatter_kin(self, kin):
        f = np.zeros(6 * self.disc.n_nodes, dtype=kin.dtype)
        np.add.at(f.reshape(self.disc.n_nodes, 6), self.disc.elem_nodes, kin)
        return f

    def external_force(self, q, t):
        """Generalized external forces at load parameter t, (6N,)."""
        s = self.load.scaling(t)
        f = np.zeros(6 * self.disc.n_nodes, dtype=np.asarray(q).dtype)
        fv = f.reshape(self.disc.n_nodes, 6)
        for node, pl in self._point_loads:
            P = q[7 * node + 3 : 7 * node + 7]
            if pl.force is not None:
                if pl.frame == "inertial":
                    fv[node, :3] += s * pl.force
                else:
                    A = _rotation_batch(P[None])[0]
                    fv[node, :3] += s * (A @ pl.force)
            if pl.moment is not None:
                if pl.frame == "cross_section":
                    fv[node, 3:] += s * pl.moment
                else:
                    A = _rotation_batch(P[None])[0]
                    fv[node, 3:] += s * (A.T @ pl.moment)
        if self.ref_ext is not None:
            tab, ref = self.tables_ext, self.ref_ext
            for g in range(tab.w.shape[0]):
                Jw = tab.w[g] * ref.J[:, g]
                if self.load.distributed_force is not None:
                    b = np.array(
                        [self.load.distributed_force(x) for x in ref.points[:, g]]
                    )
                    np.add.at(
                        fv[:, :3],
                        self.disc.elem_nodes,
                        s * Jw[:, None, None] * tab.N[g][None, :, None] * b[:, None, :],
                    )
                if self.load.distributed_moment is not None:
                    c = np.array(
                        [self.load.distributed_moment(x) for x in ref.points[:, g]]
                    )
                    np.add.at(
                        fv[:, 3:],
                        self.disc.elem_nodes,
                        s * Jw[:, None, None] * tab.N[g][None, :, None] * c[:, None, :],
                    )
        return f

    def quaternion_constraints(self, q):
        """g_S with one unit-norm row per node."""
        Pn = q.reshape(self.disc.n_nodes, 7)[:, 3:]
        return np.sum(Pn * Pn, axis=1) - 1.0

    # ------------------------------------------------------------------
    def residual(self, x, t):
        q, lam_c, lam_bc = self._split(x)
        if self.nlam:
            f_kin = self.mixed_kinematic_force(q, lam_c)
        else:
            f_kin = self.internal_force(q)
        f_kin = f_kin + self.external_force(q, t)

        rows_bc = np.empty(self.nbc)
        off = 0
        for c in self._constraints:
            k = c.node
            r = q[7 * k : 7 * k + 3]
            P = q[7 * k + 3 : 7 * k + 7]
            lam = lam_bc[off : off + c.n_rows]
            rows_bc[off : off + c.n_rows] = c.rows(r, P, t)
            G = c.force_map(P)
            f_kin[6 * k : 6 * k + 6] += G.T @ lam
            off += c.n_rows

        parts = [f_kin]
        if self.nlam:
            parts.append(self.compliance_rows(q, lam_c))
        parts.append(self.quaternion_constraints(q))
        parts.append(rows_bc)
        return np.concatenate(parts)

    # ------------------------------------------------------------------
    def jacobian(self, x, t):
        """Jacobian of ``residual`` as a COO matrix.

        Element blocks by complex step of the element rows, multiplier
        blocks analytically (the residual is linear in all multipliers).
        """
        q, lam_c, lam_bc = self._split(x)
        d = self.disc
        q_nodes = self._gather(q)
        lam_nodes = (
            lam_c.reshape(d.n_el, d.p, 6) if self.nlam else None
        )

        nloc = 7 * (d.p + 1)
        K_kin = np.empty((d.n_el, 6 * (d.p + 1), nloc))
        K_lc = np.empty((d.n_el, 6 * d.p, nloc)) if self.nlam else None
        qc = q_nodes.astype(complex).reshape(d.n_el, nloc)
        for dof in range(nloc):
            qc[:, dof] += 1j * _CS_STEP
            kin, lc = _element_rows(
                self.tables,
                self.ref,
                qc.reshape(d.n_el, d.p + 1, 7),
                law=None if self.nlam else self.law,
                lam_nodes=lam_nodes,
            )
            K_kin[:, :, dof] = kin.imag.reshape(d.n_el, -1) / _CS_STEP
            if self.nlam:
                K_lc[:, :, dof] = lc.imag.reshape(d.n_el, -1) / _CS_STEP
            qc[:, dof] = q_nodes.reshape(d.n_el, nloc)[:, dof]

        rows = [self._kin_rows]
        cols = [self._kin_cols]
        vals = [K_kin.ravel()]
        if self.nlam:
            Wc = self.compliance_direction_matrix(q)
            rows += [self._kinlam_rows, self._comp_rows_q, self._comp_rows_lam]
            cols += [self._kinlam_cols, self._comp_cols_q, self._comp_cols_lam]
            vals += [Wc.ravel(), (-K_lc).ravel(), self.Kc_inv.ravel()]

        extra_r, extra_c, extra_v = [], [], []

        def put(r, c, v):
            extra_r.append(np.broadcast_to(r, np.shape(v)).ravel())
            extra_c.append(np.broadcast_to(c, np.shape(v)).ravel())
            extra_v.append(np.asarray(v, dtype=float).ravel())

        # follower point loads
        s = self.load.scaling(t)
        for node, pl in self._point_loads:
            P = q[7 * node + 3 : 7 * node + 7]
            qcols = np.arange(7 * node + 3, 7 * node + 7)
            if pl.force is not None and pl.frame == "cross_section":
                put(
                    np.arange(6 * node, 6 * node + 3)[:, None],
                    qcols[None, :],
                    _cs_block(lambda Pc: s * (_rotation_batch(Pc[None])[0] @ pl.force), P),
                )
            if pl.moment is not None and pl.frame == "inertial":
                put(
                    np.arange(6 * node + 3, 6 * node + 6)[:, None],
                    qcols[None, :],
                    _cs_block(lambda Pc: s * (_rotation_batch(Pc[None])[0].T @ pl.moment), P),
                )

        # quaternion norm rows
        Pn = q.reshape(d.n_nodes, 7)[:, 3:]
        gs_rows = self._row_gs + np.arange(d.n_nodes)
        gs_cols = 7 * np.arange(d.n_nodes)[:, None] + np.arange(3, 7)[None, :]
        put(gs_rows[:, None], gs_cols, 2.0 * Pn)

        # constraints: rows, force columns, and force-state coupling
        off = 0
        for c in self._constraints:
            k = c.node
            P = q[7 * k + 3 : 7 * k + 7]
            lam = lam_bc[off : off + c.n_rows]
            row0 = self._row_bc + off
            col0 = self.nq + self.nlam + off
            qcols = np.arange(7 * k + 3, 7 * k + 7)
            rcols = np.arange(7 * k, 7 * k + 3)
            trans_rows = np.arange(6 * k, 6 * k + 3)
            rot_rows = np.arange(6 * k + 3, 6 * k + 6)
            if isinstance(c, _ClampImpl):
                put(row0 + np.arange(3)[:, None], rcols[None, :], np.eye(3))
                put(
                    row0 + 3 + np.arange(3)[:, None],
                    qcols[None, :],
                    _cs_block(c.rotation_rows, P),
                )
            else:
                put(
                    np.full((1, 4), row0),
                    qcols[None, :],
                    c.row_jacobian_quat(P)[None, :],
                )
            G = c.force_map(P)
            put(
                np.arange(6 * k, 6 * k + 6)[:, None],
                col0 + np.arange(c.n_rows)[None, :],
                G.T,
            )
            # d(G^T lam)/dP; only the rotational rows depend on P
            put(
                rot_rows[:, None],
                qcols[None, :],
                _cs_block(lambda Pc: c.force_map(Pc).T[3:] @ lam, P),
            )
            off += c.n_rows

        rows.append(np.concatenate(extra_r))
        cols.append(np.concatenate(extra_c))
        vals.append(np.concatenate(extra_v))
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_unknowns, self.n_unknowns),
        )


def _cs_block(fn, P):
    """Complex-step Jacobian of a vector function of one quaternion."""
    out = None
    for c in range(4):
        Pc = P.astype(complex)
        Pc[c] += 1j * _CS_STEP
        col = np.asarray(fn(Pc)).imag / _CS_STEP
        if out is None:
            out = np.empty((col.shape[0], 4))
        out[:, c] = col
    return out


# ----------------------------------------------------------------------
# element-level operations (test/inspection surface)
# ----------------------------------------------------------------------
def element_internal_force_db(disc, law, q_e, ref, e=0):
    """Displacement-based internal force of one element, (6(p+1),)."""
    tables = _make_tables(disc, ref)
    ref_e = _slice_ref(ref, e)
    kin, _ = _element_rows(tables, ref_e, np.asarray(q_e).reshape(1, disc.p + 1, 7), law=law)
    return kin.reshape(-1)


def element_mixed_blocks(disc, law, q_e, ref, e=0):
    """(W_c,e, Kc_inv,e, l_c,e) of one element."""
    tables = _make_tables(disc, ref)
    ref_e = _slice_ref(ref, e)
    q_nodes = np.asarray(q_e).reshape(1, disc.p + 1, 7)
    W = _compliance_directions(tables, ref_e, q_nodes)[0]
    lam_nodes = np.zeros((1, disc.p, 6))
    _, lc = _element_rows(tables, ref_e, q_nodes, lam_nodes=lam_nodes)
    K = _compliance_matrix_single(disc, law, tables, ref_e)
    return W, K, lc.reshape(-1)


def _compliance_matrix_single(disc, law, tables, ref_e):
    M = np.einsum("g,gi,gj,g->ij", tables.w, tables.Nf, tables.Nf, ref_e.J[0])
    K = np.zeros((6 * disc.p, 6 * disc.p))
    view = K.reshape(disc.p, 6, disc.p, 6)
    for c in range(3):
        view[:, c, :, c] = law.compliance_gamma[c] * M
        view[:, 3 + c, :, 3 + c] = law.compliance_kappa[c] * M
    return K


def _slice_ref(ref, e):
    return ReferenceGeometry(
        points=ref.points[e : e + 1],
        weights=ref.weights,
        J=ref.J[e : e + 1],
        gamma_bar0=ref.gamma_bar0[e : e + 1],
        kappa_bar0=ref.kappa_bar0[e : e + 1],
    )
