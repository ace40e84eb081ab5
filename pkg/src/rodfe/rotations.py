"""Rotation and pose kernels: quaternion map, tangent operator, Spurrier
extraction and the SE(3) logarithm used by the twist error metric.

Quaternions are stored scalar-first as length-4 arrays P = (p0, p). The map
to SO(3) divides by the squared norm, so it returns proper orthonormal
matrices for non-unit quaternions as well; only the norm has to stay away
from zero.
"""

import numpy as np

from .errors import CutLocus, DegenerateQuaternion, NotARotation

# quaternion degeneracy guard; interpolated quaternions stay near unit norm
# as long as consecutive nodes lie in the same hemisphere, so tripping this
# signals corrupted data
NORM_EPS = 1.0e-8

# distance to the pi-rotation cut locus of the rotation logarithm
CUT_EPS = 1.0e-6

# below this angle the logarithm/Jacobian switch to series expansions
_ANGLE_SINGULAR = 1.0e-8


def skew(a):
    """Skew-symmetric matrix of a 3-vector, skew(a) @ b = a x b."""
    return np.array(
        [
            [0.0, -a[2], a[1]],
            [a[2], 0.0, -a[0]],
            [-a[1], a[0], 0.0],
        ]
    )


def _norm2(P):
    # unconjugated sum of squares so complex-step perturbations propagate
    return P @ P


def quat_to_rotation(P):
    """Rotation matrix of a (possibly non-unit) quaternion.

    A(P) = I + 2 (p0 * skew(p) + skew(p)^2) / ||P||^2, which is orthonormal
    for every P with nonzero norm and invariant under scaling of P.
    """
    P = np.asarray(P)
    s = _norm2(P)
    if not np.iscomplexobj(P) and s <= NORM_EPS**2:
        raise DegenerateQuaternion(f"|P|^2 = {s:.3e}")
    p0, p = P[0], P[1:]
    ptilde = skew(p)
    return np.eye(3) + 2.0 * (p0 * ptilde + ptilde @ ptilde) / s


def quat_tangent(P):
    """Tangent operator T(P) with kappa_bar = T(P) @ P_xi.

    T(P) = 2/||P||^2 * (-p | p0*I - skew(p)); for the rotation field of the
    quaternion map it satisfies skew(T(P) P') = A(P)^T d/dxi A(P).
    """
    P = np.asarray(P)
    s = _norm2(P)
    if not np.iscomplexobj(P) and s <= NORM_EPS**2:
        raise DegenerateQuaternion(f"|P|^2 = {s:.3e}")
    p0, p = P[0], P[1:]
    T = np.empty((3, 4), dtype=P.dtype)
    T[:, 0] = -p
    T[:, 1:] = p0 * np.eye(3) - skew(p)
    return 2.0 / s * T


def rotation_rate_map(P):
    """Map from angular-velocity components in the cross-section basis to
    quaternion rates, dP = rotation_rate_map(P) @ omega.

    With the quaternion product convention used here this is
    0.5 * (-p^T; p0*I + skew(p)) and satisfies quat_tangent(P) @ Q(P) = I.
    """
    P = np.asarray(P)
    p0, p = P[0], P[1:]
    Q = np.empty((4, 3), dtype=P.dtype)
    Q[0] = -p
    Q[1:] = p0 * np.eye(3) + skew(p)
    return 0.5 * Q


def quat_multiply(P, R):
    """Hamilton product; satisfies A(P o R) = A(P) @ A(R)."""
    p0, p = P[0], np.asarray(P[1:])
    r0, r = R[0], np.asarray(R[1:])
    return np.concatenate(([p0 * r0 - p @ r], p0 * r + r0 * p + np.cross(p, r)))


def check_rotation(A, tol=1.0e-8):
    """Raise NotARotation if A is not orthonormal with determinant +1."""
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3):
        raise NotARotation(f"expected 3x3 matrix, got {A.shape}")
    defect = np.max(np.abs(A.T @ A - np.eye(3)))
    if defect > tol or np.linalg.det(A) < 0.0:
        raise NotARotation(f"orthonormality defect {defect:.3e}")


def rotation_to_quat(A):
    """Unit quaternion of a rotation matrix via Spurrier's branch selection.

    The branch is chosen by the largest of the trace and the diagonal
    entries for numerical robustness.  The sign convention is p0 >= 0,
    falling back to the largest-magnitude vector component positive when
    p0 is (numerically) zero, so that the output is deterministic.
    """
    check_rotation(A)
    tr = A[0, 0] + A[1, 1] + A[2, 2]
    k = int(np.argmax([tr, A[0, 0], A[1, 1], A[2, 2]]))
    P = np.empty(4)
    if k == 0:
        p0 = 0.5 * np.sqrt(1.0 + tr)
        P[0] = p0
        P[1] = (A[2, 1] - A[1, 2]) / (4.0 * p0)
        P[2] = (A[0, 2] - A[2, 0]) / (4.0 * p0)
        P[3] = (A[1, 0] - A[0, 1]) / (4.0 * p0)
    else:
        i = k - 1
        j, l = (i + 1) % 3, (i + 2) % 3
        pi = np.sqrt(0.5 * A[i, i] + 0.25 * (1.0 - tr))
        P[1 + i] = pi
        P[0] = (A[l, j] - A[j, l]) / (4.0 * pi)
        P[1 + j] = (A[j, i] + A[i, j]) / (4.0 * pi)
        P[1 + l] = (A[l, i] + A[i, l]) / (4.0 * pi)
    P /= np.sqrt(P @ P)
    if P[0] < -1.0e-12:
        P = -P
    elif abs(P[0]) <= 1.0e-12:
        m = 1 + int(np.argmax(np.abs(P[1:])))
        if P[m] < 0.0:
            P = -P
    return P


def so3_log(A):
    """Rotation vector of A; raises CutLocus for angles >= pi - CUT_EPS."""
    ca = np.clip(0.5 * (A[0, 0] + A[1, 1] + A[2, 2] - 1.0), -1.0, 1.0)
    angle = np.arccos(ca)
    if angle >= np.pi - CUT_EPS:
        raise CutLocus(f"rotation angle {angle:.6f} too close to pi")
    psi = 0.5 * np.array([A[2, 1] - A[1, 2], A[0, 2] - A[2, 0], A[1, 0] - A[0, 1]])
    if angle > _ANGLE_SINGULAR:
        psi *= angle / np.sin(angle)
    return psi


def euclidean_transform(A, r):
    """4x4 homogeneous matrix with rotation block A and translation r."""
    H = np.eye(4)
    H[:3, :3] = A
    H[:3, 3] = r
    return H


def se3_log(H):
    """Twist theta = (translational, rotational) with Exp(theta) = H.

    Raises CutLocus when the rotation angle is within CUT_EPS of pi.
    """
    H = np.asarray(H, dtype=float)
    psi = so3_log(H[:3, :3])
    angle2 = psi @ psi
    if angle2 > _ANGLE_SINGULAR**2:
        angle = np.sqrt(angle2)
        ptilde = skew(psi)
        # inverse of the left Jacobian of SO(3)
        c = (1.0 - 0.5 * angle * np.sin(angle) / (1.0 - np.cos(angle))) / angle2
        Vinv = np.eye(3) - 0.5 * ptilde + c * (ptilde @ ptilde)
    else:
        Vinv = np.eye(3) - 0.5 * skew(psi)
    return np.concatenate((Vinv @ H[:3, 3], psi))
