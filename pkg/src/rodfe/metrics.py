"""Spatial error measure: root-mean-square of relative twists.

Position and orientation errors are combined by evaluating the SE(3)
logarithm of the relative pose H(xi)^{-1} H_ref(xi) at k uniform sample
points.  The measure is directed (candidate against reference); symmetry
is not implied by the logarithm and not used.
"""

import numpy as np

from . import rotations
from .mesh import Discretization


def pose_evaluator(disc: Discretization, q):
    """Callable xi -> (r, A) of a discretized rod state."""
    q = np.asarray(q, dtype=float)

    def evaluate(xi):
        e = disc.element_of(xi)
        kin = disc.interpolate_kinematics(disc.element_coordinates(q, e), xi, e)
        return kin.r, kin.rotation

    return evaluate


def relative_twist(pose_a, pose_b):
    """Twist of the relative pose taking pose_a to pose_b."""
    r_a, A_a = pose_a
    r_b, A_b = pose_b
    # H_a^{-1} H_b without forming the 4x4 inverse
    A = A_a.T @ A_b
    r = A_a.T @ (r_b - r_a)
    return rotations.se3_log(rotations.euclidean_transform(A, r))


def twist_error(candidate, reference, k=100):
    """RMS of relative-twist norms at k uniform points along the rod.

    ``candidate``/``reference`` are xi -> (r, A) callables (see
    pose_evaluator); relative rotations must stay below pi.
    """
    if k < 2:
        raise ValueError("need at least two sample points")
    acc = 0.0
    for xi in np.linspace(0.0, 1.0, k):
        theta = relative_twist(candidate(xi), reference(xi))
        acc += theta @ theta
    return float(np.sqrt(acc / k))


def convergence_slope(n_values, errors, points=3):
    """Least-squares slope of log(error) against log(N) over the finest
    ``points`` meshes."""
    n_values = np.asarray(n_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    order = np.argsort(n_values)
    n_values, errors = n_values[order], errors[order]
    sel = slice(-points, None)
    return float(np.polyfit(np.log(n_values[sel]), np.log(errors[sel]), 1)[0])
