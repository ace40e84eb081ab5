import numpy as np
import pytest

from rodfe import rotations as rot
from rodfe.errors import CutLocus, DegenerateQuaternion, NotARotation

from oracles import rodrigues, se3_exp


def test_identity_quaternion():
    assert np.allclose(rot.quat_to_rotation([1.0, 0, 0, 0]), np.eye(3), atol=0)


def test_half_turn_about_x():
    A = rot.quat_to_rotation([0.0, 1.0, 0.0, 0.0])
    assert np.allclose(A, np.diag([1.0, -1.0, -1.0]), atol=1e-15)


def test_quarter_turn_matches_rodrigues():
    A = rot.quat_to_rotation([1.0, 1.0, 0.0, 0.0])
    assert np.allclose(A, rodrigues([1.0, 0, 0], np.pi / 2), atol=1e-14)
    assert np.allclose(A, [[1, 0, 0], [0, 0, -1], [0, 1, 0]], atol=1e-14)


def test_scale_invariance():
    assert np.allclose(rot.quat_to_rotation([2.0, 0, 0, 0]), np.eye(3), atol=0)
    rng = np.random.default_rng(3)
    for _ in range(50):
        P = rng.normal(size=4)
        s = rng.uniform(0.1, 10.0) * rng.choice([-1.0, 1.0])
        assert np.allclose(
            rot.quat_to_rotation(s * P), rot.quat_to_rotation(P), atol=1e-14
        )


def test_orthonormality_and_determinant():
    rng = np.random.default_rng(4)
    for _ in range(200):
        A = rot.quat_to_rotation(rng.normal(size=4))
        assert np.abs(A.T @ A - np.eye(3)).max() < 1e-12
        assert abs(np.linalg.det(A) - 1.0) < 1e-12


def test_degenerate_quaternion_raises():
    with pytest.raises(DegenerateQuaternion):
        rot.quat_to_rotation([0.0, 0.0, 0.0, 0.0])
    with pytest.raises(DegenerateQuaternion):
        rot.quat_tangent(np.full(4, 1e-9))


def test_tangent_at_identity():
    T = rot.quat_tangent([1.0, 0, 0, 0])
    assert np.allclose(T, np.hstack([np.zeros((3, 1)), 2.0 * np.eye(3)]), atol=0)


def test_tangent_homogeneity():
    rng = np.random.default_rng(5)
    P = rng.normal(size=4)
    for s in (0.5, 2.0, 7.3):
        assert np.allclose(rot.quat_tangent(s * P), rot.quat_tangent(P) / s, atol=1e-13)


def test_tangent_finite_difference_consistency():
    # kappa = T(P) P' must match vee(A^T dA) under central differences
    rng = np.random.default_rng(6)
    h = 1e-6
    for _ in range(25):
        P = rng.normal(size=4)
        P /= np.linalg.norm(P)
        dP = rng.normal(size=4)
        dA = (rot.quat_to_rotation(P + h * dP) - rot.quat_to_rotation(P - h * dP)) / (
            2 * h
        )
        M = rot.quat_to_rotation(P).T @ dA
        vee = 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])
        assert np.abs(rot.quat_tangent(P) @ dP - vee).max() < 1e-6


def test_rate_map_is_right_inverse_of_tangent():
    rng = np.random.default_rng(7)
    for _ in range(20):
        P = rng.normal(size=4) * rng.uniform(0.2, 3.0)
        TQ = rot.quat_tangent(P) @ rot.rotation_rate_map(P)
        assert np.abs(TQ - np.eye(3)).max() < 1e-12


def test_quat_multiply_homomorphism():
    rng = np.random.default_rng(8)
    for _ in range(20):
        Pa, Pb = rng.normal(size=4), rng.normal(size=4)
        left = rot.quat_to_rotation(rot.quat_multiply(Pa, Pb))
        right = rot.quat_to_rotation(Pa) @ rot.quat_to_rotation(Pb)
        assert np.abs(left - right).max() < 1e-12


def test_spurrier_identity():
    assert np.allclose(rot.rotation_to_quat(np.eye(3)), [1.0, 0, 0, 0], atol=0)


def test_spurrier_half_turn():
    P = rot.rotation_to_quat(np.diag([1.0, -1.0, -1.0]))
    assert np.allclose(np.abs(P), [0.0, 1.0, 0.0, 0.0], atol=1e-15)
    # tie-break: p0 ~ 0, largest vector component made positive
    assert P[1] > 0


def test_spurrier_round_trip():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        P = rng.normal(size=4)
        A = rot.quat_to_rotation(P)
        Q = rot.rotation_to_quat(A)
        assert abs(Q @ Q - 1.0) < 1e-12
        assert Q[0] > -1e-12
        assert np.abs(rot.quat_to_rotation(Q) - A).max() < 1e-12


def test_spurrier_rejects_non_rotation():
    with pytest.raises(NotARotation):
        rot.rotation_to_quat(np.eye(3) + 1e-6)
    with pytest.raises(NotARotation):
        rot.rotation_to_quat(np.diag([1.0, 1.0, -1.0]))  # det = -1


def test_se3_log_identity():
    assert np.allclose(rot.se3_log(np.eye(4)), np.zeros(6), atol=0)


def test_se3_log_pure_translation():
    H = np.eye(4)
    H[:3, 3] = [1.0, -2.0, 3.0]
    assert np.allclose(rot.se3_log(H), [1.0, -2.0, 3.0, 0, 0, 0], atol=0)


def test_se3_log_exp_round_trip():
    rng = np.random.default_rng(10)
    for _ in range(100):
        theta = rng.normal(size=6)
        theta *= rng.uniform(0.0, 1.0) / np.linalg.norm(theta)
        H = se3_exp(theta)
        assert np.abs(rot.se3_log(H) - theta).max() < 1e-10


def test_se3_log_cut_locus():
    H = np.eye(4)
    H[:3, :3] = rodrigues([0.0, 0, 1], np.pi - 1e-9)
    with pytest.raises(CutLocus):
        rot.se3_log(H)
