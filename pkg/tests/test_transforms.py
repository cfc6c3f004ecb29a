import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telekin.transforms import (RigidTransform, quat_distance,
                                quat_from_axis_angle, quat_from_euler_xyz,
                                quat_from_matrix, quat_mul, quat_normalize,
                                quat_rotate, quat_to_euler_xyz,
                                quat_to_matrix, quat_to_rotvec)

finite_angle = st.floats(-10.0, 10.0, allow_nan=False)
coord = st.floats(-5.0, 5.0, allow_nan=False)


def random_quat(rng):
    return quat_normalize(rng.normal(size=4))


def test_identity_roundtrip():
    t = RigidTransform.identity("pelvis")
    assert np.allclose(t.apply([1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


@given(st.lists(coord, min_size=3, max_size=3),
       st.lists(finite_angle, min_size=3, max_size=3))
@settings(max_examples=80, deadline=None)
def test_compose_inverse_is_identity(p, euler):
    t = RigidTransform(np.array(p), quat_from_euler_xyz(*euler))
    ident = t.compose(t.inverse())
    assert np.linalg.norm(ident.p) < 1e-9
    assert quat_distance(ident.q, np.array([1.0, 0, 0, 0])) < 1e-9


@given(st.lists(finite_angle, min_size=3, max_size=3))
@settings(max_examples=80, deadline=None)
def test_quat_unit_norm_after_composition(euler):
    q = quat_from_euler_xyz(*euler)
    q2 = quat_mul(q, q)
    assert abs(np.linalg.norm(q) - 1.0) < 1e-9
    assert abs(np.linalg.norm(q2) - 1.0) < 1e-9


def test_rotate_matches_matrix():
    rng = np.random.default_rng(3)
    for _ in range(50):
        q = random_quat(rng)
        v = rng.normal(size=3)
        assert np.allclose(quat_rotate(q, v), quat_to_matrix(q) @ v, atol=1e-12)


def test_matrix_quat_roundtrip():
    rng = np.random.default_rng(4)
    for _ in range(100):
        q = random_quat(rng)
        assert quat_distance(q, quat_from_matrix(quat_to_matrix(q))) < 1e-9


def test_rotvec_roundtrip():
    rng = np.random.default_rng(5)
    for _ in range(100):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(-3.0, 3.0)
        q = quat_from_axis_angle(axis, angle)
        rv = quat_to_rotvec(q)
        assert np.isclose(np.linalg.norm(rv), abs(angle), atol=1e-9)


def test_euler_xyz_roundtrip():
    rng = np.random.default_rng(6)
    for _ in range(200):
        rx, ry, rz = rng.uniform(-1.4, 1.4, size=3)
        q = quat_from_euler_xyz(rx, ry, rz)
        ex, ey, ez, degen = quat_to_euler_xyz(q)
        assert not degen
        assert np.allclose([ex, ey, ez], [rx, ry, rz], atol=1e-9)


def test_euler_gimbal_flagged():
    q = quat_from_euler_xyz(0.3, np.pi / 2, 0.0)
    _, ry, _, degen = quat_to_euler_xyz(q)
    assert degen
    assert np.isclose(abs(ry), np.pi / 2, atol=1e-6)


def test_compose_preserves_distances():
    # rigid transforms are isometries
    rng = np.random.default_rng(7)
    t = RigidTransform(rng.normal(size=3), random_quat(rng))
    a, b = rng.normal(size=3), rng.normal(size=3)
    d0 = np.linalg.norm(a - b)
    d1 = np.linalg.norm(t.apply(a) - t.apply(b))
    assert abs(d0 - d1) < 1e-9


def test_zero_quaternion_rejected():
    with pytest.raises(ValueError):
        RigidTransform(np.zeros(3), np.zeros(4))
