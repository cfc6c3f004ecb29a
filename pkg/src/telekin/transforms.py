"""Rigid-transform and quaternion math.

Conventions
-----------
- Quaternions are (w, x, y, z) and kept unit-norm after every construction
  and composition.
- The robot root ("pelvis") frame is right-handed, X forward, Z up.
- Euler angles appear only at API edges and are intrinsic XYZ, radians.
- Orientation error between two rotations is the norm of the rotation
  vector of the relative rotation (smooth near identity).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0 or not np.isfinite(n):
        raise ValueError("cannot normalize zero/non-finite quaternion")
    return q / n


def quat_mul(a, b):
    """Hamilton product a*b."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q, v):
    """Rotate a 3-vector by a unit quaternion."""
    w, x, y, z = q
    cx = y * v[2] - z * v[1] + w * v[0]
    cy = z * v[0] - x * v[2] + w * v[1]
    cz = x * v[1] - y * v[0] + w * v[2]
    return np.array([
        v[0] + 2.0 * (y * cz - z * cy),
        v[1] + 2.0 * (z * cx - x * cz),
        v[2] + 2.0 * (x * cy - y * cx),
    ])


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        return IDENTITY_QUAT.copy()
    half = 0.5 * angle
    return np.concatenate(([np.cos(half)], np.sin(half) * axis / n))


def quat_from_rotvec(rv):
    rv = np.asarray(rv, dtype=float)
    angle = np.linalg.norm(rv)
    if angle < 1e-12:
        # first-order expansion keeps the map smooth through zero
        q = np.concatenate(([1.0], 0.5 * rv))
        return quat_normalize(q)
    return quat_from_axis_angle(rv / angle, angle)


def quat_to_rotvec(q):
    """Rotation vector (axis * angle) of a unit quaternion, angle in [0, pi]."""
    w, x, y, z = q
    if w < 0.0:  # pick the short arc
        w, x, y, z = -w, -x, -y, -z
    sin_half = np.sqrt(x * x + y * y + z * z)
    if sin_half < 1e-12:
        return 2.0 * np.array([x, y, z])
    angle = 2.0 * np.arctan2(sin_half, w)
    return (angle / sin_half) * np.array([x, y, z])


def quat_distance(a, b):
    """Sign-insensitive angular distance between two unit quaternions."""
    return float(np.linalg.norm(quat_to_rotvec(quat_mul(quat_conjugate(a), b))))


def quat_from_matrix(m):
    """Unit quaternion of a 3x3 rotation matrix (Shepperd's method)."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (m[2, 1] - m[1, 2]) / s,
                      (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s])
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array([(m[2, 1] - m[1, 2]) / s,
                      0.25 * s,
                      (m[0, 1] + m[1, 0]) / s,
                      (m[0, 2] + m[2, 0]) / s])
    elif m[1, 1] > m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array([(m[0, 2] - m[2, 0]) / s,
                      (m[0, 1] + m[1, 0]) / s,
                      0.25 * s,
                      (m[1, 2] + m[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array([(m[1, 0] - m[0, 1]) / s,
                      (m[0, 2] + m[2, 0]) / s,
                      (m[1, 2] + m[2, 1]) / s,
                      0.25 * s])
    return quat_normalize(q)


def quat_to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_euler_xyz(rx, ry, rz):
    """Intrinsic XYZ Euler angles -> quaternion (R = Rx * Ry * Rz)."""
    qx = quat_from_axis_angle([1.0, 0.0, 0.0], rx)
    qy = quat_from_axis_angle([0.0, 1.0, 0.0], ry)
    qz = quat_from_axis_angle([0.0, 0.0, 1.0], rz)
    return quat_mul(quat_mul(qx, qy), qz)


def quat_to_euler_xyz(q):
    """Quaternion -> intrinsic XYZ Euler angles.

    Returns (rx, ry, rz, degenerate).  `degenerate` flags pitch within 1e-6
    of +-pi/2; the standard convention rz = 0 is used there and rx absorbs
    the remaining rotation.
    """
    m = quat_to_matrix(q)
    sy = np.clip(m[0, 2], -1.0, 1.0)
    ry = np.arcsin(sy)
    if abs(abs(sy) - 1.0) < 1e-6:
        rx = np.arctan2(m[2, 1], m[1, 1])
        rz = 0.0
        return float(rx), float(ry), float(rz), True
    rx = np.arctan2(-m[1, 2], m[2, 2])
    rz = np.arctan2(-m[0, 1], m[0, 0])
    return float(rx), float(ry), float(rz), False


@dataclass(frozen=True)
class RigidTransform:
    """Position plus unit-quaternion orientation in a named frame.

    `frame` is the frame the pose is expressed in; it is carried as a label
    and is not checked during composition.
    """

    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    q: np.ndarray = field(default_factory=lambda: IDENTITY_QUAT.copy())
    frame: str = ""

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(3))
        object.__setattr__(self, "q", quat_normalize(self.q))

    @staticmethod
    def identity(frame: str = "") -> "RigidTransform":
        return RigidTransform(np.zeros(3), IDENTITY_QUAT.copy(), frame)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self * other (apply other in self's local frame)."""
        return RigidTransform(
            self.p + quat_rotate(self.q, other.p),
            quat_mul(self.q, other.q),
            self.frame,
        )

    def inverse(self) -> "RigidTransform":
        qi = quat_conjugate(self.q)
        return RigidTransform(-quat_rotate(qi, self.p), qi, self.frame)

    def apply(self, point) -> np.ndarray:
        """Map a point from this transform's local frame to its parent frame."""
        return self.p + quat_rotate(self.q, np.asarray(point, dtype=float))

    def rotation_to(self, other: "RigidTransform") -> float:
        return quat_distance(self.q, other.q)

    def almost_equal(self, other: "RigidTransform", pos_tol=1e-9, rot_tol=1e-9) -> bool:
        return (np.linalg.norm(self.p - other.p) <= pos_tol
                and quat_distance(self.q, other.q) <= rot_tol)

    def with_frame(self, frame: str) -> "RigidTransform":
        return RigidTransform(self.p, self.q, frame)
