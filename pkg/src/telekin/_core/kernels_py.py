"""Pure-python (numpy) reference kernels for the hot kinematics loops.

The compiled extension in `_kernels.pyx` implements the same signatures;
`telekin._core` picks one at import time.  Keep the two in lockstep: the
equivalence test suite compares them element-wise.

Conventions: quaternions are (w, x, y, z), always unit; joints are revolute;
`parent[i] < i` (models are flattened in topological order).
"""

import numpy as np


def quat_mul(a, b):
    """Hamilton product a*b for single quaternions (w,x,y,z)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_rotate(q, v):
    """Rotate vector v by unit quaternion q."""
    w, x, y, z = q
    # v + 2*r x (r x v + w*v) with r = (x,y,z)
    rx, ry, rz = x, y, z
    cx = ry * v[2] - rz * v[1] + w * v[0]
    cy = rz * v[0] - rx * v[2] + w * v[1]
    cz = rx * v[1] - ry * v[0] + w * v[2]
    return np.array([
        v[0] + 2.0 * (ry * cz - rz * cy),
        v[1] + 2.0 * (rz * cx - rx * cz),
        v[2] + 2.0 * (rx * cy - ry * cx),
    ])


def fk_world(parent, off_p, off_q, axis, q):
    """World (root-frame) pose of every joint frame.

    Joint i frame = parent frame * fixed offset * Rot(axis_i, q_i).

    Args:
        parent: int32[n], parent joint index, -1 for root-attached joints.
        off_p:  f64[n,3] fixed translation from parent joint frame.
        off_q:  f64[n,4] fixed rotation from parent joint frame.
        axis:   f64[n,3] unit rotation axis in the joint's local frame.
        q:      f64[n]   joint angles (radians).

    Returns:
        (world_p f64[n,3], world_q f64[n,4])
    """
    n = len(q)
    world_p = np.empty((n, 3))
    world_q = np.empty((n, 4))
    for i in range(n):
        half = 0.5 * q[i]
        s = np.sin(half)
        rot = np.array([np.cos(half), s * axis[i, 0], s * axis[i, 1],
                        s * axis[i, 2]])
        p = parent[i]
        if p < 0:
            base_p = np.zeros(3)
            base_q = np.array([1.0, 0.0, 0.0, 0.0])
        else:
            base_p = world_p[p]
            base_q = world_q[p]
        world_p[i] = base_p + quat_rotate(base_q, off_p[i])
        wq = quat_mul(quat_mul(base_q, off_q[i]), rot)
        world_q[i] = wq / np.sqrt(np.dot(wq, wq))
    return world_p, world_q


def frame_jacobian(world_p, world_q, axis, chain, target_p):
    """Geometric Jacobian columns for the revolute joints on `chain`.

    Rows 0-2 are linear velocity, rows 3-5 angular, both at `target_p`
    expressed in the root frame.

    Args:
        chain: int32[m] joint indices from root to leaf.
        target_p: f64[3] point whose velocity the linear rows describe.

    Returns:
        J f64[6,m]
    """
    m = len(chain)
    J = np.empty((6, m))
    for k in range(m):
        j = chain[k]
        a = quat_rotate(world_q[j], axis[j])
        r = target_p - world_p[j]
        J[0:3, k] = np.cross(a, r)
        J[3:6, k] = a
    return J
