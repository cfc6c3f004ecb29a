# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot kinematics loops.

Mirror of `kernels_py` (same signatures, same math); see that module for
the conventions.  Only plain loops and libc math here so the extension
builds with nothing beyond a C compiler.
"""

import numpy as np

from libc.math cimport cos, sin, sqrt


cdef inline void _quat_mul(const double* a, const double* b, double* out) nogil:
    out[0] = a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    out[1] = a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2]
    out[2] = a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1]
    out[3] = a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]


cdef inline void _quat_rotate(const double* q, const double* v, double* out) nogil:
    cdef double w = q[0], x = q[1], y = q[2], z = q[3]
    cdef double cx = y * v[2] - z * v[1] + w * v[0]
    cdef double cy = z * v[0] - x * v[2] + w * v[1]
    cdef double cz = x * v[1] - y * v[0] + w * v[2]
    out[0] = v[0] + 2.0 * (y * cz - z * cy)
    out[1] = v[1] + 2.0 * (z * cx - x * cz)
    out[2] = v[2] + 2.0 * (x * cy - y * cx)


def quat_mul(a, b):
    """Hamilton product a*b for single quaternions (w,x,y,z)."""
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    out = np.empty(4)
    cdef double[::1] ov = out
    _quat_mul(&av[0], &bv[0], &ov[0])
    return out


def quat_rotate(q, v):
    """Rotate vector v by unit quaternion q."""
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    out = np.empty(3)
    cdef double[::1] ov = out
    _quat_rotate(&qv[0], &vv[0], &ov[0])
    return out


def fk_world(parent, off_p, off_q, axis, q):
    """World pose of every joint frame; see kernels_py.fk_world."""
    cdef int[::1] par = np.ascontiguousarray(parent, dtype=np.int32)
    cdef double[:, ::1] op = np.ascontiguousarray(off_p, dtype=np.float64)
    cdef double[:, ::1] oq = np.ascontiguousarray(off_q, dtype=np.float64)
    cdef double[:, ::1] ax = np.ascontiguousarray(axis, dtype=np.float64)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t n = qv.shape[0]

    world_p = np.empty((n, 3))
    world_q = np.empty((n, 4))
    cdef double[:, ::1] wp = world_p
    cdef double[:, ::1] wq = world_q

    cdef Py_ssize_t i
    cdef int p
    cdef double half, s, norm
    cdef double rot[4]
    cdef double base_q[4]
    cdef double tmp[4]
    cdef double out_q[4]
    cdef double rotated[3]

    with nogil:
        for i in range(n):
            half = 0.5 * qv[i]
            s = sin(half)
            rot[0] = cos(half)
            rot[1] = s * ax[i, 0]
            rot[2] = s * ax[i, 1]
            rot[3] = s * ax[i, 2]
            p = par[i]
            if p < 0:
                base_q[0] = 1.0
                base_q[1] = 0.0
                base_q[2] = 0.0
                base_q[3] = 0.0
                _quat_rotate(base_q, &op[i, 0], rotated)
                wp[i, 0] = rotated[0]
                wp[i, 1] = rotated[1]
                wp[i, 2] = rotated[2]
            else:
                base_q[0] = wq[p, 0]
                base_q[1] = wq[p, 1]
                base_q[2] = wq[p, 2]
                base_q[3] = wq[p, 3]
                _quat_rotate(base_q, &op[i, 0], rotated)
                wp[i, 0] = wp[p, 0] + rotated[0]
                wp[i, 1] = wp[p, 1] + rotated[1]
                wp[i, 2] = wp[p, 2] + rotated[2]
            _quat_mul(base_q, &oq[i, 0], tmp)
            _quat_mul(tmp, rot, out_q)
            norm = sqrt(out_q[0] * out_q[0] + out_q[1] * out_q[1]
                        + out_q[2] * out_q[2] + out_q[3] * out_q[3])
            wq[i, 0] = out_q[0] / norm
            wq[i, 1] = out_q[1] / norm
            wq[i, 2] = out_q[2] / norm
            wq[i, 3] = out_q[3] / norm
    return world_p, world_q


def frame_jacobian(world_p, world_q, axis, chain, target_p):
    """Geometric Jacobian columns; see kernels_py.frame_jacobian."""
    cdef double[:, ::1] wp = np.ascontiguousarray(world_p, dtype=np.float64)
    cdef double[:, ::1] wq = np.ascontiguousarray(world_q, dtype=np.float64)
    cdef double[:, ::1] ax = np.ascontiguousarray(axis, dtype=np.float64)
    cdef int[::1] ch = np.ascontiguousarray(chain, dtype=np.int32)
    cdef double[::1] tp = np.ascontiguousarray(target_p, dtype=np.float64)
    cdef Py_ssize_t m = ch.shape[0]

    J = np.empty((6, m))
    cdef double[:, ::1] Jv = J
    cdef Py_ssize_t k
    cdef int j
    cdef double a[3]
    cdef double r[3]

    with nogil:
        for k in range(m):
            j = ch[k]
            _quat_rotate(&wq[j, 0], &ax[j, 0], a)
            r[0] = tp[0] - wp[j, 0]
            r[1] = tp[1] - wp[j, 1]
            r[2] = tp[2] - wp[j, 2]
            Jv[0, k] = a[1] * r[2] - a[2] * r[1]
            Jv[1, k] = a[2] * r[0] - a[0] * r[2]
            Jv[2, k] = a[0] * r[1] - a[1] * r[0]
            Jv[3, k] = a[0]
            Jv[4, k] = a[1]
            Jv[5, k] = a[2]
    return J
