"""Forward kinematics, geometric Jacobians, and device-frame conversions.

All poses returned here are expressed in the robot root (pelvis) frame:
right-handed, X forward, Z up.  Device streams arrive in their native
conventions and are mapped into the pelvis frame via a `FrameCalibration`
captured at session start.

Supported device conventions:

- ``mocap_global``: already X-forward / Z-up; only the calibration base
  transform applies.
- ``openxr``: Y up, -Z forward (headset native); axes are permuted so
  device -Z becomes robot +X and device +Y becomes robot +Z.
- ``exo_native``: joint-space device; poses pass through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._core import fk_world, frame_jacobian
from .errors import MissingCalibration, UnknownFrame
from .model import Frame, JointState, KinematicTree
from .transforms import (RigidTransform, quat_from_matrix, quat_mul,
                         quat_normalize, quat_rotate)

DEVICE_CONVENTIONS = ("openxr", "mocap_global", "exo_native")

# rows are robot axes expressed in device axes
_AXIS_MAPS = {
    "mocap_global": np.eye(3),
    "exo_native": np.eye(3),
    "openxr": np.array([[0.0, 0.0, -1.0],
                        [-1.0, 0.0, 0.0],
                        [0.0, 1.0, 0.0]]),
}
_AXIS_QUATS = {name: quat_from_matrix(m) for name, m in _AXIS_MAPS.items()}


class FkResult:
    """World pose arrays for every joint of one evaluated state."""

    __slots__ = ("tree", "world_p", "world_q")

    def __init__(self, tree: KinematicTree, world_p: np.ndarray,
                 world_q: np.ndarray):
        self.tree = tree
        self.world_p = world_p
        self.world_q = world_q

    def frame_pose(self, name: str) -> RigidTransform:
        fr = self.tree.require_frame(name)
        return self._compose(fr)

    def frame_position(self, name: str) -> np.ndarray:
        fr = self.tree.require_frame(name)
        if fr.joint < 0:
            return fr.p.copy()
        j = fr.joint
        return self.world_p[j] + quat_rotate(self.world_q[j], fr.p)

    def _compose(self, fr: Frame) -> RigidTransform:
        if fr.joint < 0:
            return RigidTransform(fr.p.copy(), fr.q.copy(), "pelvis")
        j = fr.joint
        p = self.world_p[j] + quat_rotate(self.world_q[j], fr.p)
        q = quat_normalize(quat_mul(self.world_q[j], fr.q))
        return RigidTransform(p, q, "pelvis")


def fk_all(tree: KinematicTree, q: np.ndarray) -> FkResult:
    """Evaluate every joint's world pose once; query frames off the result."""
    world_p, world_q = fk_world(tree.parent, tree.off_p, tree.off_q,
                                tree.axis, np.asarray(q, dtype=float))
    return FkResult(tree, world_p, world_q)


def forward_kinematics(tree: KinematicTree, state: JointState,
                       frame: str) -> RigidTransform:
    """Pose of `frame` in root coordinates.  Pure and deterministic."""
    q = tree.check_q(state.q)
    tree.require_frame(frame)
    return fk_all(tree, q).frame_pose(frame)


def jacobian(tree: KinematicTree, state: JointState, frame: str) -> np.ndarray:
    """Geometric Jacobian of `frame`: 6 x nDoF, linear rows then angular.

    Columns of joints that are not ancestors of the frame are zero.
    """
    q = tree.check_q(state.q)
    chain = tree.chain_to(frame)
    res = fk_all(tree, q)
    target_p = res.frame_position(frame)
    cols = frame_jacobian(res.world_p, res.world_q, tree.axis, chain, target_p)
    J = np.zeros((6, tree.n_joints))
    J[:, chain] = cols
    return J


def chain_jacobian(res: FkResult, chain: np.ndarray,
                   target_p: np.ndarray) -> np.ndarray:
    """Jacobian restricted to `chain` columns, reusing an FK evaluation."""
    return frame_jacobian(res.world_p, res.world_q, res.tree.axis, chain,
                          target_p)


# ---------------------------------------------------------------------------
# device-frame calibration


@dataclass(frozen=True)
class FrameCalibration:
    """Session-start reference transforms for one input device.

    `pelvis_from_device` maps axis-permuted device coordinates into the
    robot pelvis frame (identity if the operator stood at the reference
    spot).  `head_to_pelvis` is the fixed pose of the head frame in the
    pelvis frame used by head-relative wrist retargeting.
    """

    convention: str
    pelvis_from_device: RigidTransform
    head_to_pelvis: RigidTransform

    def __post_init__(self):
        if self.convention not in DEVICE_CONVENTIONS:
            raise MissingCalibration(
                f"unknown device convention {self.convention!r}")

    @staticmethod
    def identity(convention: str = "mocap_global",
                 head_to_pelvis: RigidTransform | None = None) -> "FrameCalibration":
        return FrameCalibration(
            convention,
            RigidTransform.identity("pelvis"),
            head_to_pelvis or RigidTransform.identity("pelvis"),
        )


def _permute(pose: RigidTransform, convention: str) -> RigidTransform:
    aq = _AXIS_QUATS[convention]
    am = _AXIS_MAPS[convention]
    return RigidTransform(am @ pose.p, quat_mul(aq, pose.q), pose.frame)


def convert_device_frame(pose: RigidTransform, convention: str,
                         calib: FrameCalibration | None) -> RigidTransform:
    """Express a device-frame pose in the robot pelvis frame."""
    if calib is None:
        raise MissingCalibration("no frame calibration captured")
    if convention not in DEVICE_CONVENTIONS:
        raise MissingCalibration(f"unknown device convention {convention!r}")
    out = calib.pelvis_from_device.compose(_permute(pose, convention))
    return out.with_frame("pelvis")


def invert_device_frame(pose: RigidTransform, convention: str,
                        calib: FrameCalibration | None) -> RigidTransform:
    """Inverse of `convert_device_frame` (robot pelvis -> device frame)."""
    if calib is None:
        raise MissingCalibration("no frame calibration captured")
    unbased = calib.pelvis_from_device.inverse().compose(pose)
    aq = _AXIS_QUATS[convention]
    am = _AXIS_MAPS[convention]
    return RigidTransform(am.T @ unbased.p,
                          quat_mul(np.array([aq[0], -aq[1], -aq[2], -aq[3]]),
                                   unbased.q),
                          "device")


def wrist_offset_pelvis(head_pose: RigidTransform, wrist_pose: RigidTransform,
                        calib: FrameCalibration | None) -> RigidTransform:
    """Wrist pose in the pelvis frame via the fixed head-to-pelvis transform.

    Both poses must be in the same device frame; the wrist offset relative
    to the head is re-expressed under `calib.head_to_pelvis`.
    """
    if calib is None or calib.head_to_pelvis is None:
        raise MissingCalibration("head_to_pelvis transform not captured")
    head_r = _permute(head_pose, calib.convention)
    wrist_r = _permute(wrist_pose, calib.convention)
    offset = head_r.inverse().compose(wrist_r)
    return calib.head_to_pelvis.compose(offset).with_frame("pelvis")
