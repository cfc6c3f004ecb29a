"""Human-hand to robot-hand retargeting.

Three input routes map onto the robot hand DoF:

- keypoints (21 wrist-local 3D points): minimize the gap between scaled
  human key vectors (wrist->fingertip, thumb->index pinch) and the robot's
  FK vectors over the hand joints, with a smoothness regularizer, by
  projected gradient descent warm-started at the previous command;
- glove joint angles (20-DoF mocap glove or 15-DoF exoskeleton glove):
  per-joint affine map then clamp to limits;
- per-joint rotations: intrinsic XYZ Euler extraction of the flexion
  component, then clamp.

Keypoint layout: wrist = 0, then 4 points per finger (MCP, PIP, DIP, tip),
thumb first.  Three-finger hands consume thumb/index/middle only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._core import fk_world, frame_jacobian
from .errors import IncompleteMapping, InvalidKeypoints
from .model import Frame, RobotModel
from .transforms import quat_mul, quat_rotate, quat_to_euler_xyz

N_KEYPOINTS = 21
_EDGES = [(0, 1), (1, 2), (2, 3), (3, 4),
          (0, 5), (5, 6), (6, 7), (7, 8),
          (0, 9), (9, 10), (10, 11), (11, 12),
          (0, 13), (13, 14), (14, 15), (15, 16),
          (0, 17), (17, 18), (18, 19), (19, 20)]
MIN_EDGE = 0.005
MAX_EDGE = 0.15


def validate_keypoints(points: np.ndarray) -> np.ndarray:
    """Check the 21-point invariants; returns the validated array."""
    pts = np.asarray(points, dtype=float)
    if pts.shape != (N_KEYPOINTS, 3):
        raise InvalidKeypoints(f"expected (21, 3) points, got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InvalidKeypoints("non-finite keypoint")
    if np.linalg.norm(pts[0]) > 1e-9:
        raise InvalidKeypoints("wrist point must sit at the origin")
    for a, b in _EDGES:
        d = float(np.linalg.norm(pts[a] - pts[b]))
        if not MIN_EDGE < d < MAX_EDGE:
            raise InvalidKeypoints(
                f"edge {a}-{b} length {d:.4f} outside ({MIN_EDGE}, {MAX_EDGE})")
    return pts


@dataclass(frozen=True)
class KeyVector:
    """One retargeting vector: robot frame pair + human keypoint pair."""

    from_frame: str  # "base" = hand root
    to_frame: str
    human: tuple[int, int]
    scale_indices: tuple[int, ...]  # indices into the per-finger 5-vector


class HandModel:
    """One hand re-rooted at its wrist: joints, tips, palm, mapping tables."""

    def __init__(self, robot: RobotModel, side: str):
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.side = side
        self.robot = robot
        self.dof_slice = robot.group_slice(f"hand_{side}")
        idx = list(range(self.dof_slice.start, self.dof_slice.stop))
        self.joint_names = [robot.joint_names[i] for i in idx]
        remap = {g: l for l, g in enumerate(idx)}
        self.parent = np.array([remap.get(robot.parent[i], -1) for i in idx],
                               dtype=np.int32)
        self.axis = robot.axis[idx].copy()
        self.off_p = robot.off_p[idx].copy()
        self.off_q = robot.off_q[idx].copy()
        self.limits = robot.limits[idx].copy()
        self.n_dof = len(idx)

        base_joint = int(robot.parent[idx[0]]) if idx else -1

        def local_frame(name: str) -> Frame:
            fr = robot.require_frame(name)
            if fr.joint in remap:
                return Frame(remap[fr.joint], fr.p, fr.q)
            if fr.joint == base_joint:
                return Frame(-1, fr.p, fr.q)  # static in the hand-root frame
            raise IncompleteMapping(
                f"frame {name} not on the {side} hand subtree")

        self.fingertips = {n: local_frame(n)
                           for n in robot.fingertip_names[side]}
        mapping = robot.hand_mapping.get(side, {})
        self.palm = local_frame(f"{side}_palm") if "palm" in mapping else None
        self.glove_map = mapping.get("glove", [])
        self.exo_map = mapping.get("exo", [])
        self.euler_map = mapping.get("euler", [])
        self.keyvectors = [
            KeyVector(kv.get("from", "base"), kv["to"], tuple(kv["human"]),
                      tuple(kv["scales"]))
            for kv in mapping.get("keyvectors", [])]
        self._frame_cache = dict(self.fingertips)
        if self.palm is not None:
            self._frame_cache["palm"] = self.palm
        self._chains: dict[str, np.ndarray] = {}

    # -- kinematics in the hand-root (wrist) frame --------------------------
    def fk(self, q: np.ndarray):
        return fk_world(self.parent, self.off_p, self.off_q, self.axis,
                        np.asarray(q, dtype=float))

    def frame_position(self, world, name: str) -> np.ndarray:
        if name == "base":
            return np.zeros(3)
        fr = self._frame_cache[name]
        if fr.joint < 0:
            return fr.p.copy()
        wp, wq = world
        return wp[fr.joint] + quat_rotate(wq[fr.joint], fr.p)

    def frame_linear_jacobian(self, world, name: str) -> np.ndarray:
        if name == "base":
            return np.zeros((3, self.n_dof))
        fr = self._frame_cache[name]
        if fr.joint < 0:
            return np.zeros((3, self.n_dof))
        chain = self._chain(name, fr)
        wp, wq = world
        target = wp[fr.joint] + quat_rotate(wq[fr.joint], fr.p)
        cols = frame_jacobian(wp, wq, self.axis, chain, target)
        J = np.zeros((3, self.n_dof))
        J[:, chain] = cols[0:3]
        return J

    def _chain(self, name: str, fr: Frame) -> np.ndarray:
        if name not in self._chains:
            chain = []
            k = fr.joint
            while k >= 0:
                chain.append(k)
                k = self.parent[k]
            self._chains[name] = np.ascontiguousarray(chain[::-1],
                                                      dtype=np.int32)
        return self._chains[name]

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.limits[:, 0], self.limits[:, 1])

    def tip_positions(self, q: np.ndarray) -> dict[str, np.ndarray]:
        world = self.fk(q)
        return {n: self.frame_position(world, n) for n in self.fingertips}

    def open_closure(self) -> float:
        """Mean fingertip-to-palm distance with the hand fully open (home)."""
        return self.closure_metric(np.zeros(self.n_dof))

    def closure_metric(self, q: np.ndarray) -> float:
        world = self.fk(q)
        palm = (self.frame_position(world, "palm") if self.palm is not None
                else np.zeros(3))
        d = [np.linalg.norm(self.frame_position(world, n) - palm)
             for n in self.fingertips]
        return float(np.mean(d))


def hand_model(robot: RobotModel, side: str) -> HandModel:
    return HandModel(robot, side)


# ---------------------------------------------------------------------------
# keypoint (vector) retargeting


@dataclass(frozen=True)
class RetargetConfig:
    w_smooth: float = 1e-5
    max_iters: int = 50
    step0: float = 5.0
    grad_tol: float = 1e-10


def _keyvector_targets(hand: HandModel, pts: np.ndarray,
                       scales: np.ndarray) -> np.ndarray:
    targets = np.empty((len(hand.keyvectors), 3))
    for i, kv in enumerate(hand.keyvectors):
        s = float(np.mean([scales[k] for k in kv.scale_indices]))
        targets[i] = s * (pts[kv.human[1]] - pts[kv.human[0]])
    return targets


def _keyvector_values(hand: HandModel, world) -> np.ndarray:
    out = np.empty((len(hand.keyvectors), 3))
    for i, kv in enumerate(hand.keyvectors):
        out[i] = (hand.frame_position(world, kv.to_frame)
                  - hand.frame_position(world, kv.from_frame))
    return out


def retarget_vector(kp, hand: HandModel, scales, q_prev,
                    cfg: RetargetConfig | None = None) -> np.ndarray:
    """Hand DoF minimizing the scaled key-vector objective.

    Deterministic projected gradient descent with backtracking, warm
    started at `q_prev`; the returned objective value never exceeds the
    objective at `q_prev` (descent guarantee, asserted).
    """
    cfg = cfg or RetargetConfig()
    pts = validate_keypoints(kp)
    scales = np.asarray(scales, dtype=float)
    q_prev = hand.clamp(np.asarray(q_prev, dtype=float))
    targets = _keyvector_targets(hand, pts, scales)

    def objective(q: np.ndarray) -> float:
        vals = _keyvector_values(hand, hand.fk(q))
        dq = q - q_prev
        return float(np.sum((vals - targets) ** 2)
                     + cfg.w_smooth * np.dot(dq, dq))

    q = q_prev.copy()
    f = objective(q)
    f_prev_cmd = f
    step = cfg.step0
    for _ in range(cfg.max_iters):
        world = hand.fk(q)
        vals = _keyvector_values(hand, world)
        grad = 2.0 * cfg.w_smooth * (q - q_prev)
        for i, kv in enumerate(hand.keyvectors):
            J = (hand.frame_linear_jacobian(world, kv.to_frame)
                 - hand.frame_linear_jacobian(world, kv.from_frame))
            grad += 2.0 * (J.T @ (vals[i] - targets[i]))
        g2 = float(grad @ grad)
        if g2 < cfg.grad_tol:
            break
        moved = False
        while step > 1e-12:
            cand = hand.clamp(q - step * grad)
            fc = objective(cand)
            if fc < f - 1e-6 * step * g2:
                q, f = cand, fc
                step *= 1.5
                moved = True
                break
            step *= 0.5
        if not moved:
            break
    assert f <= f_prev_cmd + 1e-12, "retarget objective increased"
    return q


# ---------------------------------------------------------------------------
# glove / joint-angle retargeting


GLOVE_DOF = 20
EXO_GLOVE_DOF = 15
_ANGLE_RANGE = (-np.pi / 2, np.pi)


def validate_glove(angles, expected: int) -> np.ndarray:
    a = np.asarray(angles, dtype=float)
    if a.shape != (expected,):
        raise IncompleteMapping(f"expected {expected} glove angles, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise IncompleteMapping("non-finite glove angle")
    if np.any(a < _ANGLE_RANGE[0] - 1e-9) or np.any(a > _ANGLE_RANGE[1] + 1e-9):
        raise IncompleteMapping("glove angle outside [-pi/2, pi]")
    return a


def retarget_glove(src, hand: HandModel,
                   mapping: Sequence[Mapping] | None = None) -> np.ndarray:
    """Affine per-joint map: q[j] = clamp(a_j * src[m(j)] + b_j)."""
    src = np.asarray(src, dtype=float)
    if mapping is None:
        if src.shape == (GLOVE_DOF,):
            mapping = hand.glove_map
        elif src.shape == (EXO_GLOVE_DOF,):
            mapping = hand.exo_map
        else:
            raise IncompleteMapping(
                f"cannot infer mapping for {src.shape} source angles")
    validate_glove(src, len(src))
    by_joint = {row["joint"]: row for row in mapping}
    missing = [n for n in hand.joint_names if n not in by_joint]
    if missing:
        raise IncompleteMapping(f"no source mapped for joints {missing}")
    q = np.empty(hand.n_dof)
    for j, name in enumerate(hand.joint_names):
        row = by_joint[name]
        s = int(row["source"])
        if not 0 <= s < len(src):
            raise IncompleteMapping(f"{name}: source index {s} out of range")
        q[j] = row.get("a", 1.0) * src[s] + row.get("b", 0.0)
    return hand.clamp(q)


def retarget_euler(finger_rotations: Mapping[str, Sequence[float]],
                   hand: HandModel) -> tuple[np.ndarray, list[str]]:
    """Flexion extraction from per-joint quaternions via intrinsic XYZ Euler.

    Returns (hand DoF vector, names of sources hitting the gimbal
    degeneracy); degenerate values still follow the rz=0 convention.
    """
    by_joint = {row["joint"]: row for row in hand.euler_map}
    missing = [n for n in hand.joint_names if n not in by_joint]
    if missing:
        raise IncompleteMapping(f"no euler source for joints {missing}")
    q = np.empty(hand.n_dof)
    degenerate: list[str] = []
    for j, name in enumerate(hand.joint_names):
        row = by_joint[name]
        src = row["source"]
        if src not in finger_rotations:
            raise IncompleteMapping(f"missing rotation for {src!r}")
        angles = quat_to_euler_xyz(np.asarray(finger_rotations[src],
                                              dtype=float))
        if angles[3]:
            degenerate.append(src)
        q[j] = row.get("a", 1.0) * angles[int(row["component"])] \
            + row.get("b", 0.0)
    return hand.clamp(q), degenerate


# ---------------------------------------------------------------------------
# keypoint synthesis (test fixtures, stream generator, UI hand slider)


def keypoints_from_hand(hand: HandModel, q: np.ndarray) -> np.ndarray:
    """21 wrist-local keypoints generated from the robot hand's own FK.

    Fingers absent on three-finger hands are fabricated next to the middle
    finger so the keypoint invariants hold; retargeting ignores them.
    """
    world = hand.fk(hand.clamp(np.asarray(q, dtype=float)))
    pts = np.zeros((N_KEYPOINTS, 3))
    order = ("thumb", "index", "middle", "ring", "pinky")
    tip_by_finger = {}
    for name, fr in hand.fingertips.items():
        for f in order:
            if f"_{f}_" in name or name.endswith(f"{f}_tip"):
                tip_by_finger[f] = (name, fr)
    wp, _ = world
    filler_shift = np.array([-0.017, 0.0, 0.0])
    prev_chain = None
    for fi, finger in enumerate(order):
        base_i = 1 + 4 * fi
        if finger in tip_by_finger:
            name, fr = tip_by_finger[finger]
            tip = hand.frame_position(world, name)
            mcp = wp[hand._chain(name, fr)[0]]
            chain = (mcp, tip)
            prev_chain = chain
        else:
            mcp, tip = prev_chain
            mcp = mcp + filler_shift
            tip = tip + filler_shift
            prev_chain = (mcp, tip)
        pts[base_i] = mcp
        pts[base_i + 1] = mcp + (tip - mcp) / 3.0
        pts[base_i + 2] = mcp + 2.0 * (tip - mcp) / 3.0
        pts[base_i + 3] = tip
    return pts
