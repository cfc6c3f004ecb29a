"""Operator calibration: skeleton shape fit, link scales, finger scales.

The operator's body is modeled as a stick skeleton in a neutral T-pose:
bones with fixed unit directions whose lengths are modulated by a
10-vector of shape parameters through a linear per-bone basis.  Fitting
minimizes the summed squared error between the skeleton's six landmark
positions (pelvis, shoulders, wrists, head) and the robot's landmarks at
its home configuration, by deterministic gradient descent with
backtracking.  From the fitted shape we derive per-link scale factors
(robot length / human length) used to rescale streamed keypoints, and
per-finger scale factors for hand retargeting.

Calibration runs once per operator and is persisted to a profile file;
live sessions only read profiles.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (DegenerateBone, MissingCorrespondence, MissingScale,
                     NonPositiveLength)
from .kinematics import fk_all
from .model import LANDMARK_NAMES, RobotModel

N_SHAPE = 10
MIN_BONE_LENGTH = 0.01
BETA_BOX = 5.0


@dataclass(frozen=True)
class Bone:
    name: str
    parent: str | None
    direction: np.ndarray  # unit, T-pose
    rest_length: float


@dataclass
class SkeletonModel:
    """T-pose stick skeleton with linear bone-length shape space."""

    bones: list[Bone]
    basis: np.ndarray  # (n_bones, N_SHAPE) meters per unit shape parameter
    landmark_map: dict[str, str | None]  # landmark -> bone whose end it marks
    correspondence: dict[str, str]  # bone -> robot link name
    beta: np.ndarray = field(default_factory=lambda: np.zeros(N_SHAPE))

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=float)
        if self.basis.shape != (len(self.bones), N_SHAPE):
            raise ValueError("basis must be (n_bones, 10)")
        self._index = {b.name: i for i, b in enumerate(self.bones)}
        order = {None: -1}
        for i, b in enumerate(self.bones):
            if b.parent not in order:
                raise ValueError(f"bone {b.name}: parent before child required")
            order[b.name] = i
        if set(self.landmark_map) != set(LANDMARK_NAMES):
            raise ValueError("landmark_map must cover the six landmarks")

    def bone_index(self, name: str) -> int:
        return self._index[name]

    def lengths(self, beta: np.ndarray) -> np.ndarray:
        return np.array([b.rest_length for b in self.bones]) + self.basis @ beta


@dataclass(frozen=True)
class LandmarkSet:
    """Pelvis-frame positions of the six canonical landmarks."""

    positions: dict[str, np.ndarray]

    def __post_init__(self):
        if set(self.positions) != set(LANDMARK_NAMES):
            raise ValueError("landmark set must contain exactly the six names")
        if np.linalg.norm(self.positions["pelvis"]) > 1e-12:
            raise ValueError("pelvis landmark must sit at the origin")

    def stacked(self) -> np.ndarray:
        return np.stack([self.positions[n] for n in LANDMARK_NAMES])


@dataclass
class ScaleParams:
    """Per-link scale factors plus per-finger scale 5-vectors."""

    link_scales: dict[str, float]
    finger_scales: dict[str, np.ndarray] = field(
        default_factory=lambda: {"left": np.ones(5), "right": np.ones(5)})

    def __post_init__(self):
        for name, s in self.link_scales.items():
            if not np.isfinite(s) or not (0.1 < s < 10.0):
                raise ValueError(f"link scale {name}={s} outside (0.1, 10)")
        for side, v in self.finger_scales.items():
            v = np.asarray(v, dtype=float)
            if v.shape != (5,) or not np.all(np.isfinite(v)) or np.any(v <= 0):
                raise ValueError(f"{side} finger scales must be 5 positive values")
            self.finger_scales[side] = v


@dataclass
class FitConfig:
    max_iters: int = 2000
    accept: float = 1e-6  # residual (m^2) considered solved
    min_decrease: float = 1e-14
    patience: int = 25
    step0: float = 1.0


@dataclass
class FitResult:
    beta: np.ndarray
    residual: float
    converged: bool
    iters: int


# ---------------------------------------------------------------------------
# forward landmark model


def landmark_forward(skel: SkeletonModel, beta: np.ndarray) -> LandmarkSet:
    """Landmark positions of the T-pose skeleton under shape `beta`."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (N_SHAPE,):
        raise ValueError("beta must be a 10-vector")
    if np.any(np.abs(beta) > BETA_BOX + 1e-12):
        raise ValueError(f"beta outside search box [-{BETA_BOX}, {BETA_BOX}]")
    lengths = skel.lengths(beta)
    bad = np.where(lengths <= MIN_BONE_LENGTH)[0]
    if bad.size:
        raise DegenerateBone(
            f"bone {skel.bones[bad[0]].name} length {lengths[bad[0]]:.4f} m")
    ends: dict[str | None, np.ndarray] = {None: np.zeros(3)}
    for i, b in enumerate(skel.bones):
        ends[b.name] = ends[b.parent] + b.direction * lengths[i]
    return LandmarkSet({lm: ends[bone].copy()
                        for lm, bone in skel.landmark_map.items()})


def _chain_matrix(skel: SkeletonModel) -> np.ndarray:
    """C[l, b] = 1 if bone b lies on the chain from pelvis to landmark l."""
    C = np.zeros((len(LANDMARK_NAMES), len(skel.bones)))
    for li, lm in enumerate(LANDMARK_NAMES):
        bone = skel.landmark_map[lm]
        while bone is not None:
            bi = skel.bone_index(bone)
            C[li, bi] = 1.0
            bone = skel.bones[bi].parent
    return C


def fit_shape(skel: SkeletonModel, robot_landmarks: LandmarkSet,
              cfg: FitConfig | None = None) -> FitResult:
    """Fit shape parameters to the robot's landmarks (home T-pose).

    Deterministic: fixed zero init, analytic gradient, backtracking line
    search that enforces descent, projection onto the shape search box.
    Non-convergence is reported on the result, never raised.
    """
    cfg = cfg or FitConfig()
    target = robot_landmarks.stacked()
    dirs = np.stack([b.direction for b in skel.bones])
    C = _chain_matrix(skel)
    rest = np.array([b.rest_length for b in skel.bones])

    def landmarks_of(lengths: np.ndarray) -> np.ndarray:
        return (C * lengths) @ dirs

    def objective(beta: np.ndarray) -> float:
        lengths = rest + skel.basis @ beta
        if np.any(lengths <= MIN_BONE_LENGTH):
            return np.inf
        return float(np.sum((landmarks_of(lengths) - target) ** 2))

    beta = np.zeros(N_SHAPE)
    f = objective(beta)
    step = cfg.step0
    stall = 0
    iters = 0
    for iters in range(1, cfg.max_iters + 1):
        lengths = rest + skel.basis @ beta
        r = landmarks_of(lengths) - target  # (6, 3)
        # dF/dbeta = 2 * sum_l sum_b C[l,b] (r_l . dir_b) basis_b
        proj = (r @ dirs.T) * C  # (6, n_bones)
        grad = 2.0 * (proj.sum(axis=0) @ skel.basis)
        gnorm2 = float(grad @ grad)
        if gnorm2 == 0.0 or f <= cfg.accept:
            break
        accepted = False
        while step > 1e-16:
            cand = np.clip(beta - step * grad, -BETA_BOX, BETA_BOX)
            fc = objective(cand)
            if fc <= f - 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        if f - fc < cfg.min_decrease:
            stall += 1
        else:
            stall = 0
        beta, f = cand, fc
        step *= 1.5
        if f <= cfg.accept:
            break
        if stall >= cfg.patience:
            break
    return FitResult(beta, f, bool(f <= cfg.accept), iters)


def robot_landmark_set(robot: RobotModel) -> LandmarkSet:
    """Landmark positions of a robot at its home (T-pose) configuration."""
    res = fk_all(robot, np.zeros(robot.total_dof))
    return LandmarkSet({n: res.frame_position(n) for n in LANDMARK_NAMES})


# ---------------------------------------------------------------------------
# scale derivation


def derive_link_scales(skel: SkeletonModel, beta: np.ndarray,
                       robot: RobotModel,
                       correspondence: Mapping[str, str] | None = None
                       ) -> ScaleParams:
    """robot link length / human effective bone length, per corresponded pair."""
    corr = dict(correspondence or skel.correspondence)
    lengths = skel.lengths(np.asarray(beta, dtype=float))
    scales: dict[str, float] = {}
    for bone, link in corr.items():
        if bone not in skel._index:
            raise MissingCorrespondence(f"unknown bone {bone!r}")
        if link not in robot.links:
            raise MissingCorrespondence(
                f"robot {robot.name} has no link {link!r}")
        human = lengths[skel.bone_index(bone)]
        if human <= MIN_BONE_LENGTH:
            raise DegenerateBone(f"bone {bone} length {human:.4f} m")
        scales[bone] = float(robot.links[link] / human)
    return ScaleParams(scales)


def derive_finger_scales(human_lengths: Sequence[float],
                         robot_lengths: Sequence[float]) -> np.ndarray:
    """Elementwise robot/human length ratio for the five fingers."""
    h = np.asarray(human_lengths, dtype=float)
    r = np.asarray(robot_lengths, dtype=float)
    if h.shape != (5,) or r.shape != (5,):
        raise NonPositiveLength("expected 5 lengths per hand")
    if np.any(h <= 0) or np.any(r <= 0):
        raise NonPositiveLength("finger lengths must be positive")
    return r / h


def rescale_keypoints(points: Mapping[str, np.ndarray],
                      chain: Sequence[tuple[str, str | None, str]],
                      scales: ScaleParams | Mapping[str, float]
                      ) -> dict[str, np.ndarray]:
    """Scale each bone segment of a connected point chain individually.

    `chain` lists (point, parent_point, bone) in root-first order; parent
    None marks the chain root (held fixed).  Segment directions are
    preserved exactly; lengths multiply by the bone's scale.
    """
    table = scales.link_scales if isinstance(scales, ScaleParams) else scales
    out: dict[str, np.ndarray] = {}
    for point, parent, bone in chain:
        p = np.asarray(points[point], dtype=float)
        if parent is None:
            out[point] = p.copy()
            continue
        if bone not in table:
            raise MissingScale(f"no scale for bone {bone!r}")
        base_in = np.asarray(points[parent], dtype=float)
        seg = p - base_in
        out[point] = out[parent] + table[bone] * seg
    return out


# ---------------------------------------------------------------------------
# default skeleton


def default_skeleton() -> SkeletonModel:
    """Built-in operator skeleton; rest lengths are average-adult values."""
    bones = [
        Bone("spine_lower", None, np.array([0.0, 0.0, 1.0]), 0.15),
        Bone("spine_upper", "spine_lower", np.array([0.0, 0.0, 1.0]), 0.20),
        Bone("neck", "spine_upper", np.array([0.0, 0.0, 1.0]), 0.14),
        Bone("skull", "neck", np.array([0.0, 0.0, 1.0]), 0.11),
        Bone("l_clavicle", "spine_upper", np.array([0.0, 1.0, 0.0]), 0.19),
        Bone("r_clavicle", "spine_upper", np.array([0.0, -1.0, 0.0]), 0.19),
        Bone("l_upper_arm", "l_clavicle", np.array([0.0, 1.0, 0.0]), 0.29),
        Bone("l_forearm", "l_upper_arm", np.array([0.0, 1.0, 0.0]), 0.26),
        Bone("r_upper_arm", "r_clavicle", np.array([0.0, -1.0, 0.0]), 0.29),
        Bone("r_forearm", "r_upper_arm", np.array([0.0, -1.0, 0.0]), 0.26),
    ]
    basis = 0.05 * np.eye(len(bones), N_SHAPE)
    basis[1:, 0] = 0.01  # first parameter nudges overall stature
    landmark_map = {
        "pelvis": None,
        "left_shoulder": "l_clavicle",
        "right_shoulder": "r_clavicle",
        "left_wrist": "l_forearm",
        "right_wrist": "r_forearm",
        "head": "skull",
    }
    correspondence = {
        "spine_lower": "torso_lower",
        "spine_upper": "torso_upper",
        "neck": "neck",
        "skull": "skull",
        "l_clavicle": "left_clavicle",
        "r_clavicle": "right_clavicle",
        "l_upper_arm": "left_upper_arm",
        "l_forearm": "left_forearm",
        "r_upper_arm": "right_upper_arm",
        "r_forearm": "right_forearm",
    }
    return SkeletonModel(bones, basis, landmark_map, correspondence)


# ---------------------------------------------------------------------------
# profiles


@dataclass
class CalibrationProfile:
    """Persisted calibration for one (operator, robot) pair."""

    operator: str
    robot: str
    beta: np.ndarray
    link_scales: dict[str, float]
    finger_scales: dict[str, np.ndarray]
    residual: float
    created_at: str
    arm_scales: dict[str, float]  # pelvis-to-wrist reach ratio per side

    def scale_params(self) -> ScaleParams:
        return ScaleParams(dict(self.link_scales),
                           {s: np.asarray(v, dtype=float)
                            for s, v in self.finger_scales.items()})

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "robot": self.robot,
            "beta": [float(b) for b in self.beta],
            "link_scales": {k: float(v) for k, v in self.link_scales.items()},
            "finger_scales": {s: [float(x) for x in v]
                              for s, v in self.finger_scales.items()},
            "residual": float(self.residual),
            "created_at": self.created_at,
            "arm_scales": {k: float(v) for k, v in self.arm_scales.items()},
        }

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @staticmethod
    def from_dict(d: dict) -> "CalibrationProfile":
        return CalibrationProfile(
            operator=d["operator"], robot=d["robot"],
            beta=np.asarray(d["beta"], dtype=float),
            link_scales={k: float(v) for k, v in d["link_scales"].items()},
            finger_scales={s: np.asarray(v, dtype=float)
                           for s, v in d["finger_scales"].items()},
            residual=float(d["residual"]), created_at=d["created_at"],
            arm_scales={k: float(v) for k, v in d.get("arm_scales", {}).items()},
        )

    @staticmethod
    def load(path: str) -> "CalibrationProfile":
        with open(path) as fh:
            return CalibrationProfile.from_dict(json.load(fh))


def calibrate_operator(operator: str, robot: RobotModel,
                       finger_lengths: Mapping[str, Sequence[float]],
                       skel: SkeletonModel | None = None,
                       cfg: FitConfig | None = None) -> CalibrationProfile:
    """Run the full one-time calibration against a robot's home landmarks.

    `finger_lengths` maps side -> five wrist-to-fingertip lengths measured
    on the operator (thumb first).
    """
    skel = skel or default_skeleton()
    targets = robot_landmark_set(robot)
    fit = fit_shape(skel, targets, cfg)
    scales = derive_link_scales(skel, fit.beta, robot)

    robot_fk = fk_all(robot, np.zeros(robot.total_dof))
    finger: dict[str, np.ndarray] = {}
    arm_scales: dict[str, float] = {}
    human_lm = landmark_forward(skel, fit.beta)
    for side in ("left", "right"):
        tips = robot.fingertip_names[side]
        wrist_p = robot_fk.frame_position(f"{side}_wrist")
        robot_lens = [float(np.linalg.norm(robot_fk.frame_position(t) - wrist_p))
                      for t in tips]
        while len(robot_lens) < 5:  # three-finger hands: unit scale padding
            robot_lens.append(float(finger_lengths[side][len(robot_lens)]))
        finger[side] = derive_finger_scales(finger_lengths[side], robot_lens)
        human_wrist = human_lm.positions[f"{side}_wrist"]
        arm_scales[side] = float(np.linalg.norm(wrist_p)
                                 / np.linalg.norm(human_wrist))
    return CalibrationProfile(
        operator=operator, robot=robot.name, beta=fit.beta,
        link_scales=scales.link_scales, finger_scales=finger,
        residual=fit.residual,
        created_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        arm_scales=arm_scales)
