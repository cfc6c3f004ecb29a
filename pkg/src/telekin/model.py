"""Robot kinematic models: document format, loader, and flattened trees.

A robot is described by one JSON document (see `load_robot`): revolute
joints with limits and fixed home offsets, named links with lengths, six
canonical landmark frames, fingertip frames, a contiguous DoF layout
(arm_left, arm_right, hand_left, hand_right) and per-hand retargeting
tables.  Angles are radians, lengths meters.  The loader rejects unknown
keys so model files stay hand-auditable.

Three built-in models ship with the package (dual 7-DoF arms):

- ``h1_2_like`` and ``gr1_like``: five-finger hands, 6 DoF each
- ``g1_like``: three-finger hands, 4 DoF each

Their home configuration (all joints at zero) is a T-pose: arms extended
laterally, palms facing down.  Link lengths are plausible placeholders
recorded in the model files, not vendor values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .errors import DofLengthMismatch, ModelFormatError, UnknownFrame
from .transforms import RigidTransform, quat_normalize

LANDMARK_NAMES = ("pelvis", "left_shoulder", "right_shoulder",
                  "left_wrist", "right_wrist", "head")
DOF_GROUPS = ("arm_left", "arm_right", "hand_left", "hand_right")
ROOT_LINK = "pelvis"

_TOP_KEYS = {"name", "joints", "links", "landmarks", "fingertips",
             "dof_layout", "hand_mapping"}
_JOINT_KEYS = {"name", "parent", "child", "axis", "limits", "offset"}


def _check_keys(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ModelFormatError(f"{where}: unknown keys {sorted(unknown)}")


def _parse_frame_def(d: dict, where: str) -> tuple[str, np.ndarray, np.ndarray]:
    _check_keys(d, {"link", "p", "q"}, where)
    p = np.asarray(d.get("p", [0.0, 0.0, 0.0]), dtype=float)
    q = quat_normalize(np.asarray(d.get("q", [1.0, 0.0, 0.0, 0.0]), dtype=float))
    if p.shape != (3,) or q.shape != (4,):
        raise ModelFormatError(f"{where}: bad p/q shapes")
    return str(d["link"]), p, q


@dataclass(frozen=True)
class Frame:
    """A fixed frame attached to a joint (joint index -1 = root link)."""

    joint: int
    p: np.ndarray
    q: np.ndarray


class KinematicTree:
    """Flattened revolute-joint tree; the unit FK and Jacobians operate on.

    Joints are stored in topological order (parent index < joint index).
    Named frames may attach to the root or to any joint's child link.
    """

    def __init__(self, joint_names: Sequence[str], parent: np.ndarray,
                 axis: np.ndarray, off_p: np.ndarray, off_q: np.ndarray,
                 limits: np.ndarray, frames: dict[str, Frame]):
        self.joint_names = list(joint_names)
        self.joint_index = {n: i for i, n in enumerate(self.joint_names)}
        self.parent = np.ascontiguousarray(parent, dtype=np.int32)
        self.axis = np.ascontiguousarray(axis, dtype=float)
        self.off_p = np.ascontiguousarray(off_p, dtype=float)
        self.off_q = np.ascontiguousarray(off_q, dtype=float)
        self.limits = np.ascontiguousarray(limits, dtype=float)
        self.frames = dict(frames)
        self._chains: dict[int, np.ndarray] = {}
        self._validate()

    # -- structure ---------------------------------------------------------
    def _validate(self) -> None:
        n = len(self.joint_names)
        if len(set(self.joint_names)) != n:
            raise ModelFormatError("duplicate joint names")
        for i in range(n):
            if not (-1 <= self.parent[i] < i):
                raise ModelFormatError(
                    f"joint {self.joint_names[i]}: parent index out of order "
                    "(tree must be topologically sorted, no cycles)")
            lo, hi = self.limits[i]
            if not lo < hi:
                raise ModelFormatError(
                    f"joint {self.joint_names[i]}: limits must satisfy lo < hi")
            if not (lo <= 0.0 <= hi):
                raise ModelFormatError(
                    f"joint {self.joint_names[i]}: home (0) outside limits")
            a = np.linalg.norm(self.axis[i])
            if abs(a - 1.0) > 1e-6:
                raise ModelFormatError(
                    f"joint {self.joint_names[i]}: axis must be unit length")
        for name, fr in self.frames.items():
            if not (-1 <= fr.joint < n):
                raise ModelFormatError(f"frame {name}: bad joint index")

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    def frame_names(self) -> Iterable[str]:
        return self.frames.keys()

    def require_frame(self, name: str) -> Frame:
        try:
            return self.frames[name]
        except KeyError:
            raise UnknownFrame(name) from None

    def chain_to(self, frame_name: str) -> np.ndarray:
        """Joint indices (root -> leaf) that move the given frame."""
        fr = self.require_frame(frame_name)
        j = fr.joint
        if j in self._chains:
            return self._chains[j]
        chain = []
        k = j
        while k >= 0:
            chain.append(k)
            k = self.parent[k]
        arr = np.ascontiguousarray(chain[::-1], dtype=np.int32)
        self._chains[j] = arr
        return arr

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.limits[:, 0], self.limits[:, 1])

    def check_q(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n_joints,):
            raise DofLengthMismatch(
                f"expected {self.n_joints} joint values, got {q.shape}")
        lo = self.limits[:, 0] - 1e-9
        hi = self.limits[:, 1] + 1e-9
        if np.any(q < lo) or np.any(q > hi):
            bad = int(np.argmax((q < lo) | (q > hi)))
            raise DofLengthMismatch(
                f"joint {self.joint_names[bad]} value {q[bad]} outside limits")
        return q


@dataclass
class JointState:
    """Full DoF vector ordered by the model's dof_layout, plus a timestamp."""

    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)

    def copy(self) -> "JointState":
        return JointState(self.q.copy(), self.t)


@dataclass
class JointCommand:
    """Engine output: one full-DoF target per control tick."""

    q: np.ndarray
    t: float

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)

    def copy(self) -> "JointCommand":
        return JointCommand(self.q.copy(), self.t)


class RobotModel(KinematicTree):
    """A dual-arm upper body: tree + landmarks, fingertips, DoF layout."""

    def __init__(self, name: str, links: dict[str, float],
                 joint_names, parent, axis, off_p, off_q, limits,
                 frames: dict[str, Frame], dof_layout: dict[str, list[str]],
                 fingertip_names: dict[str, list[str]],
                 hand_mapping: dict):
        super().__init__(joint_names, parent, axis, off_p, off_q, limits, frames)
        self.name = name
        self.links = dict(links)
        self.dof_layout = {g: list(js) for g, js in dof_layout.items()}
        self.fingertip_names = {s: list(ns) for s, ns in fingertip_names.items()}
        self.hand_mapping = hand_mapping
        self._validate_robot()

    def _validate_robot(self) -> None:
        missing = set(LANDMARK_NAMES) - set(self.frames)
        if missing:
            raise ModelFormatError(f"landmarks missing: {sorted(missing)}")
        if tuple(self.dof_layout) != DOF_GROUPS:
            raise ModelFormatError(
                f"dof_layout must list groups {DOF_GROUPS} in order")
        listed = [j for js in self.dof_layout.values() for j in js]
        if sorted(listed) != sorted(self.joint_names):
            raise ModelFormatError(
                "dof_layout must cover every joint exactly once")
        if listed != self.joint_names:
            raise ModelFormatError(
                "dof_layout groups must be contiguous in joint order")
        for side in ("left", "right"):
            tips = self.fingertip_names.get(side, [])
            n_hand = len(self.dof_layout[f"hand_{side}"])
            # five-finger hands carry 5 tip frames, three-finger hands 3
            if len(tips) not in (3, 5):
                raise ModelFormatError(
                    f"{side} hand: expected 3 or 5 fingertip frames")
            if len(tips) == 3 and n_hand > 4:
                raise ModelFormatError(
                    f"{side} hand: 3 fingertips but {n_hand} DoF")
            for t in tips:
                if t not in self.frames:
                    raise ModelFormatError(f"fingertip frame {t} undefined")

    # -- layout helpers ----------------------------------------------------
    @property
    def total_dof(self) -> int:
        return self.n_joints

    def group_slice(self, group: str) -> slice:
        if group not in self.dof_layout:
            raise ModelFormatError(f"unknown dof group {group}")
        start = 0
        for g in DOF_GROUPS:
            width = len(self.dof_layout[g])
            if g == group:
                return slice(start, start + width)
            start += width
        raise AssertionError("unreachable")

    def home_state(self, t: float = 0.0) -> JointState:
        return JointState(np.zeros(self.total_dof), t)

    def wrist_frame(self, side: str) -> str:
        return f"{side}_wrist"

    def palm_frame_def(self, side: str) -> Frame:
        d = self.hand_mapping[side]["palm"]
        return d

    def check_state(self, state: JointState) -> np.ndarray:
        return self.check_q(state.q)


# ---------------------------------------------------------------------------
# document parsing


def robot_from_dict(doc: dict) -> RobotModel:
    """Build and validate a RobotModel from a parsed model document."""
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "model")
    for key in ("name", "joints", "links", "landmarks", "fingertips",
                "dof_layout"):
        if key not in doc:
            raise ModelFormatError(f"model: missing key {key!r}")

    links: dict[str, float] = {}
    for entry in doc["links"]:
        _check_keys(entry, {"name", "length"}, "links[]")
        if entry["name"] in links:
            raise ModelFormatError(f"duplicate link {entry['name']}")
        links[entry["name"]] = float(entry["length"])
    if ROOT_LINK not in links:
        raise ModelFormatError(f"links must include the root {ROOT_LINK!r}")

    # joints come in document order, which must already be topological
    names, parents, axes, offs_p, offs_q, lims = [], [], [], [], [], []
    link_producer: dict[str, int] = {ROOT_LINK: -1}
    for entry in doc["joints"]:
        _check_keys(entry, _JOINT_KEYS, f"joint {entry.get('name')}")
        name = str(entry["name"])
        parent_link = str(entry["parent"])
        child_link = str(entry["child"])
        if parent_link not in link_producer:
            raise ModelFormatError(
                f"joint {name}: parent link {parent_link!r} not yet produced "
                "(document order must be topological)")
        if child_link in link_producer:
            raise ModelFormatError(
                f"joint {name}: child link {child_link!r} already has a parent")
        if child_link not in links:
            raise ModelFormatError(
                f"joint {name}: child link {child_link!r} not in links[]")
        off = entry.get("offset", {})
        _check_keys(off, {"p", "q"}, f"joint {name} offset")
        names.append(name)
        parents.append(link_producer[parent_link])
        axes.append(np.asarray(entry["axis"], dtype=float))
        offs_p.append(np.asarray(off.get("p", [0, 0, 0]), dtype=float))
        offs_q.append(quat_normalize(off.get("q", [1, 0, 0, 0])))
        lims.append(np.asarray(entry["limits"], dtype=float))
        link_producer[child_link] = len(names) - 1

    frames: dict[str, Frame] = {}

    def add_frame(fname: str, d: dict, where: str) -> None:
        link, p, q = _parse_frame_def(d, where)
        if link not in link_producer:
            raise ModelFormatError(f"{where}: link {link!r} undefined")
        if fname in frames:
            raise ModelFormatError(f"duplicate frame {fname!r}")
        frames[fname] = Frame(link_producer[link], p, q)

    landmarks = doc["landmarks"]
    if set(landmarks) != set(LANDMARK_NAMES):
        raise ModelFormatError(
            f"landmarks must be exactly {sorted(LANDMARK_NAMES)}")
    for fname, d in landmarks.items():
        add_frame(fname, d, f"landmark {fname}")

    fingertip_names: dict[str, list[str]] = {}
    for side, tips in doc["fingertips"].items():
        if side not in ("left", "right"):
            raise ModelFormatError(f"fingertips: unknown side {side!r}")
        fingertip_names[side] = []
        for finger, d in tips.items():
            fname = f"{side}_{finger}_tip"
            add_frame(fname, d, f"fingertip {fname}")
            fingertip_names[side].append(fname)

    dof_layout: dict[str, list[str]] = {}
    for entry in doc["dof_layout"]:
        _check_keys(entry, {"group", "joints"}, "dof_layout[]")
        dof_layout[str(entry["group"])] = [str(j) for j in entry["joints"]]

    hand_mapping = doc.get("hand_mapping", {})
    for side, section in hand_mapping.items():
        _check_keys(section, {"palm", "glove", "exo", "euler", "keyvectors"},
                    f"hand_mapping.{side}")
        if "palm" in section:
            link, p, q = _parse_frame_def(section["palm"],
                                          f"hand_mapping.{side}.palm")
            if link not in link_producer:
                raise ModelFormatError(
                    f"hand_mapping.{side}.palm: link {link!r} undefined")
            frames[f"{side}_palm"] = Frame(link_producer[link], p, q)

    return RobotModel(str(doc["name"]), links, names,
                      np.asarray(parents, dtype=np.int32),
                      np.stack(axes), np.stack(offs_p), np.stack(offs_q),
                      np.stack(lims), frames, dof_layout, fingertip_names,
                      hand_mapping)


def load_robot(path_or_name: str) -> RobotModel:
    """Load a robot model from a JSON file path or a built-in model name."""
    if "/" not in path_or_name and not path_or_name.endswith(".json"):
        res = resources.files("telekin").joinpath(
            f"data/models/{path_or_name}.json")
        if not res.is_file():
            raise ModelFormatError(f"no built-in model {path_or_name!r}")
        doc = json.loads(res.read_text())
    else:
        with open(path_or_name) as fh:
            doc = json.load(fh)
    return robot_from_dict(doc)


def builtin_model_names() -> list[str]:
    root = resources.files("telekin").joinpath("data/models")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


# ---------------------------------------------------------------------------
# test / fixture helper


def make_chain(lengths: Sequence[float], axes: Sequence[Sequence[float]],
               limits: Sequence[Sequence[float]] | None = None,
               end_frame: str = "end") -> KinematicTree:
    """Serial chain for tests: joint i at the end of segment i-1.

    The first joint sits at the root; segment `lengths[i]` extends along
    local +X after joint i.  Frame `end_frame` marks the final tip; each
    intermediate joint origin is exposed as `joint_<i>`.
    """
    n = len(lengths)
    if limits is None:
        limits = [(-np.pi, np.pi)] * n
    names = [f"j{i}" for i in range(n)]
    parent = np.arange(-1, n - 1, dtype=np.int32)
    axis = np.asarray(axes, dtype=float)
    off_p = np.zeros((n, 3))
    for i in range(1, n):
        off_p[i, 0] = lengths[i - 1]
    off_q = np.tile([1.0, 0.0, 0.0, 0.0], (n, 1))
    frames = {f"joint_{i}": Frame(i, np.zeros(3), np.array([1.0, 0, 0, 0]))
              for i in range(n)}
    frames[end_frame] = Frame(n - 1, np.array([lengths[-1], 0.0, 0.0]),
                              np.array([1.0, 0.0, 0.0, 0.0]))
    return KinematicTree(names, parent, axis, off_p, off_q,
                         np.asarray(limits, dtype=float), frames)
