"""Closed-loop differential inverse kinematics for the arm chains.

Each step moves the chain's joints by the damped least-squares update

    dq = J_w^T (J_w J_w^T + lambda^2 I)^-1 (k * e_w)

where the task error stacks position error and rotation-vector error, the
rotation rows are scaled by `rotation_weight` (0 = position only, the VR
wrist-translation mode), and joints are hard-clamped to their limits after
every step.  Redundancy is resolved by a small nullspace pull toward the
home configuration so elbow behavior is reproducible.

Two robustness measures on top of the plain update, both deterministic:

- the limit clamp is realized as an active set: joints pressing outward
  against a limit are pinned and the step is re-solved on the free columns
  (a naive clamp wastes the whole step and locks up against limits);
- the update norm is capped (`step_cap`) because damping alone does not
  prevent overshoot close to the stretched-arm singularity.

Live sessions run exactly one step per incoming frame (bounded latency);
replay runs `solve_ik` to convergence per frame.  `solve_ik` additionally
schedules the damping with the error magnitude and, when progress stalls,
restarts from the best of a fixed pseudo-random seed list; identical
inputs always produce identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import SingularUpdate
from .kinematics import chain_jacobian, fk_all
from .model import JointState, KinematicTree
from .transforms import RigidTransform, quat_conjugate, quat_mul, quat_to_rotvec

_RESTART_SEED = 0x7E1E
_RESTART_CANDIDATES = 16


@dataclass(frozen=True)
class IkConfig:
    damping: float = 0.05
    gain: float = 1.0
    max_iters: int = 100
    pos_tol: float = 1e-3
    rot_tol: float = 1e-2
    rotation_weight: float = 1.0
    nullspace_weight: float = 0.01
    step_cap: float = 0.35  # max joint-update norm (rad) per step
    dt: float = 1.0 / 60.0

    def __post_init__(self):
        if self.damping <= 0:
            raise ValueError("damping must be > 0")
        if self.pos_tol <= 0 or self.rot_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 <= self.rotation_weight <= 1.0:
            raise ValueError("rotation_weight must be in [0, 1]")

    def position_only(self) -> "IkConfig":
        return replace(self, rotation_weight=0.0)


@dataclass
class IkResult:
    state: JointState
    converged: bool
    iters: int
    final_pos_err: float
    final_rot_err: float


def dls_step(J: np.ndarray, e: np.ndarray, damping: float) -> np.ndarray:
    """Damped least-squares joint update for task error e."""
    JJt = J @ J.T
    A = JJt + (damping * damping) * np.eye(J.shape[0])
    return J.T @ np.linalg.solve(A, e)


def _task_error(pose: RigidTransform, target: RigidTransform,
                rotation_weight: float) -> tuple[np.ndarray, float, float]:
    e_pos = target.p - pose.p
    e_rot = quat_to_rotvec(quat_mul(target.q, quat_conjugate(pose.q)))
    pos_err = float(np.linalg.norm(e_pos))
    rot_err = float(np.linalg.norm(e_rot))
    e = np.concatenate([e_pos, rotation_weight * e_rot])
    return e, pos_err, rot_err


def clik_step(tree: KinematicTree, state: JointState, target: RigidTransform,
              cfg: IkConfig, frame: str) -> JointState:
    """One closed-loop IK step toward `target`; joints off the chain are untouched."""
    q = tree.check_q(state.q).copy()
    chain = tree.chain_to(frame)
    res = fk_all(tree, q)
    pose = res.frame_pose(frame)
    e, _, _ = _task_error(pose, target, cfg.rotation_weight)

    W = np.array([1.0, 1.0, 1.0, cfg.rotation_weight, cfg.rotation_weight,
                  cfg.rotation_weight])
    J = chain_jacobian(res, chain, pose.p) * W[:, None]

    lo = tree.limits[chain, 0]
    hi = tree.limits[chain, 1]
    qc = q[chain]
    m = len(chain)
    free = np.ones(m, dtype=bool)
    dq = np.zeros(m)
    for _ in range(3):  # active-set refinement
        Jf = J[:, free]
        dq = np.zeros(m)
        dq[free] = dls_step(Jf, cfg.gain * e, cfg.damping)
        if cfg.nullspace_weight > 0.0:
            A = Jf @ Jf.T + (cfg.damping ** 2) * np.eye(6)
            P = Jf.T @ np.linalg.solve(A, Jf)
            N = np.eye(int(free.sum())) - P
            dq[free] += cfg.nullspace_weight * (N @ (-qc[free]))
        n = float(np.linalg.norm(dq))
        if n > cfg.step_cap:
            dq *= cfg.step_cap / n
        cand = qc + dq
        pressing = ((cand < lo - 1e-12) & (dq < 0)) | \
                   ((cand > hi + 1e-12) & (dq > 0))
        pressing &= (qc <= lo + 1e-9) | (qc >= hi - 1e-9)
        if not pressing.any() or not (free & ~pressing).any():
            break
        free &= ~pressing

    if not np.all(np.isfinite(dq)):
        raise SingularUpdate("non-finite IK update; check damping")
    q[chain] = np.clip(qc + dq, lo, hi)
    return JointState(q, state.t)


def _wrist_errors(tree, q, target, frame, rotation_weight):
    pose = fk_all(tree, q).frame_pose(frame)
    _, pos_err, rot_err = _task_error(pose, target, rotation_weight)
    return pos_err, rot_err


def solve_ik(tree: KinematicTree, state: JointState, target: RigidTransform,
             cfg: IkConfig, frame: str) -> IkResult:
    """Iterate clik_step until tolerances are met or max_iters is hit.

    Returns the best configuration seen (by task error) when the budget
    runs out; `converged` is False in that case.
    """
    chain = tree.chain_to(frame)
    cur = state.copy()
    tree.check_q(cur.q)
    pos_err, rot_err = _wrist_errors(tree, cur.q, target, frame,
                                     cfg.rotation_weight)
    best = (pos_err + cfg.rotation_weight * rot_err, cur, pos_err, rot_err)
    restarts = np.random.default_rng(_RESTART_SEED)
    stall = 0
    iters = 0
    while not _done(pos_err, rot_err, cfg):
        if iters >= cfg.max_iters:
            _, bq, bp, br = best
            return IkResult(bq, False, iters, bp, br)
        # error-scheduled damping sharpens the final millimeters
        lam = max(0.002, min(cfg.damping, pos_err))
        cur = clik_step(tree, cur, target, replace(cfg, damping=lam), frame)
        iters += 1
        pos_err, rot_err = _wrist_errors(tree, cur.q, target, frame,
                                         cfg.rotation_weight)
        score = pos_err + cfg.rotation_weight * rot_err
        if score < best[0] - 1e-6:
            best = (score, cur, pos_err, rot_err)
            stall = 0
        else:
            if score < best[0]:
                best = (score, cur, pos_err, rot_err)
            stall += 1
            if stall >= 5 and iters < cfg.max_iters:
                cur = _restart(tree, cur, chain, target, frame, cfg, restarts)
                pos_err, rot_err = _wrist_errors(tree, cur.q, target, frame,
                                                 cfg.rotation_weight)
                stall = 0
    return IkResult(cur, True, iters, pos_err, rot_err)


def _restart(tree, cur, chain, target, frame, cfg, rng) -> JointState:
    """Deterministic stall escape: best of a batch of random chain configs."""
    lo = tree.limits[chain, 0]
    hi = tree.limits[chain, 1]
    best_q, best_err = None, np.inf
    for _ in range(_RESTART_CANDIDATES):
        q = cur.q.copy()
        q[chain] = rng.uniform(lo, hi)
        pos_err, rot_err = _wrist_errors(tree, q, target, frame,
                                         cfg.rotation_weight)
        err = pos_err + cfg.rotation_weight * rot_err
        if err < best_err:
            best_q, best_err = q, err
    return JointState(best_q, cur.t)


def _done(pos_err: float, rot_err: float, cfg: IkConfig) -> bool:
    if pos_err > cfg.pos_tol:
        return False
    return cfg.rotation_weight == 0.0 or rot_err <= cfg.rot_tol
