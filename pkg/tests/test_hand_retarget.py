import numpy as np
import pytest

from telekin.errors import IncompleteMapping, InvalidKeypoints
from telekin.hand_retarget import (RetargetConfig, hand_model,
                                   keypoints_from_hand, retarget_euler,
                                   retarget_glove, retarget_vector,
                                   validate_keypoints)
from telekin.transforms import quat_from_axis_angle

ONES = np.ones(5)


def random_hand_q(hand, rng, margin=0.05):
    lo = hand.limits[:, 0] + margin
    hi = hand.limits[:, 1] - margin
    return rng.uniform(lo, hi)


def tip_vector_rms(hand, q, targets):
    world = hand.fk(q)
    errs = []
    for i, kv in enumerate(hand.keyvectors):
        v = (hand.frame_position(world, kv.to_frame)
             - hand.frame_position(world, kv.from_frame))
        errs.append(np.sum((v - targets[i]) ** 2))
    return float(np.sqrt(np.mean(errs)))


# ---------------------------------------------------------------------------
# keypoint validation


def test_keypoints_from_hand_are_valid(h1, g1):
    for robot in (h1, g1):
        for side in ("left", "right"):
            hand = hand_model(robot, side)
            validate_keypoints(keypoints_from_hand(hand, np.zeros(hand.n_dof)))


def test_keypoints_wrist_origin_enforced(h1):
    hand = hand_model(h1, "left")
    pts = keypoints_from_hand(hand, np.zeros(hand.n_dof))
    pts[0] = [0.01, 0.0, 0.0]
    with pytest.raises(InvalidKeypoints):
        validate_keypoints(pts)


def test_keypoints_spacing_enforced(h1):
    hand = hand_model(h1, "left")
    pts = keypoints_from_hand(hand, np.zeros(hand.n_dof))
    pts[4] = pts[3]  # collapse thumb DIP-tip edge
    with pytest.raises(InvalidKeypoints):
        validate_keypoints(pts)


# ---------------------------------------------------------------------------
# vector retargeting


def test_generate_then_retarget_self_consistency(h1):
    rng = np.random.default_rng(41)
    hand = hand_model(h1, "left")
    cfg = RetargetConfig()
    for _ in range(20):
        q_true = random_hand_q(hand, rng)
        kp = keypoints_from_hand(hand, q_true)
        pts = validate_keypoints(kp)
        targets = [(pts[kv.human[1]] - pts[kv.human[0]])
                   for kv in hand.keyvectors]
        q_star = retarget_vector(kp, hand, ONES, np.zeros(hand.n_dof), cfg)

        def objective(q):
            world = hand.fk(q)
            tot = 0.0
            for i, kv in enumerate(hand.keyvectors):
                v = (hand.frame_position(world, kv.to_frame)
                     - hand.frame_position(world, kv.from_frame))
                tot += float(np.sum((v - targets[i]) ** 2))
            return tot + cfg.w_smooth * float(np.sum(q ** 2))

        assert objective(q_star) <= objective(q_true) + 1e-8
        assert tip_vector_rms(hand, q_star, targets) < 2e-3


def test_open_hand_maps_to_home(h1):
    hand = hand_model(h1, "left")
    kp = keypoints_from_hand(hand, np.zeros(hand.n_dof))
    q = retarget_vector(kp, hand, ONES, np.zeros(hand.n_dof))
    assert np.abs(q).max() < 0.05


def test_huge_smoothness_freezes_hand(h1):
    hand = hand_model(h1, "left")
    rng = np.random.default_rng(42)
    q_prev = random_hand_q(hand, rng)
    kp = keypoints_from_hand(hand, random_hand_q(hand, rng))
    cfg = RetargetConfig(w_smooth=1e6)
    q = retarget_vector(kp, hand, ONES, q_prev, cfg)
    assert np.abs(q - q_prev).max() < 1e-6


def test_outputs_within_limits_and_deterministic(h1):
    hand = hand_model(h1, "right")
    rng = np.random.default_rng(43)
    kp = keypoints_from_hand(hand, random_hand_q(hand, rng))
    a = retarget_vector(kp, hand, ONES, np.zeros(hand.n_dof))
    b = retarget_vector(kp, hand, ONES, np.zeros(hand.n_dof))
    assert np.array_equal(a, b)
    assert np.all(a >= hand.limits[:, 0]) and np.all(a <= hand.limits[:, 1])


def test_keypoint_lipschitz_stability(h1, g1):
    # <= 1 mm keypoint perturbation must move the solution < 0.1 rad/joint
    rng = np.random.default_rng(44)
    checked = 0
    for robot in (h1, g1):
        hand = hand_model(robot, "left")
        for _ in range(50):
            q_true = random_hand_q(hand, rng)
            kp = keypoints_from_hand(hand, q_true)
            q0 = retarget_vector(kp, hand, ONES, np.zeros(hand.n_dof))
            noise = rng.uniform(-1, 1, size=kp.shape)
            noise *= 1e-3 / np.maximum(np.linalg.norm(noise, axis=1,
                                                      keepdims=True), 1e-12)
            kp2 = kp + noise
            kp2[0] = 0.0
            q1 = retarget_vector(kp2, hand, ONES, np.zeros(hand.n_dof))
            assert np.abs(q1 - q0).max() < 0.1
            checked += 1
    assert checked == 100


# ---------------------------------------------------------------------------
# glove retargeting


def test_glove_zero_passthrough(h1):
    hand = hand_model(h1, "left")
    q = retarget_glove(np.zeros(20), hand)
    assert np.allclose(q, np.clip(np.zeros(hand.n_dof),
                                  hand.limits[:, 0], hand.limits[:, 1]))


def test_glove_clamps_beyond_limits(h1):
    hand = hand_model(h1, "left")
    src = np.zeros(20)
    src[0] = np.pi  # thumb mcp flex far beyond the robot's 1.6 limit
    q = retarget_glove(src, hand)
    tf = hand.joint_names.index("l_thumb_flex")
    assert q[tf] == hand.limits[tf, 1]


def test_glove_identity_mapping_elementwise(h1):
    hand = hand_model(h1, "left")
    mapping = [{"joint": n, "source": i, "a": 1.0, "b": 0.0}
               for i, n in enumerate(hand.joint_names)]
    src = np.zeros(20)
    src[:hand.n_dof] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
    q = retarget_glove(src, hand, mapping)
    assert np.allclose(q, src[:hand.n_dof])


def test_glove_incomplete_mapping(h1):
    hand = hand_model(h1, "left")
    with pytest.raises(IncompleteMapping):
        retarget_glove(np.zeros(20), hand, mapping=hand.glove_map[:-1])


def test_exo_glove_routing(g1):
    hand = hand_model(g1, "left")
    q = retarget_glove(np.full(15, 0.5), hand)
    assert q.shape == (hand.n_dof,)
    assert np.all(q >= hand.limits[:, 0]) and np.all(q <= hand.limits[:, 1])


# ---------------------------------------------------------------------------
# euler retargeting


def identity_rotations(hand):
    return {row["source"]: np.array([1.0, 0.0, 0.0, 0.0])
            for row in hand.euler_map}


def test_euler_identity_is_home(h1):
    hand = hand_model(h1, "left")
    q, degen = retarget_euler(identity_rotations(hand), hand)
    assert np.allclose(q, 0.0)
    assert degen == []


def test_euler_pure_flexion_recovered(h1):
    hand = hand_model(h1, "left")
    rot = identity_rotations(hand)
    # rotate the index joint about the robot's own flexion axis by theta
    j = hand.joint_names.index("l_index_mcp")
    theta = 0.7
    rot["index_mcp"] = quat_from_axis_angle(hand.axis[j], theta)
    q, _ = retarget_euler(rot, hand)
    assert np.isclose(q[j], theta, atol=1e-9)


def test_euler_clamped(h1):
    hand = hand_model(h1, "left")
    rot = identity_rotations(hand)
    j = hand.joint_names.index("l_index_mcp")
    rot["index_mcp"] = quat_from_axis_angle(hand.axis[j], 3.0)
    q, _ = retarget_euler(rot, hand)
    assert q[j] == hand.limits[j, 1]


def test_euler_gimbal_flagged(h1):
    hand = hand_model(h1, "left")
    rot = identity_rotations(hand)
    rot["thumb_cmc"] = quat_from_axis_angle([0, 1, 0], np.pi / 2)
    q, degen = retarget_euler(rot, hand)
    assert "thumb_cmc" in degen
    assert np.all(np.isfinite(q))
