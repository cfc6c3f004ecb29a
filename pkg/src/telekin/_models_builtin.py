"""Constructors for the built-in robot model documents.

The dicts produced here are serialized once into `data/models/*.json`
(see tools/gen_data.py); the loader in `model.py` only ever reads the
JSON files.  Dimensions are plausible placeholders at the right DoF
counts, recorded in the files themselves.

Home configuration is a T-pose: arms along +/-Y, palms facing down (-Z),
fingers extended.  Left-hand finger curl closes toward -Z with positive
joint values; the right hand mirrors the same semantics.
"""

from __future__ import annotations

# glove source order (20 DoF): per finger [mcp_flex, mcp_abduct, pip, dip],
# thumb first.  exo source order (15 DoF): per finger [prox, mid, dist].
_FINGERS5 = ("thumb", "index", "middle", "ring", "pinky")


def _arm_joints(side: str, clav: float, torso: float, upper: float,
                forearm: float) -> list[dict]:
    s = 1.0 if side == "left" else -1.0
    pfx = "l" if side == "left" else "r"
    abd_lim = [-3.0, 0.6] if side == "left" else [-0.6, 3.0]
    elb_lim = [-2.53, 0.05] if side == "left" else [-0.05, 2.53]
    return [
        {"name": f"{pfx}_shoulder_flex", "parent": "pelvis",
         "child": f"{side}_shoulder_a", "axis": [0, 0, 1],
         "limits": [-2.96, 2.96],
         "offset": {"p": [0.0, s * clav, torso]}},
        {"name": f"{pfx}_shoulder_abd", "parent": f"{side}_shoulder_a",
         "child": f"{side}_shoulder_b", "axis": [1, 0, 0],
         "limits": abd_lim, "offset": {}},
        {"name": f"{pfx}_shoulder_rot", "parent": f"{side}_shoulder_b",
         "child": f"{side}_upper_arm", "axis": [0, 1, 0],
         "limits": [-2.96, 2.96], "offset": {}},
        {"name": f"{pfx}_elbow", "parent": f"{side}_upper_arm",
         "child": f"{side}_elbow", "axis": [0, 0, 1],
         "limits": elb_lim, "offset": {"p": [0.0, s * upper, 0.0]}},
        {"name": f"{pfx}_forearm_rot", "parent": f"{side}_elbow",
         "child": f"{side}_forearm", "axis": [0, 1, 0],
         "limits": [-2.09, 2.09],
         "offset": {"p": [0.0, s * forearm, 0.0]}},
        {"name": f"{pfx}_wrist_flex", "parent": f"{side}_forearm",
         "child": f"{side}_wrist_a", "axis": [1, 0, 0],
         "limits": [-1.4, 1.4], "offset": {}},
        {"name": f"{pfx}_wrist_dev", "parent": f"{side}_wrist_a",
         "child": f"{side}_hand", "axis": [0, 0, 1],
         "limits": [-1.0, 1.0], "offset": {}},
    ]


def _hand_joints(side: str, fingers: tuple[str, ...], scale: float) -> list[dict]:
    s = 1.0 if side == "left" else -1.0
    pfx = "l" if side == "left" else "r"
    curl_axis = [-1, 0, 0] if side == "left" else [1, 0, 0]
    tflex_axis = [0, 0, 1] if side == "left" else [0, 0, -1]
    mcp = {
        "index": [0.025, 0.090, 0.0],
        "middle": [0.008, 0.095, 0.0],
        "ring": [-0.009, 0.090, 0.0],
        "pinky": [-0.026, 0.085, 0.0],
    }
    joints = [
        {"name": f"{pfx}_thumb_rot", "parent": f"{side}_hand",
         "child": f"{side}_thumb_prox", "axis": [0, 1, 0],
         "limits": [-0.3, 1.8],
         "offset": {"p": [0.030 * scale, s * 0.030 * scale, -0.010 * scale]}},
        {"name": f"{pfx}_thumb_flex", "parent": f"{side}_thumb_prox",
         "child": f"{side}_thumb_dist", "axis": tflex_axis,
         "limits": [-0.3, 1.6],
         "offset": {"p": [0.035 * scale, s * 0.020 * scale, 0.0]}},
    ]
    for f in fingers:
        if f == "thumb":
            continue
        p = mcp[f]
        joints.append(
            {"name": f"{pfx}_{f}_mcp", "parent": f"{side}_hand",
             "child": f"{side}_{f}_dist", "axis": curl_axis,
             "limits": [-0.15, 2.3],
             "offset": {"p": [p[0] * scale, s * p[1] * scale, p[2]]}})
    return joints


def _fingertips(side: str, fingers: tuple[str, ...],
                tip_len: dict[str, float]) -> dict:
    s = 1.0 if side == "left" else -1.0
    tips = {}
    for f in fingers:
        if f == "thumb":
            tips[f] = {"link": f"{side}_thumb_dist",
                       "p": [tip_len["thumb"], 0.0, 0.0]}
        else:
            tips[f] = {"link": f"{side}_{f}_dist",
                       "p": [0.0, s * tip_len[f], 0.0]}
    return tips


def _hand_mapping(side: str, fingers: tuple[str, ...]) -> dict:
    s = 1.0 if side == "left" else -1.0
    pfx = "l" if side == "left" else "r"
    glove_flex = {"thumb": 0, "index": 4, "middle": 8, "ring": 12, "pinky": 16}
    exo_prox = {"thumb": 0, "index": 3, "middle": 6, "ring": 9, "pinky": 12}
    tip_idx = {"thumb": 4, "index": 8, "middle": 12, "ring": 16, "pinky": 20}

    glove = [
        {"joint": f"{pfx}_thumb_rot", "source": 1, "a": 1.0, "b": 0.0},
        {"joint": f"{pfx}_thumb_flex", "source": 0, "a": 1.0, "b": 0.0},
    ]
    exo = [
        {"joint": f"{pfx}_thumb_rot", "source": 0, "a": 1.0, "b": 0.0},
        {"joint": f"{pfx}_thumb_flex", "source": 1, "a": 1.0, "b": 0.0},
    ]
    euler = [
        {"joint": f"{pfx}_thumb_rot", "source": "thumb_cmc",
         "component": 1, "a": 1.0, "b": 0.0},
        {"joint": f"{pfx}_thumb_flex", "source": "thumb_mcp",
         "component": 2, "a": s, "b": 0.0},
    ]
    keyvectors = []
    scale_of = {f: i for i, f in enumerate(_FINGERS5)}
    for f in fingers:
        if f != "thumb":
            glove.append({"joint": f"{pfx}_{f}_mcp",
                          "source": glove_flex[f], "a": 1.35, "b": 0.0})
            exo.append({"joint": f"{pfx}_{f}_mcp",
                        "source": exo_prox[f], "a": 1.5, "b": 0.0})
            euler.append({"joint": f"{pfx}_{f}_mcp", "source": f"{f}_mcp",
                          "component": 0, "a": -s, "b": 0.0})
        keyvectors.append({"from": "base", "to": f"{side}_{f}_tip",
                           "human": [0, tip_idx[f]],
                           "scales": [scale_of[f]]})
    if len(fingers) == 5:
        # thumb-to-index pinch vector, aids fine pinch fidelity
        keyvectors.append({"from": f"{side}_thumb_tip",
                           "to": f"{side}_index_tip",
                           "human": [tip_idx["thumb"], tip_idx["index"]],
                           "scales": [0, 1]})
    return {
        "palm": {"link": f"{side}_hand",
                 "p": [0.0, s * 0.060, -0.015]},
        "glove": glove,
        "exo": exo,
        "euler": euler,
        "keyvectors": keyvectors,
    }


def build_humanoid(name: str, *, torso_lower: float, torso_upper: float,
                   neck: float, skull: float, clavicle: float,
                   upper_arm: float, forearm: float,
                   fingers: tuple[str, ...], hand_scale: float = 1.0,
                   tip_len: dict[str, float] | None = None) -> dict:
    """Assemble one dual-arm model document."""
    if tip_len is None:
        tip_len = {"thumb": 0.050, "index": 0.075, "middle": 0.078,
                   "ring": 0.070, "pinky": 0.060}
    tip_len = {f: round(v * hand_scale, 4) for f, v in tip_len.items()}
    torso = torso_lower + torso_upper

    joints = []
    for side in ("left", "right"):
        joints += _arm_joints(side, clavicle, torso, upper_arm, forearm)
    for side in ("left", "right"):
        joints += _hand_joints(side, fingers, hand_scale)

    links = [{"name": "pelvis", "length": 0.0},
             {"name": "torso_lower", "length": torso_lower},
             {"name": "torso_upper", "length": torso_upper},
             {"name": "neck", "length": neck},
             {"name": "skull", "length": skull}]
    for side in ("left", "right"):
        links += [
            {"name": f"{side}_clavicle", "length": clavicle},
            {"name": f"{side}_shoulder_a", "length": 0.0},
            {"name": f"{side}_shoulder_b", "length": 0.0},
            {"name": f"{side}_upper_arm", "length": upper_arm},
            {"name": f"{side}_elbow", "length": 0.0},
            {"name": f"{side}_forearm", "length": forearm},
            {"name": f"{side}_wrist_a", "length": 0.0},
            {"name": f"{side}_hand", "length": round(0.09 * hand_scale, 4)},
            {"name": f"{side}_thumb_prox", "length": round(0.040 * hand_scale, 4)},
            {"name": f"{side}_thumb_dist", "length": tip_len["thumb"]},
        ]
        for f in fingers:
            if f != "thumb":
                links.append({"name": f"{side}_{f}_dist",
                              "length": tip_len[f]})

    landmarks = {
        "pelvis": {"link": "pelvis", "p": [0.0, 0.0, 0.0]},
        "left_shoulder": {"link": "pelvis", "p": [0.0, clavicle, torso]},
        "right_shoulder": {"link": "pelvis", "p": [0.0, -clavicle, torso]},
        "left_wrist": {"link": "left_hand", "p": [0.0, 0.0, 0.0]},
        "right_wrist": {"link": "right_hand", "p": [0.0, 0.0, 0.0]},
        "head": {"link": "pelvis", "p": [0.0, 0.0, torso + neck + skull]},
    }

    pfx = {"left": "l", "right": "r"}
    dof_layout = [
        {"group": "arm_left",
         "joints": [j["name"] for j in joints[:7]]},
        {"group": "arm_right",
         "joints": [j["name"] for j in joints[7:14]]},
        {"group": "hand_left",
         "joints": [j["name"] for j in joints[14:] if j["name"].startswith("l_")]},
        {"group": "hand_right",
         "joints": [j["name"] for j in joints[14:] if j["name"].startswith("r_")]},
    ]
    del pfx

    return {
        "name": name,
        "links": links,
        "joints": joints,
        "landmarks": landmarks,
        "fingertips": {side: _fingertips(side, fingers, tip_len)
                       for side in ("left", "right")},
        "dof_layout": dof_layout,
        "hand_mapping": {side: _hand_mapping(side, fingers)
                         for side in ("left", "right")},
    }


def builtin_docs() -> dict[str, dict]:
    five = ("thumb", "index", "middle", "ring", "pinky")
    three = ("thumb", "index", "middle")
    return {
        "h1_2_like": build_humanoid(
            "h1_2_like", torso_lower=0.14, torso_upper=0.16, neck=0.15,
            skull=0.10, clavicle=0.20, upper_arm=0.30, forearm=0.28,
            fingers=five),
        "gr1_like": build_humanoid(
            "gr1_like", torso_lower=0.13, torso_upper=0.15, neck=0.14,
            skull=0.10, clavicle=0.18, upper_arm=0.28, forearm=0.26,
            fingers=five, hand_scale=0.95),
        "g1_like": build_humanoid(
            "g1_like", torso_lower=0.11, torso_upper=0.12, neck=0.12,
            skull=0.09, clavicle=0.16, upper_arm=0.24, forearm=0.22,
            fingers=three, hand_scale=0.8),
    }
