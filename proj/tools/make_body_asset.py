# SPDX-License-Identifier: Apache-2.0
"""Authors assets/body24.json, the bundled 24-joint articulated body.

Deterministic: rerunning reproduces the same file byte for byte. Offsets are
meters for an adult-sized figure; the ten shape directions scale the whole
body, the legs, the arms, the torso, and six smaller mixed modes.
"""

import json
import random
import sys

JOINTS = [
    # name, parent, rest offset from parent (x right, y up, z forward)
    ("pelvis", -1, (0.0, 0.0, 0.0)),
    ("l_hip", 0, (0.09, -0.07, 0.0)),
    ("r_hip", 0, (-0.09, -0.07, 0.0)),
    ("spine1", 0, (0.0, 0.11, 0.0)),
    ("l_knee", 1, (0.02, -0.40, 0.0)),
    ("r_knee", 2, (-0.02, -0.40, 0.0)),
    ("spine2", 3, (0.0, 0.13, 0.0)),
    ("l_ankle", 4, (0.0, -0.41, -0.02)),
    ("r_ankle", 5, (0.0, -0.41, -0.02)),
    ("spine3", 6, (0.0, 0.12, 0.0)),
    ("l_foot", 7, (0.02, -0.06, 0.12)),
    ("r_foot", 8, (-0.02, -0.06, 0.12)),
    ("neck", 9, (0.0, 0.14, 0.0)),
    ("l_collar", 9, (0.07, 0.10, 0.0)),
    ("r_collar", 9, (-0.07, 0.10, 0.0)),
    ("head", 12, (0.0, 0.12, 0.01)),
    ("l_shoulder", 13, (0.10, 0.02, 0.0)),
    ("r_shoulder", 14, (-0.10, 0.02, 0.0)),
    ("l_elbow", 16, (0.26, 0.0, 0.0)),
    ("r_elbow", 17, (-0.26, 0.0, 0.0)),
    ("l_wrist", 18, (0.25, 0.0, 0.0)),
    ("r_wrist", 19, (-0.25, 0.0, 0.0)),
    ("l_hand", 20, (0.08, 0.0, 0.0)),
    ("r_hand", 21, (-0.08, 0.0, 0.0)),
]

LEGS = {"l_hip", "r_hip", "l_knee", "r_knee", "l_ankle", "r_ankle", "l_foot", "r_foot"}
ARMS = {"l_collar", "r_collar", "l_shoulder", "r_shoulder", "l_elbow", "r_elbow",
        "l_wrist", "r_wrist", "l_hand", "r_hand"}
TORSO = {"spine1", "spine2", "spine3", "neck", "head"}

EVAL_JOINTS = ["l_hip", "r_hip", "l_knee", "r_knee", "l_ankle", "r_ankle",
               "l_shoulder", "r_shoulder", "l_elbow", "r_elbow",
               "l_wrist", "r_wrist", "neck", "head"]

SHAPE_DIM = 10
VERTEX_COUNT = 64


def shape_basis(name, offset, rng):
    basis = []
    for b in range(SHAPE_DIM):
        if b == 0:
            gain = 0.05
        elif b == 1:
            gain = 0.04 if name in LEGS else 0.0
        elif b == 2:
            gain = 0.04 if name in ARMS else 0.0
        elif b == 3:
            gain = 0.03 if name in TORSO else 0.0
        else:
            gain = 0.0
        col = [gain * c for c in offset]
        if b >= 4:
            col = [round(rng.gauss(0.0, 0.004), 5) for _ in range(3)]
        basis.append([round(c, 5) for c in col])
    return basis


def main(out_path):
    rng = random.Random(240814)
    joints = []
    for name, parent, offset in JOINTS:
        joints.append({
            "name": name,
            "parent": parent,
            "rest_offset": list(offset),
            "shape_basis": shape_basis(name, offset, rng),
        })

    vertices = []
    for v in range(VERTEX_COUNT):
        j = v % len(JOINTS)
        r = 0.03 + 0.07 * rng.random()
        direction = [rng.gauss(0.0, 1.0) for _ in range(3)]
        norm = sum(c * c for c in direction) ** 0.5
        vertices.append({
            "joint": j,
            "offset": [round(r * c / norm, 5) for c in direction],
        })

    doc = {
        "joints": joints,
        "vertices": vertices,
        "eval_joints": EVAL_JOINTS,
    }
    with open(out_path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "assets/body24.json")
