"""Regenerate data/robots/franka.json from the Franka Emika modified-DH table.

Parameters: Franka Control Interface documentation, "Robot and interface
specifications", Denavit-Hartenberg parameters (Craig convention), flange at
0.107 m and the Franka Hand TCP at 0.1034 m rotated by -pi/4 about z.
"""

import json
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

# a, d, alpha per joint; joint angle added to theta
DH = [
    (0.0, 0.333, 0.0),
    (0.0, 0.0, -np.pi / 2),
    (0.0, 0.316, np.pi / 2),
    (0.0825, 0.0, np.pi / 2),
    (-0.0825, 0.384, -np.pi / 2),
    (0.0, 0.0, np.pi / 2),
    (0.088, 0.0, np.pi / 2),
]
LIMITS = [
    (-2.8973, 2.8973),
    (-1.7628, 1.7628),
    (-2.8973, 2.8973),
    (-3.0718, -0.0698),
    (-2.8973, 2.8973),
    (-0.0175, 3.7525),
    (-2.8973, 2.8973),
]
SOURCE = (
    "Franka Emika published modified-DH parameters (Craig convention) with joint limits; "
    "flange 0.107 m, Franka Hand TCP 0.1034 m, hand rotated -pi/4 about z. "
    "Generated by tools/make_franka.py."
)
FLANGE = 0.107
TCP = 0.1034


def quat_wxyz(rot: Rotation):
    x, y, z, w = rot.as_quat()
    return [float(w), float(x), float(y), float(z)]


def main():
    joints = []
    for i, ((a, d, alpha), lim) in enumerate(zip(DH, LIMITS)):
        rx = Rotation.from_euler("x", alpha)
        axis = rx.apply([0.0, 0.0, 1.0])
        point = [a, 0.0, 0.0]
        # fixed part RotX(alpha) TransX(a) TransZ(d)
        t = np.array([a, 0.0, 0.0]) + d * axis
        rot = rx
        if i == len(DH) - 1:
            # flange then hand: TransZ(FLANGE) RotZ(-pi/4) TransZ(TCP)
            t = t + rot.apply([0.0, 0.0, FLANGE + TCP])
            rot = rot * Rotation.from_euler("z", -np.pi / 4)
        joints.append(
            {
                "axis": [float(round(v, 15)) + 0.0 for v in axis],
                "point": point,
                "offset_translation": [float(round(v, 15)) + 0.0 for v in t],
                "offset_quaternion": quat_wxyz(rot),
                "limits": list(lim),
            }
        )
    desc = {
        "name": "franka",
        "source": SOURCE,
        "base_pose": {"translation": [0.0, 0.0, 0.0], "quaternion": [1.0, 0.0, 0.0, 0.0]},
        "joints": joints,
    }
    out = Path(__file__).resolve().parents[1] / "src" / "cgacdts" / "data" / "robots" / "franka.json"
    out.write_text(json.dumps(desc, indent=2) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
