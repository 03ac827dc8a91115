"""Regenerate the bundled scenario configs in src/cgacdts/data/scenarios."""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "cgacdts" / "data" / "scenarios"

ROBOTS = {
    "arm1": {"model": "franka", "base_pose": {"translation": [0.0, 0.5, 0.0], "quaternion": [1.0, 0.0, 0.0, 0.0]}},
    "arm2": {"model": "franka", "base_pose": {"translation": [0.0, -0.5, 0.0], "quaternion": [1.0, 0.0, 0.0, 0.0]}},
}
ORIGIN = [0.0, 0.0, 0.0]
CONSTRAINED = {"max_iter": 1000, "constraint_tol": 1e-9, "penalty_loops": 8}

SCENARIOS = [
    {
        "name": "reach_point_left",
        "kind": "reach_point",
        "description": "Target 0.3 m from the arm1 (left) end-effector.",
        "target": {"near_arm": "arm1", "offset": [0.18, 0.0, -0.24]},
        "acceptance": {"residual_max": 1e-8, "nearer_arm_moves_more": True},
    },
    {
        "name": "reach_point_right",
        "kind": "reach_point",
        "description": "Target 0.3 m from the arm2 (right) end-effector.",
        "target": {"near_arm": "arm2", "offset": [0.18, 0.0, -0.24]},
        "acceptance": {"residual_max": 1e-8, "nearer_arm_moves_more": True},
    },
    {
        "name": "reach_circle",
        "kind": "reach_circle",
        "description": "Both end-effectors on a vertical circle, relative pose kept close to the start.",
        "target": {"circle": [[0.5, 0.25, 0.35], [0.5, -0.25, 0.35], [0.5, 0.0, 0.6]], "relative_weight": 1.0},
        "solver": CONSTRAINED,
        "acceptance": {"constraint_max": 1e-6, "circle_distance_max": 1e-4, "projected_gradient_max": 1e-5},
    },
    {
        "name": "reach_plane",
        "kind": "reach_plane",
        "description": "Both end-effectors on the horizontal plane z = 0.3 m.",
        "target": {"plane": [[0.0, 0.0, 0.3], [1.0, 0.0, 0.3], [0.0, 1.0, 0.3]], "formulation": "cooperative"},
        "acceptance": {"incidence_max": 1e-6},
    },
    {
        "name": "align_axis",
        "kind": "align_axis",
        "description": "Tool x-axes collinear with the end-effectors 0.6 m apart.",
        "target": {
            "line1": {"point": ORIGIN, "direction": [1.0, 0.0, 0.0]},
            "line2": {"point": ORIGIN, "direction": [1.0, 0.0, 0.0]},
            "distance": 0.6,
            "posture_weight": 1.0,
        },
        "solver": CONSTRAINED,
        "acceptance": {"direction_cross_max": 1e-6, "moment_gap_max": 1e-6, "distance_dev_max": 1e-6},
    },
    {
        "name": "balance_plate",
        "kind": "balance_plate",
        "description": "Hold a plate by its rim under MPC; step disturbance on arm1 joints 2 and 7.",
        "target": {
            "line1": {"point": ORIGIN, "direction": [0.0, 1.0, 0.0]},
            "line2": {"point": ORIGIN, "direction": [0.0, 1.0, 0.0]},
            "axis": {"point": ORIGIN, "direction": [0.0, 0.0, 1.0]},
            "distance": 0.6,
            "posture_weight": 1.0,
        },
        "solver": {"max_iter": 1000, "constraint_tol": 1e-12, "penalty_loops": 8},
        "mpc": {
            "horizon": 10, "dt": 0.01, "replan_every": 10, "plant_dt": 0.001, "steps": 1300,
            "control_weight": 1e-2, "velocity_weight": 1.0, "max_iter": 10, "cost_tol": 1e-10,
        },
        "weights": {"align": 1e3, "axis": 1e3, "dist": 1e5},
        "perturbations": [{"tick": 100, "joints": {"arm1:2": 0.1, "arm1:7": 0.1}}],
        "acceptance": {
            "equilibrium_residual_max": 1e-6, "equilibrium_control_max": 1e-8,
            "recovery_threshold": 1e-3, "recovery_time_max": 1.0, "distance_dev_max": 5e-3,
        },
    },
]

if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for sc in SCENARIOS:
        body = {"name": sc["name"], "kind": sc["kind"], "description": sc["description"], "robots": ROBOTS, "seed": 0}
        body.update({k: v for k, v in sc.items() if k not in body})
        (OUT / f"{sc['name']}.json").write_text(json.dumps(body, indent=2) + "\n")
        print("wrote", sc["name"])
