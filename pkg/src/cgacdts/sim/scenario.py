"""Declarative scenario configs: parsing, validation and a stable content hash.

A scenario is a JSON object::

    {
      "name": "reach_point_left",
      "kind": "reach_point",
      "robots": {"arm1": {"model": "franka", "base_pose": {...}}, "arm2": {...}},
      "q0": [...],                      # optional, defaults to the home pose per arm
      "target": {...},                  # kind specific, Euclidean terms
      "solver": {...},                  # flat Gauss-Newton options
      "mpc": {...},                     # balance_plate only
      "perturbations": [...],           # balance_plate only
      "acceptance": {...}               # thresholds checked after the run
    }

Lengths are meters, angles radians, quaternions ``(w, x, y, z)``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..geometry import circle_from_points
from ..kinematics import (
    DualArmSystem,
    KinematicChain,
    RobotDescriptionError,
    bundled_robot,
    load_robot,
    parse_pose,
)
from ..solvers import GaussNewtonOptions

KINDS = ("reach_point", "reach_circle", "reach_plane", "align_axis", "balance_plate")
HOME_POSE = (0.0, -np.pi / 4, 0.0, -3 * np.pi / 4, 0.0, np.pi / 2, np.pi / 4)

MPC_DEFAULTS = {
    "horizon": 10,
    "dt": 0.01,
    "replan_every": 10,
    "plant_dt": 0.001,
    "steps": 1000,
    "control_weight": 1e-2,
    "velocity_weight": 0.0,
    "max_iter": 10,
    "grad_tol": 1e-10,
    "cost_tol": 1e-10,
}

_TOP_KEYS = {
    "name", "kind", "description", "robots", "q0", "target", "solver", "mpc",
    "weights", "perturbations", "acceptance", "seed", "initial_jitter",
}


class ScenarioError(ValueError):
    """Scenario config failed to parse or validate."""


@dataclass(frozen=True)
class LineSpec:
    point: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True)
class PerturbationSpec:
    tick: int
    joints: dict[int, float]  # zero-based joint index -> offset in radians


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    system: DualArmSystem
    q0: np.ndarray
    target: dict
    solver: dict
    mpc: dict
    weights: dict
    perturbations: tuple[PerturbationSpec, ...]
    acceptance: dict
    seed: int
    initial_jitter: float
    normalized: dict = field(repr=False)
    source: Path | None = None

    @property
    def hash(self) -> str:
        return scenario_hash(self.normalized)

    def gauss_newton_options(self, max_iter: int | None = None) -> GaussNewtonOptions:
        cfg = dict(self.solver)
        if max_iter is not None:
            cfg["max_iter"] = int(max_iter)
        return GaussNewtonOptions.from_mapping(cfg)

    def with_overrides(self, **kw) -> "Scenario":
        """Copy with fields replaced (e.g. ``perturbations=()`` or ``mpc=...``)."""
        return replace(self, **kw)


def scenario_hash(normalized: dict) -> str:
    """SHA-256 of the canonical JSON form of a normalized config."""
    text = json.dumps(normalized, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode()).hexdigest()


def _canon(value):
    """Numbers become floats so that ``1`` and ``1.0`` hash the same."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _canon(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canon(v) for v in value]
    if isinstance(value, np.ndarray):
        return _canon(value.tolist())
    raise ScenarioError(f"unsupported value {value!r}")


def _vec(node, n: int, ctx: str) -> np.ndarray:
    try:
        v = np.asarray(node, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"{ctx}: expected {n} numbers") from None
    if v.shape != (n,) or not np.all(np.isfinite(v)):
        raise ScenarioError(f"{ctx}: expected {n} finite numbers")
    return v


def _number(node, ctx: str, positive: bool = False, minimum=None) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)) or not np.isfinite(node):
        raise ScenarioError(f"{ctx}: expected a finite number")
    if positive and not node > 0:
        raise ScenarioError(f"{ctx}: must be > 0 (got {node})")
    if minimum is not None and node < minimum:
        raise ScenarioError(f"{ctx}: must be >= {minimum} (got {node})")
    return float(node)


def _integer(node, ctx: str, minimum: int) -> int:
    if isinstance(node, bool) or not isinstance(node, (int, float)) or int(node) != node:
        raise ScenarioError(f"{ctx}: expected an integer")
    if node < minimum:
        raise ScenarioError(f"{ctx}: must be >= {minimum} (got {node})")
    return int(node)


def _line(node, ctx: str) -> LineSpec:
    if not isinstance(node, dict):
        raise ScenarioError(f"{ctx}: expected {{point, direction}}")
    point = _vec(node.get("point"), 3, f"{ctx}.point")
    direction = _vec(node.get("direction"), 3, f"{ctx}.direction")
    n = np.linalg.norm(direction)
    if n < 1e-12:
        raise ScenarioError(f"{ctx}: direction has zero length")
    return LineSpec(point, direction / n)


def _three_points(node, ctx: str) -> list[np.ndarray]:
    if not isinstance(node, list) or len(node) != 3:
        raise ScenarioError(f"{ctx}: expected three points")
    pts = [_vec(p, 3, f"{ctx}[{i}]") for i, p in enumerate(node)]
    try:
        circle_from_points(*pts)
    except ValueError:
        raise ScenarioError(f"{ctx}: the three points are collinear") from None
    return pts


def _load_arm(node, ctx: str, base_dir: Path | None) -> tuple[KinematicChain, dict]:
    if not isinstance(node, dict):
        raise ScenarioError(f"{ctx}: expected an object")
    model = node.get("model", "franka")
    if not isinstance(model, str):
        raise ScenarioError(f"{ctx}.model: expected a bundled name or a file path")
    try:
        if model.endswith(".json"):
            path = Path(model)
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            try:
                desc = json.loads(path.read_text())
            except OSError as exc:
                raise ScenarioError(f"{ctx}.model: cannot read {path} ({exc.strerror})") from exc
        else:
            desc = bundled_robot(model)
        chain = load_robot(desc)
        if "base_pose" in node:
            chain = chain.with_base(parse_pose(node["base_pose"], f"{ctx}.base_pose"))
    except (RobotDescriptionError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"{ctx}: {exc}") from exc
    return chain, {"model": desc, "base_pose": node.get("base_pose")}


def _parse_target(kind: str, node, ctx: str) -> dict:
    if not isinstance(node, dict):
        raise ScenarioError(f"{ctx}: expected an object")
    out: dict = {}
    if kind == "reach_point":
        if "point" in node:
            out["point"] = _vec(node["point"], 3, f"{ctx}.point")
        elif "near_arm" in node:
            if node["near_arm"] not in ("arm1", "arm2"):
                raise ScenarioError(f"{ctx}.near_arm: expected 'arm1' or 'arm2'")
            out["near_arm"] = node["near_arm"]
            out["offset"] = _vec(node.get("offset"), 3, f"{ctx}.offset")
        else:
            raise ScenarioError(f"{ctx}: needs 'point' or 'near_arm' + 'offset'")
    elif kind == "reach_circle":
        out["circle"] = _three_points(node.get("circle"), f"{ctx}.circle")
        out["relative_weight"] = _number(node.get("relative_weight", 1.0), f"{ctx}.relative_weight", positive=True)
    elif kind == "reach_plane":
        out["plane"] = _three_points(node.get("plane"), f"{ctx}.plane")
        form = node.get("formulation", "cooperative")
        if form not in ("cooperative", "stacked"):
            raise ScenarioError(f"{ctx}.formulation: expected 'cooperative' or 'stacked'")
        out["formulation"] = form
    elif kind in ("align_axis", "balance_plate"):
        out["line1"] = _line(node.get("line1"), f"{ctx}.line1")
        out["line2"] = _line(node.get("line2"), f"{ctx}.line2")
        out["distance"] = _number(node.get("distance"), f"{ctx}.distance", positive=True)
        out["posture_weight"] = _number(node.get("posture_weight", 1.0), f"{ctx}.posture_weight", positive=True)
        if kind == "balance_plate":
            out["axis"] = _line(node.get("axis"), f"{ctx}.axis")
    return out


def parse_scenario(config: dict, base_dir: Path | None = None, source: Path | None = None) -> Scenario:
    """Validate a scenario config and build the dual-arm system it describes.

    Raises:
        ScenarioError: with a message naming the offending field.
    """
    if not isinstance(config, dict):
        raise ScenarioError("scenario must be a JSON object")
    unknown = set(config) - _TOP_KEYS
    if unknown:
        raise ScenarioError(f"unknown top-level fields: {sorted(unknown)}")
    kind = config.get("kind")
    if kind not in KINDS:
        raise ScenarioError(f"kind: expected one of {KINDS}, got {kind!r}")
    name = config.get("name", kind)
    if not isinstance(name, str) or not name:
        raise ScenarioError("name: expected a non-empty string")

    robots = config.get("robots")
    if not isinstance(robots, dict) or set(robots) != {"arm1", "arm2"}:
        raise ScenarioError("robots: expected an object with 'arm1' and 'arm2'")
    arm1, norm1 = _load_arm(robots["arm1"], "robots.arm1", base_dir)
    arm2, norm2 = _load_arm(robots["arm2"], "robots.arm2", base_dir)
    try:
        system = DualArmSystem(arm1, arm2)
    except ValueError as exc:
        raise ScenarioError(f"robots: {exc}") from exc

    if "q0" in config:
        q0 = _vec(config["q0"], system.dof, "q0")
    else:
        if arm1.dof != 7 or arm2.dof != 7:
            raise ScenarioError("q0: required unless both arms have 7 joints")
        q0 = np.concatenate([HOME_POSE, HOME_POSE])

    target = _parse_target(kind, config.get("target"), "target")

    solver = config.get("solver", {})
    if not isinstance(solver, dict):
        raise ScenarioError("solver: expected an object")
    try:
        GaussNewtonOptions.from_mapping(solver)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"solver: {exc}") from exc

    mpc: dict = {}
    weights: dict = {}
    perturbations: list[PerturbationSpec] = []
    if kind == "balance_plate":
        node = config.get("mpc", {})
        if not isinstance(node, dict):
            raise ScenarioError("mpc: expected an object")
        unknown = set(node) - set(MPC_DEFAULTS)
        if unknown:
            raise ScenarioError(f"mpc: unknown options {sorted(unknown)}")
        mpc = {**MPC_DEFAULTS, **node}
        mpc["horizon"] = _integer(mpc["horizon"], "mpc.horizon", 1)
        mpc["dt"] = _number(mpc["dt"], "mpc.dt", positive=True)
        mpc["plant_dt"] = _number(mpc["plant_dt"], "mpc.plant_dt", positive=True)
        mpc["replan_every"] = _integer(mpc["replan_every"], "mpc.replan_every", 1)
        mpc["steps"] = _integer(mpc["steps"], "mpc.steps", 0)
        mpc["max_iter"] = _integer(mpc["max_iter"], "mpc.max_iter", 1)
        mpc["control_weight"] = _number(mpc["control_weight"], "mpc.control_weight", positive=True)
        for key in ("velocity_weight", "grad_tol", "cost_tol"):
            mpc[key] = _number(mpc[key], f"mpc.{key}", minimum=0.0)
        wnode = config.get("weights", {})
        if not isinstance(wnode, dict) or set(wnode) - {"align", "axis", "dist"}:
            raise ScenarioError("weights: expected an object with align/axis/dist")
        weights = {k: _number(wnode.get(k, 1.0), f"weights.{k}", positive=True) for k in ("align", "axis", "dist")}
        pnode = config.get("perturbations", [])
        if not isinstance(pnode, list):
            raise ScenarioError("perturbations: expected a list")
        for i, p in enumerate(pnode):
            ctx = f"perturbations[{i}]"
            if not isinstance(p, dict):
                raise ScenarioError(f"{ctx}: expected an object")
            tick = _integer(p.get("tick"), f"{ctx}.tick", 0)
            joints = p.get("joints")
            if not isinstance(joints, dict) or not joints:
                raise ScenarioError(f"{ctx}.joints: expected a mapping 'arm1:3' -> radians")
            offsets = {}
            for key, val in joints.items():
                offsets[_joint_index(key, system, f"{ctx}.joints")] = _number(val, f"{ctx}.joints.{key}")
            perturbations.append(PerturbationSpec(tick, offsets))
    else:
        for key in ("mpc", "perturbations", "weights"):
            if key in config:
                raise ScenarioError(f"{key}: only valid for balance_plate scenarios")

    acceptance = config.get("acceptance", {})
    if not isinstance(acceptance, dict):
        raise ScenarioError("acceptance: expected an object")
    for key, val in acceptance.items():
        if not isinstance(val, (bool, int, float)):
            raise ScenarioError(f"acceptance.{key}: expected a number or boolean")
    seed = _integer(config.get("seed", 0), "seed", 0)
    jitter = _number(config.get("initial_jitter", 0.0), "initial_jitter", minimum=0.0)

    normalized = _canon({
        "name": name,
        "kind": kind,
        "robots": {"arm1": norm1, "arm2": norm2},
        "q0": q0,
        "target": {k: (v.__dict__ if isinstance(v, LineSpec) else v) for k, v in target.items()},
        "solver": {**GaussNewtonOptions().__dict__, **solver},
        "mpc": mpc,
        "weights": weights,
        "perturbations": [{"tick": p.tick, "joints": {str(k): v for k, v in sorted(p.joints.items())}} for p in perturbations],
        "acceptance": acceptance,
        "seed": seed,
        "initial_jitter": jitter,
    })
    return Scenario(
        name, kind, system, q0, target, dict(solver), mpc, weights, tuple(perturbations),
        dict(acceptance), seed, jitter, normalized, source,
    )


def _joint_index(key: str, system: DualArmSystem, ctx: str) -> int:
    """``"arm1:2"`` (one-based joint number) to a zero-based index into ``q``."""
    try:
        arm, num = str(key).split(":")
        num = int(num)
    except ValueError:
        raise ScenarioError(f"{ctx}: key {key!r} must look like 'arm1:2'") from None
    if arm == "arm1" and 1 <= num <= system.arm1.dof:
        return num - 1
    if arm == "arm2" and 1 <= num <= system.arm2.dof:
        return system.arm1.dof + num - 1
    raise ScenarioError(f"{ctx}: no joint {key!r}")


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file.

    Raises:
        ScenarioError: on invalid JSON or content.
        OSError: if the file cannot be read.
    """
    path = Path(path)
    text = path.read_text()
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return parse_scenario(config, base_dir=path.parent, source=path)


def bundled_scenarios() -> list[Path]:
    from importlib import resources

    root = resources.files("cgacdts") / "data" / "scenarios"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".json"))


def bundled_scenario(name: str) -> Path:
    for p in bundled_scenarios():
        if p.stem == name:
            return p
    raise ScenarioError(f"no bundled scenario named '{name}'")
