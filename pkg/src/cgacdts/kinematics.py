"""Serial-chain kinematics with motors.

Each revolute joint is a line (rotation axis) in the frame of the previous
link plus a fixed offset motor to the next frame::

    M_i(q) = exp(-q/2 L_i) O_i,    M(q) = M_base M_1(q_1) ... M_N(q_N)

A unit axis line squares to -1, so ``exp(-q/2 L) = cos(q/2) - sin(q/2) L`` and
``d/dq exp(-q/2 L) = -1/2 L exp(-q/2 L)``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .algebra import gp, rev
from .motor import (
    IDENTITY8,
    UNIT_TOL,
    AXIS_MAP,
    bivector_from_full,
    bivector_to_full,
    exp_bivector,
    from_compact,
    motor_from_pose,
    to_compact,
    translator,
    unit_error,
)

log = logging.getLogger(__name__)


class RobotDescriptionError(ValueError):
    """Malformed robot description."""


def axis_bivector(axis, point) -> np.ndarray:
    """Compact unit rotation bivector for the line through ``point`` along ``axis``."""
    a = np.asarray(axis, dtype=float)
    b = np.zeros(6)
    b[:3] = AXIS_MAP @ a
    t = from_compact(translator(point))
    return bivector_from_full(gp(gp(t, bivector_to_full(b)), rev(t)))


@dataclass(frozen=True)
class JointDescription:
    """Revolute joint: axis bivector (compact 6), offset motor (compact 8), limits in radians."""

    axis_bivector: np.ndarray
    offset_motor: np.ndarray
    limits: tuple[float, float] = (-np.inf, np.inf)

    def __post_init__(self):
        ax = np.asarray(self.axis_bivector, dtype=float)
        off = np.asarray(self.offset_motor, dtype=float)
        if ax.shape != (6,) or off.shape != (8,):
            raise ValueError("axis_bivector needs 6 and offset_motor 8 coefficients")
        if abs(np.linalg.norm(ax[:3]) - 1.0) > 1e-9:
            raise ValueError("joint axis must have unit rotational magnitude")
        if unit_error(from_compact(off)) > UNIT_TOL:
            raise ValueError("joint offset is not a unit motor")
        lo, hi = self.limits
        if not lo <= hi:
            raise ValueError(f"joint limits min {lo} > max {hi}")
        ax.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "axis_bivector", ax)
        object.__setattr__(self, "offset_motor", off)
        object.__setattr__(self, "limits", (float(lo), float(hi)))


def joint_motor(joint: JointDescription, q: float) -> np.ndarray:
    """Compact motor ``exp(-q/2 L) O`` of a single joint."""
    rot = exp_bivector(-0.5 * q * joint.axis_bivector)
    return to_compact(gp(from_compact(rot), from_compact(joint.offset_motor)))


@dataclass(frozen=True)
class KinematicChain:
    joints: tuple[JointDescription, ...]
    base_motor: np.ndarray = IDENTITY8
    name: str = "chain"

    def __post_init__(self):
        if len(self.joints) < 1:
            raise ValueError("a chain needs at least one joint")
        base = np.asarray(self.base_motor, dtype=float)
        if unit_error(from_compact(base)) > UNIT_TOL:
            raise ValueError("base motor is not a unit motor")
        base.setflags(write=False)
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "base_motor", base)
        axes = np.array([bivector_to_full(j.axis_bivector) for j in self.joints])
        offsets = np.array([from_compact(j.offset_motor) for j in self.joints])
        object.__setattr__(self, "_axes", axes)
        object.__setattr__(self, "_offsets", offsets)

    @property
    def dof(self) -> int:
        return len(self.joints)

    @property
    def limits(self) -> np.ndarray:
        return np.array([j.limits for j in self.joints])

    def with_base(self, base_motor) -> "KinematicChain":
        return KinematicChain(self.joints, np.asarray(base_motor, dtype=float), self.name)

    def _check(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise ValueError(f"{self.name}: expected {self.dof} joint values, got shape {q.shape}")
        return q

    def within_limits(self, q) -> bool:
        q = self._check(q)
        lim = self.limits
        return bool(np.all(q >= lim[:, 0]) and np.all(q <= lim[:, 1]))

    def joint_motors(self, q) -> np.ndarray:
        """Per-joint motors as an ``(N, 32)`` array."""
        q = self._check(q)
        rots = -np.sin(0.5 * q)[:, None] * self._axes
        rots[:, 0] = np.cos(0.5 * q)
        return gp(rots, self._offsets)

    def forward_kinematics(self, q) -> np.ndarray:
        """End-effector motor as a 32-coefficient array."""
        m = from_compact(self.base_motor)
        for mi in self.joint_motors(q):
            m = gp(m, mi)
        return m

    def fk_and_jacobian(self, q) -> tuple[np.ndarray, np.ndarray]:
        """End-effector motor ``(32,)`` and its joint derivatives ``(N, 32)``."""
        mots = self.joint_motors(q)
        n = self.dof
        prefix = np.empty((n + 1, 32))
        prefix[0] = from_compact(self.base_motor)
        for i in range(n):
            prefix[i + 1] = gp(prefix[i], mots[i])
        suffix = np.empty((n + 1, 32))
        suffix[n] = 0.0
        suffix[n, 0] = 1.0
        for i in range(n - 1, -1, -1):
            suffix[i] = gp(mots[i], suffix[i + 1])
        jac = gp(gp(prefix[:n], -0.5 * self._axes), suffix[:n])
        return prefix[n], jac


def forward_kinematics(chain: KinematicChain, q) -> np.ndarray:
    return chain.forward_kinematics(q)


def analytic_jacobian(chain: KinematicChain, q) -> np.ndarray:
    """Columns ``dM/dq_i`` stacked as an ``(N, 32)`` array."""
    return chain.fk_and_jacobian(q)[1]


@dataclass(frozen=True)
class DualArmSystem:
    arm1: KinematicChain
    arm2: KinematicChain

    def __post_init__(self):
        if np.allclose(self.arm1.base_motor, self.arm2.base_motor, atol=1e-12):
            raise ValueError("the two arms share an identical base frame")

    @property
    def dof(self) -> int:
        return self.arm1.dof + self.arm2.dof

    def split(self, q) -> tuple[np.ndarray, np.ndarray]:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise ValueError(f"expected {self.dof} joint values, got shape {q.shape}")
        return q[: self.arm1.dof], q[self.arm1.dof :]

    @property
    def limits(self) -> np.ndarray:
        return np.vstack([self.arm1.limits, self.arm2.limits])


def _vec(node, key, n, ctx):
    try:
        v = np.asarray(node[key], dtype=float)
    except KeyError:
        raise RobotDescriptionError(f"{ctx}: missing field '{key}'") from None
    except (TypeError, ValueError):
        raise RobotDescriptionError(f"{ctx}: field '{key}' must be a list of numbers") from None
    if v.shape != (n,) or not np.all(np.isfinite(v)):
        raise RobotDescriptionError(f"{ctx}: field '{key}' must have {n} finite numbers")
    return v


def _pose(node, ctx) -> np.ndarray:
    t = _vec(node, "translation", 3, ctx)
    quat = _vec(node, "quaternion", 4, ctx)
    if abs(np.linalg.norm(quat) - 1.0) > 1e-6:
        raise RobotDescriptionError(f"{ctx}: quaternion (w, x, y, z) must have unit norm")
    return motor_from_pose(t, quat)


def parse_pose(node, ctx: str = "pose") -> np.ndarray:
    """Compact motor from a ``{translation[3], quaternion[4] (w, x, y, z)}`` mapping."""
    if not isinstance(node, dict):
        raise RobotDescriptionError(f"{ctx}: expected an object")
    return _pose(node, ctx)


def load_robot(description: dict) -> KinematicChain:
    """Build a chain from a JSON-compatible robot description.

    Expected fields: ``name``, ``base_pose {translation, quaternion}`` and
    ``joints[] {axis, point, offset_translation, offset_quaternion, limits}``.
    Quaternions are ``(w, x, y, z)``; lengths in meters, angles in radians.

    Raises:
        RobotDescriptionError: on any malformed or inconsistent field.
    """
    if not isinstance(description, dict):
        raise RobotDescriptionError("robot description must be an object")
    name = description.get("name", "robot")
    if not isinstance(name, str):
        raise RobotDescriptionError("'name' must be a string")
    base = IDENTITY8
    if "base_pose" in description:
        base = parse_pose(description["base_pose"], f"{name}.base_pose")
    joints_node = description.get("joints")
    if not isinstance(joints_node, list) or not joints_node:
        raise RobotDescriptionError(f"{name}: 'joints' must be a non-empty list")
    joints = []
    for i, node in enumerate(joints_node):
        ctx = f"{name}.joints[{i}]"
        if not isinstance(node, dict):
            raise RobotDescriptionError(f"{ctx}: expected an object")
        axis = _vec(node, "axis", 3, ctx)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise RobotDescriptionError(f"{ctx}: axis must be a unit vector (norm {np.linalg.norm(axis):.6g})")
        point = _vec(node, "point", 3, ctx)
        offset = _pose(
            {"translation": node.get("offset_translation", [0.0, 0.0, 0.0]),
             "quaternion": node.get("offset_quaternion", [1.0, 0.0, 0.0, 0.0])},
            ctx,
        )
        limits = _vec(node, "limits", 2, ctx) if "limits" in node else np.array([-np.inf, np.inf])
        if limits[0] > limits[1]:
            raise RobotDescriptionError(f"{ctx}: limits min {limits[0]} > max {limits[1]}")
        joints.append(JointDescription(axis_bivector(axis, point), offset, tuple(limits)))
    return KinematicChain(tuple(joints), base, name)


def load_robot_file(path) -> KinematicChain:
    path = Path(path)
    try:
        with path.open() as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise RobotDescriptionError(f"{path}: invalid JSON ({exc})") from exc
    return load_robot(data)


def bundled_robot(name: str = "franka") -> dict:
    """Raw description dict of a robot shipped with the package."""
    ref = resources.files("cgacdts") / "data" / "robots" / f"{name}.json"
    if not ref.is_file():
        raise RobotDescriptionError(f"no bundled robot named '{name}'")
    return json.loads(ref.read_text())


def franka() -> KinematicChain:
    return load_robot(bundled_robot("franka"))
