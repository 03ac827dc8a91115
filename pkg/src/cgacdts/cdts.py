"""Cooperative dual-task space: relative/absolute motors, cooperative pointpair, residuals.

Jacobians are stored column-wise as ``(N1 + N2, 32)`` arrays: one multivector
per joint, arm 1 first.  :class:`MultivectorJacobian` converts to the
real-matrix form used by the solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .algebra import (
    E0,
    EI,
    GRADES,
    NUM_BLADES,
    VECTOR_IDX,
    BLADE_INDEX,
    commutator,
    gp,
    ip,
    op,
    rev,
    sandwich_raw,
)
from .geometry import extract_raw, normalize_line
from .kinematics import DualArmSystem
from .motor import (
    BIVECTOR_IDX,
    MOTOR_IDX,
    bivector_to_full,
    exp_bivector,
    exp_jacobian,
    from_compact,
    log_jacobian,
    log_motor,
    to_compact,
    translator,
)

FRAMES = ("relative", "absolute", "arm1", "arm2")


class MultivectorJacobian:
    """Row of multivector partial derivatives, one per joint."""

    def __init__(self, columns: np.ndarray):
        cols = np.array(columns, dtype=float)
        if cols.ndim != 2 or cols.shape[1] != NUM_BLADES:
            raise ValueError(f"expected (n, {NUM_BLADES}) columns, got {cols.shape}")
        cols.setflags(write=False)
        self.columns = cols

    @property
    def ncols(self) -> int:
        return self.columns.shape[0]

    def expand(self, rows=None) -> np.ndarray:
        """Real matrix ``(len(rows), n)``; ``rows`` defaults to all 32 blades."""
        if rows is None:
            return self.columns.T.copy()
        return self.columns[:, rows].T.copy()

    def expand_motor(self) -> np.ndarray:
        """8 x n matrix for motor-valued Jacobians."""
        return self.expand(MOTOR_IDX)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, rows=None) -> "MultivectorJacobian":
        matrix = np.asarray(matrix, dtype=float)
        cols = np.zeros((matrix.shape[1], NUM_BLADES))
        if rows is None:
            cols[:] = matrix.T
        else:
            cols[:, rows] = matrix.T
        return cls(cols)


def _point_and_derivative(m: np.ndarray, jac: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = sandwich_raw(m, E0)
    dp = gp(gp(jac, E0), rev(m)) + gp(gp(m, E0), rev(jac))
    return p, dp


def _transform_derivative(m: np.ndarray, jac: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Columns of ``d(M X ~M)``."""
    return gp(gp(jac, x), rev(m)) + gp(gp(m, x), rev(jac))


class CdtsState:
    """Joint configuration of a dual-arm system with cached kinematic quantities.

    Instances are immutable; use :meth:`with_q` for a new configuration.
    """

    def __init__(self, system: DualArmSystem, q1, q2):
        self.system = system
        self.q1 = np.array(q1, dtype=float)
        self.q2 = np.array(q2, dtype=float)
        self.q1.setflags(write=False)
        self.q2.setflags(write=False)
        self.m1, j1 = system.arm1.fk_and_jacobian(self.q1)
        self.m2, j2 = system.arm2.fk_and_jacobian(self.q2)
        self.n1, self.n2 = len(self.q1), len(self.q2)
        # per-arm Jacobians padded to the full joint space
        self.j1 = np.zeros((self.n1 + self.n2, NUM_BLADES))
        self.j1[: self.n1] = j1
        self.j2 = np.zeros((self.n1 + self.n2, NUM_BLADES))
        self.j2[self.n1 :] = j2

    @classmethod
    def from_q(cls, system: DualArmSystem, q) -> "CdtsState":
        q1, q2 = system.split(q)
        return cls(system, q1, q2)

    def with_q(self, q) -> "CdtsState":
        return CdtsState.from_q(self.system, q)

    @property
    def q(self) -> np.ndarray:
        return np.concatenate([self.q1, self.q2])

    @property
    def dof(self) -> int:
        return self.n1 + self.n2

    # -- points -------------------------------------------------------------

    @cached_property
    def _p1(self):
        return _point_and_derivative(self.m1, self.j1)

    @cached_property
    def _p2(self):
        return _point_and_derivative(self.m2, self.j2)

    @property
    def point1(self) -> np.ndarray:
        return self._p1[0]

    @property
    def point2(self) -> np.ndarray:
        return self._p2[0]

    @property
    def ee_positions(self) -> tuple[np.ndarray, np.ndarray]:
        return extract_raw(self.point1), extract_raw(self.point2)

    # -- relative / absolute -------------------------------------------------

    @cached_property
    def relative_motor(self) -> np.ndarray:
        return gp(rev(self.m2), self.m1)

    @cached_property
    def relative_jacobian(self) -> np.ndarray:
        return gp(rev(self.m2), self.j1) + gp(rev(self.j2), self.m1)

    @cached_property
    def _half(self):
        mr8 = to_compact(self.relative_motor)
        b_half = 0.5 * log_motor(mr8)
        m_half = from_compact(exp_bivector(b_half))
        return mr8, b_half, m_half

    @cached_property
    def absolute_motor(self) -> np.ndarray:
        return gp(self.m2, self._half[2])

    @cached_property
    def absolute_jacobian(self) -> np.ndarray:
        mr8, b_half, m_half = self._half
        jr8 = to_compact(self.relative_jacobian).T  # 8 x n
        jh8 = exp_jacobian(b_half) @ (0.5 * log_jacobian(mr8)) @ jr8
        jh = from_compact(jh8.T)
        return gp(self.m2, jh) + gp(self.j2, m_half)

    def frame_motor(self, frame: str) -> tuple[np.ndarray, np.ndarray]:
        """Motor and Jacobian columns for ``relative``, ``absolute``, ``arm1`` or ``arm2``."""
        if frame == "relative":
            return self.relative_motor, self.relative_jacobian
        if frame == "absolute":
            return self.absolute_motor, self.absolute_jacobian
        if frame == "arm1":
            return self.m1, self.j1
        if frame == "arm2":
            return self.m2, self.j2
        raise ValueError(f"unknown frame {frame!r}; expected one of {FRAMES}")

    # -- cooperative pointpair ----------------------------------------------

    @cached_property
    def cooperative_pointpair(self) -> np.ndarray:
        return op(self.point1, self.point2)

    @cached_property
    def cooperative_pointpair_jacobian(self) -> np.ndarray:
        p1, dp1 = self._p1
        p2, dp2 = self._p2
        return op(dp1, p2) + op(p1, dp2)


def relative_motor(s: CdtsState) -> np.ndarray:
    return s.relative_motor


def relative_jacobian(s: CdtsState) -> MultivectorJacobian:
    return MultivectorJacobian(s.relative_jacobian)


def absolute_motor(s: CdtsState) -> np.ndarray:
    return s.absolute_motor


def absolute_jacobian(s: CdtsState) -> MultivectorJacobian:
    return MultivectorJacobian(s.absolute_jacobian)


def cooperative_pointpair(s: CdtsState) -> np.ndarray:
    return s.cooperative_pointpair


def cooperative_pointpair_jacobian(s: CdtsState) -> MultivectorJacobian:
    return MultivectorJacobian(s.cooperative_pointpair_jacobian)


# -- residuals ---------------------------------------------------------------


def _grades_of(x: np.ndarray) -> set[int]:
    return {int(g) for g in GRADES[np.abs(x) > 0]}


def _mask(grades) -> np.ndarray:
    return np.isin(GRADES, sorted(grades))


@dataclass
class Residual:
    """Multivector residual with its joint Jacobian.

    ``mask`` selects the blades that can be nonzero for this residual type;
    it determines the rows used when the residual is expanded to real form.
    """

    value: np.ndarray
    jacobian: np.ndarray
    mask: np.ndarray = field(default_factory=lambda: np.ones(NUM_BLADES, dtype=bool))

    def vector(self) -> np.ndarray:
        return self.value[self.mask]

    def matrix(self) -> np.ndarray:
        return self.jacobian[:, self.mask].T

    def norm(self) -> float:
        return float(np.linalg.norm(self.value[self.mask]))

    @property
    def multivector_jacobian(self) -> MultivectorJacobian:
        return MultivectorJacobian(self.jacobian)


def residual_target_motor(s: CdtsState, target, frame: str = "relative") -> Residual:
    """``log(~M_target M)`` for the relative or absolute motor."""
    target = np.asarray(target, dtype=float)
    if target.shape == (8,):
        target = from_compact(target)
    m, jac = s.frame_motor(frame)
    d = gp(rev(target), m)
    d8 = to_compact(d)
    jd8 = to_compact(gp(rev(target), jac)).T
    value = bivector_to_full(log_motor(d8))
    jcols = bivector_to_full((log_jacobian(d8) @ jd8).T)
    return Residual(value, jcols, _mask({2}))


def residual_reach_primitive(s: CdtsState, target, x, frame: str = "relative") -> Residual:
    """``X_d ^ (M X ~M)``: zero when the moved primitive is incident with ``X_d``."""
    target = np.asarray(target, dtype=float)
    x = np.asarray(x, dtype=float)
    m, jac = s.frame_motor(frame)
    y = sandwich_raw(m, x)
    dy = _transform_derivative(m, jac, x)
    grades = {a + b for a in _grades_of(target) for b in _grades_of(x) if a + b <= 5}
    return Residual(op(target, y), op(target, dy), _mask(grades))


def residual_pointpair_point(s: CdtsState, target_point) -> Residual:
    """``P_target ^ P_cdts``: zero when the target coincides with either end-effector."""
    p = np.asarray(target_point, dtype=float)
    return Residual(
        op(p, s.cooperative_pointpair),
        op(p, s.cooperative_pointpair_jacobian),
        _mask({3}),
    )


def residual_containment(s: CdtsState, target) -> Residual:
    """``X_d x P_cdts``: zero when both end-effector points lie on ``X_d``."""
    target = np.asarray(target, dtype=float)
    return Residual(
        commutator(target, s.cooperative_pointpair),
        commutator(target, s.cooperative_pointpair_jacobian),
        _mask(_grades_of(target)),
    )


def residual_distance(s: CdtsState, d: float) -> Residual:
    """``-2 P1 . P2 - d^2``, i.e. squared end-effector distance minus ``d^2``."""
    if d < 0:
        raise ValueError("distance must be non-negative")
    p1, dp1 = s._p1
    p2, dp2 = s._p2
    value = -2.0 * ip(p1, p2)
    value[0] -= d * d
    jac = -2.0 * (ip(dp1, p2) + ip(p1, dp2))
    return Residual(value, jac, _mask({0}))


def residual_line_alignment(s: CdtsState, line1, line2) -> Residual:
    """``(M1 L1 ~M1) x (M2 L2 ~M2)``: zero when the moved lines coincide."""
    l1 = normalize_line(line1)
    l2 = normalize_line(line2)
    y1 = sandwich_raw(s.m1, l1)
    y2 = sandwich_raw(s.m2, l2)
    dy1 = _transform_derivative(s.m1, s.j1, l1)
    dy2 = _transform_derivative(s.m2, s.j2, l2)
    return Residual(
        commutator(y1, y2),
        commutator(dy1, y2) + commutator(y1, dy2),
        _mask({0, 2, 4}),
    )


def absolute_translator(s: CdtsState) -> tuple[np.ndarray, np.ndarray]:
    """Translator ``T_a`` to the absolute position and its Jacobian columns.

    ``M_a = T_a R_a`` where ``R_a`` fixes the origin.
    """
    ma, ja = s.absolute_motor, s.absolute_jacobian
    p = sandwich_raw(ma, E0)
    dp = _transform_derivative(ma, ja, E0)
    w = p[BLADE_INDEX["e0"]]
    dw = dp[:, BLADE_INDEX["e0"]]
    t = p[VECTOR_IDX] / w
    dt = dp[:, VECTOR_IDX] / w - np.outer(dw, p[VECTOR_IDX]) / (w * w)
    ta = from_compact(translator(t))
    dta = np.zeros((len(dt), NUM_BLADES))
    dta[:, MOTOR_IDX[4:7]] = -0.5 * dt
    return ta, dta


def residual_absolute_axis(s: CdtsState, line) -> Residual:
    """``(T_a L ~T_a) x (M_a L ~M_a)``: zero when the absolute rotation keeps ``L``'s direction."""
    l = normalize_line(line)
    ta, dta = absolute_translator(s)
    ma, ja = s.absolute_motor, s.absolute_jacobian
    y1 = sandwich_raw(ta, l)
    y2 = sandwich_raw(ma, l)
    dy1 = _transform_derivative(ta, dta, l)
    dy2 = _transform_derivative(ma, ja, l)
    return Residual(
        commutator(y1, y2),
        commutator(dy1, y2) + commutator(y1, dy2),
        _mask({0, 2, 4}),
    )


def stacked_point_residuals(s: CdtsState, target) -> list[Residual]:
    """Per-arm incidence residuals ``X_d ^ P_k`` (the non-cooperative formulation)."""
    return [
        residual_reach_primitive(s, target, E0, "arm1"),
        residual_reach_primitive(s, target, E0, "arm2"),
    ]


def pointpair_magnitude(s: CdtsState) -> float:
    return float(np.linalg.norm(s.cooperative_pointpair))

