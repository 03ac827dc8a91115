"""Receding-horizon control of a simulated double-integrator plant."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ilqr import IlqrOptions, OcProblem, ilqr, step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Perturbation:
    """State offset added to the plant just before plant tick ``tick``."""

    tick: int
    dq: np.ndarray  # joint position offsets, radians
    ddq: np.ndarray | None = None  # joint velocity offsets, rad/s

    def offset(self, nq: int) -> np.ndarray:
        out = np.zeros(2 * nq)
        out[:nq] = self.dq
        if self.ddq is not None:
            out[nq:] = self.ddq
        return out


@dataclass
class TickRecord:
    tick: int
    time: float
    cost: float
    residuals: dict[str, float]
    x: np.ndarray
    u: np.ndarray
    replanned: bool
    failed: bool


@dataclass
class MpcLog:
    records: list[TickRecord] = field(default_factory=list)
    failures: int = 0

    def column(self, name: str) -> np.ndarray:
        return np.array([r.residuals[name] for r in self.records])

    @property
    def states(self) -> np.ndarray:
        return np.array([r.x for r in self.records])

    @property
    def controls(self) -> np.ndarray:
        return np.array([r.u for r in self.records])


def mpc_loop(
    ocp: OcProblem,
    x0,
    schedule: Sequence[Perturbation] = (),
    steps: int = 100,
    replan_every: int = 10,
    plant_dt: float | None = None,
    monitor: Callable[[np.ndarray], dict[str, float]] | None = None,
    opts: IlqrOptions | None = None,
) -> MpcLog:
    """Run ``steps`` plant ticks, re-solving the optimal control problem every ``replan_every``.

    Between replans the plan's controls are applied piecewise-constant on the
    model step ``ocp.dt``.  The plant integrates with ``plant_dt``, which
    defaults to ``ocp.dt / replan_every``.  Each record holds the state after
    the tick, the control used during it and the ``monitor`` values.
    """
    if replan_every < 1:
        raise ValueError("replan_every must be >= 1")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    plant_dt = ocp.dt / replan_every if plant_dt is None else float(plant_dt)
    if not plant_dt > 0:
        raise ValueError("plant_dt must be positive")
    applied_steps = max(1, int(round(replan_every * plant_dt / ocp.dt)))
    by_tick: dict[int, list[Perturbation]] = {}
    for p in schedule:
        by_tick.setdefault(int(p.tick), []).append(p)

    x = np.array(x0, dtype=float)
    u_plan = np.zeros((ocp.horizon, ocp.nq))
    u_hold = np.zeros(ocp.nq)
    plan_cost = np.nan
    plan_tick = 0
    out = MpcLog()
    ok_plan = None
    for tick in range(steps):
        for p in by_tick.get(tick, ()):
            x = x + p.offset(ocp.nq)
        replanned = failed = False
        if tick % replan_every == 0:
            replanned = True
            warm = u_plan
            if ok_plan is not None:
                warm = np.vstack([u_plan[applied_steps:], np.zeros((min(applied_steps, ocp.horizon), ocp.nq))])
            try:
                traj, rep = ilqr(ocp, x, warm, opts)
                if not np.all(np.isfinite(traj.controls)):
                    raise FloatingPointError("non-finite controls")
                u_plan, plan_cost, ok_plan = traj.controls, traj.cost, True
            except (ArithmeticError, ValueError) as exc:
                failed = True
                out.failures += 1
                log.warning("iLQR failed at tick %d (%s); holding previous control", tick, exc)
                u_plan = np.tile(u_hold, (ocp.horizon, 1))
            plan_tick = tick
        k = min(int((tick - plan_tick) * plant_dt / ocp.dt + 1e-9), ocp.horizon - 1)
        u = u_plan[k]
        u_hold = u
        x = step(x, u, plant_dt)
        res = monitor(x) if monitor is not None else {}
        out.records.append(TickRecord(tick, (tick + 1) * plant_dt, plan_cost, res, x.copy(), u.copy(), replanned, failed))
    return out
