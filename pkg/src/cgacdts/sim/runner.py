"""Turn scenarios into solver problems, run them and check their acceptance thresholds."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..algebra import E0, sandwich_raw
from ..cdts import (
    CdtsState,
    residual_absolute_axis,
    residual_containment,
    residual_distance,
    residual_line_alignment,
    residual_pointpair_point,
    residual_reach_primitive,
    residual_target_motor,
)
from ..geometry import (
    circle,
    circle_from_points,
    distance_to_circle,
    embed_point,
    line,
    line_direction_moment,
    plane,
)
from ..solvers import (
    GaussNewtonReport,
    IkProblem,
    IlqrOptions,
    MpcLog,
    OcProblem,
    Perturbation,
    Term,
    cdts_state_residual,
    gauss_newton,
    mpc_loop,
    posture_term,
    projected_gradient,
)
from .runlog import RunLog, ik_log, mpc_log
from .scenario import Scenario

log = logging.getLogger(__name__)

DEFAULT_ACCEPTANCE = {
    "reach_point": {"residual_max": 1e-8, "nearer_arm_moves_more": True},
    "reach_circle": {"constraint_max": 1e-6, "circle_distance_max": 1e-4, "projected_gradient_max": 1e-5},
    "reach_plane": {"incidence_max": 1e-6},
    "align_axis": {"direction_cross_max": 1e-6, "moment_gap_max": 1e-6, "distance_dev_max": 1e-6},
    "balance_plate": {
        "equilibrium_residual_max": 1e-6,
        "equilibrium_control_max": 1e-8,
        "recovery_threshold": 1e-3,
        "recovery_time_max": 1.0,
        "distance_dev_max": 5e-3,
    },
}


@dataclass
class Check:
    value: float
    threshold: float
    passed: bool


@dataclass
class RunResult:
    scenario: Scenario
    log: RunLog
    status: str
    q: np.ndarray
    checks: dict[str, Check] = field(default_factory=dict)
    report: GaussNewtonReport | None = None
    mpc: MpcLog | None = None

    @property
    def passed(self) -> bool:
        return self.status == "converged" and all(c.passed for c in self.checks.values())


def _max_check(value: float, threshold: float) -> Check:
    return Check(float(value), float(threshold), bool(value < threshold))


def initial_configuration(sc: Scenario) -> np.ndarray:
    q0 = sc.q0.copy()
    if sc.initial_jitter > 0:
        rng = np.random.default_rng(sc.seed)
        q0 = q0 + rng.normal(scale=sc.initial_jitter, size=q0.shape)
    return q0


def _metadata(sc: Scenario, **extra) -> dict:
    return {"scenario": sc.name, "kind": sc.kind, "hash": sc.hash, "seed": sc.seed, **extra}


# -- problem builders ----------------------------------------------------------


def reach_point_target(sc: Scenario, q0) -> np.ndarray:
    t = sc.target
    if "point" in t:
        return t["point"]
    x1, x2 = CdtsState.from_q(sc.system, q0).ee_positions
    return (x1 if t["near_arm"] == "arm1" else x2) + t["offset"]


def build_ik_problem(sc: Scenario, q0, formulation: str | None = None) -> IkProblem:
    """Gauss-Newton problem for the IK scenario kinds."""
    t = sc.target
    if sc.kind == "reach_point":
        p = embed_point(reach_point_target(sc, q0)).coeffs
        terms = (Term("pointpair", lambda s: residual_pointpair_point(s, p)),)
        return IkProblem(sc.system, terms, q0=q0, uses_pointpair=True)
    if sc.kind == "reach_circle":
        c = circle(*t["circle"]).coeffs
        m_rel = CdtsState.from_q(sc.system, q0).relative_motor.copy()
        obj = (Term("relative", lambda s: residual_target_motor(s, m_rel, "relative"), t["relative_weight"]),)
        cons = (Term("circle", lambda s: residual_containment(s, c)),)
        return IkProblem(sc.system, obj, cons, q0=q0, uses_pointpair=True)
    if sc.kind == "reach_plane":
        pl = plane(*t["plane"]).coeffs
        form = formulation or t["formulation"]
        if form == "cooperative":
            terms = (Term("plane", lambda s: residual_containment(s, pl)),)
            return IkProblem(sc.system, terms, q0=q0, uses_pointpair=True)
        terms = (
            Term("plane_arm1", lambda s: residual_reach_primitive(s, pl, E0, "arm1")),
            Term("plane_arm2", lambda s: residual_reach_primitive(s, pl, E0, "arm2")),
        )
        return IkProblem(sc.system, terms, q0=q0)
    if sc.kind in ("align_axis", "balance_plate"):
        return IkProblem(sc.system, (posture_term(q0, t["posture_weight"]),), grasp_terms(sc), q0=q0)
    raise ValueError(f"{sc.kind} is not an IK scenario")


def _line_coeffs(spec) -> np.ndarray:
    return line(spec.point, spec.direction).coeffs


def grasp_terms(sc: Scenario, weights: dict | None = None) -> tuple[Term, ...]:
    """Line alignment, distance and (balance_plate) absolute-axis residual terms."""
    t = sc.target
    w = weights or {"align": 1.0, "axis": 1.0, "dist": 1.0}
    l1, l2 = _line_coeffs(t["line1"]), _line_coeffs(t["line2"])
    d = t["distance"]
    terms = [
        Term("align", lambda s: residual_line_alignment(s, l1, l2), w["align"]),
        Term("dist", lambda s: residual_distance(s, d), w["dist"], kind="distance"),
    ]
    if "axis" in t:
        la = _line_coeffs(t["axis"])
        terms.insert(1, Term("axis", lambda s: residual_absolute_axis(s, la), w["axis"]))
    return tuple(terms)


# -- geometric checks ----------------------------------------------------------


def line_collinearity(sc: Scenario, q) -> tuple[float, float]:
    """Direction cross-product norm and moment mismatch of the two moved grasp lines."""
    s = CdtsState.from_q(sc.system, q)
    d1, m1 = line_direction_moment(sandwich_raw(s.m1, _line_coeffs(sc.target["line1"])))
    d2, m2 = line_direction_moment(sandwich_raw(s.m2, _line_coeffs(sc.target["line2"])))
    sign = 1.0 if d1 @ d2 >= 0 else -1.0
    return float(np.linalg.norm(np.cross(d1, d2))), float(np.linalg.norm(m1 - sign * m2))


def plane_incidence(points3, x) -> float:
    a, b, c = points3
    n = np.cross(b - a, c - a)
    n = n / np.linalg.norm(n)
    return float(abs((np.asarray(x) - a) @ n))


def distance_deviation(sc: Scenario, q) -> float:
    x1, x2 = CdtsState.from_q(sc.system, q).ee_positions
    return float(abs(np.linalg.norm(x1 - x2) - sc.target["distance"]))


def _acceptance(sc: Scenario) -> dict:
    return {**DEFAULT_ACCEPTANCE[sc.kind], **sc.acceptance}


# -- runners -------------------------------------------------------------------


def run_ik(sc: Scenario, max_iter: int | None = None, formulation: str | None = None) -> RunResult:
    q0 = initial_configuration(sc)
    problem = build_ik_problem(sc, q0, formulation)
    q, report = gauss_newton(problem, sc.gauss_newton_options(max_iter))
    meta = _metadata(sc, formulation=formulation or sc.target.get("formulation", "cooperative"))
    result = RunResult(sc, ik_log(report, sc.system, meta), report.status, q, report=report)
    acc = _acceptance(sc)
    s0, s1 = CdtsState.from_q(sc.system, q0), CdtsState.from_q(sc.system, q)
    t = sc.target
    checks = result.checks
    if sc.kind == "reach_point":
        checks["residual"] = _max_check(report.residual_norms["pointpair"], acc["residual_max"])
        if acc.get("nearer_arm_moves_more"):
            target = reach_point_target(sc, q0)
            start, end = s0.ee_positions, s1.ee_positions
            moves = [np.linalg.norm(end[k] - start[k]) for k in range(2)]
            near = int(np.argmin([np.linalg.norm(start[k] - target) for k in range(2)]))
            checks["nearer_arm_moves_more"] = Check(moves[near] - moves[1 - near], 0.0, bool(moves[near] > moves[1 - near]))
    elif sc.kind == "reach_circle":
        center, radius, normal = circle_from_points(*t["circle"])
        dist = max(distance_to_circle(x, center, radius, normal) for x in s1.ee_positions)
        checks["constraint"] = _max_check(report.constraint_norm, acc["constraint_max"])
        checks["circle_distance"] = _max_check(dist, acc["circle_distance_max"])
        checks["projected_gradient"] = _max_check(projected_gradient(problem, q), acc["projected_gradient_max"])
    elif sc.kind == "reach_plane":
        inc = max(plane_incidence(t["plane"], x) for x in s1.ee_positions)
        checks["incidence"] = _max_check(inc, acc["incidence_max"])
    elif sc.kind == "align_axis":
        cross, moment = line_collinearity(sc, q)
        checks["direction_cross"] = _max_check(cross, acc["direction_cross_max"])
        checks["moment_gap"] = _max_check(moment, acc["moment_gap_max"])
        checks["distance_dev"] = _max_check(distance_deviation(sc, q), acc["distance_dev_max"])
    return result


def feasible_start(sc: Scenario, max_iter: int | None = None) -> tuple[np.ndarray, GaussNewtonReport]:
    """Configuration near ``q0`` satisfying the balance-plate constraints."""
    q0 = initial_configuration(sc)
    return gauss_newton(build_ik_problem(sc, q0), sc.gauss_newton_options(max_iter))


def build_ocp(sc: Scenario) -> OcProblem:
    m = sc.mpc
    terms = grasp_terms(sc, sc.weights)
    fn = cdts_state_residual(sc.system, terms, m["velocity_weight"])
    return OcProblem(sc.system.dof, m["horizon"], m["dt"], fn, fn, m["control_weight"])


def plate_monitor(sc: Scenario):
    t = sc.target
    l1, l2, la = _line_coeffs(t["line1"]), _line_coeffs(t["line2"]), _line_coeffs(t["axis"])
    d = t["distance"]
    nq = sc.system.dof

    def monitor(x):
        s = CdtsState.from_q(sc.system, x[:nq])
        x1, x2 = s.ee_positions
        return {
            "align": residual_line_alignment(s, l1, l2).norm(),
            "axis": residual_absolute_axis(s, la).norm(),
            "dist": residual_distance(s, d).norm(),
            "dist_dev": float(abs(np.linalg.norm(x1 - x2) - d)),
        }

    return monitor


def run_mpc(sc: Scenario, max_iter: int | None = None) -> RunResult:
    q_start, start_report = feasible_start(sc)
    nq = sc.system.dof
    m = sc.mpc
    schedule = []
    for p in sc.perturbations:
        dq = np.zeros(nq)
        for idx, val in p.joints.items():
            dq[idx] += val
        schedule.append(Perturbation(p.tick, dq))
    opts = IlqrOptions(
        max_iter=max_iter or m["max_iter"], grad_tol=m["grad_tol"], cost_tol=m["cost_tol"]
    )
    x0 = np.concatenate([q_start, np.zeros(nq)])
    run = mpc_loop(
        build_ocp(sc), x0, schedule, m["steps"], m["replan_every"], m["plant_dt"],
        plate_monitor(sc), opts,
    )
    status = "converged" if start_report.success and run.failures == 0 else "failed"
    if not start_report.success:
        log.warning("balance_plate: initial configuration did not satisfy the constraints")
    result = RunResult(
        sc, mpc_log(run, nq, _metadata(sc)), status,
        run.records[-1].x[:nq].copy() if run.records else q_start,
        report=start_report, mpc=run,
    )
    acc = _acceptance(sc)
    checks = result.checks
    if not run.records:
        return result
    align = run.column("align")
    dev = run.column("dist_dev")
    controls = np.linalg.norm(run.controls, axis=1)
    residual = np.maximum.reduce([align, run.column("axis"), run.column("dist")])
    first = min((p.tick for p in sc.perturbations), default=len(run.records))
    if first > 0:
        checks["equilibrium_residual"] = _max_check(residual[:first].max(), acc["equilibrium_residual_max"])
        checks["equilibrium_control"] = _max_check(controls[:first].max(), acc["equilibrium_control_max"])
    if sc.perturbations:
        last = max(p.tick for p in sc.perturbations)
        above = np.nonzero(align[last:] >= acc["recovery_threshold"])[0]
        dt = m["plant_dt"]
        recovery = 0.0 if above.size == 0 else (above[-1] + 1) * dt
        recovered = above.size == 0 or last + above[-1] + 1 < len(align)
        checks["recovery_time"] = Check(recovery, acc["recovery_time_max"], bool(recovered and recovery <= acc["recovery_time_max"]))
        checks["distance_dev"] = _max_check(dev.max(), acc["distance_dev_max"])
    return result


def run_scenario(sc: Scenario, max_iter: int | None = None) -> RunResult:
    """Solve a scenario and evaluate its acceptance thresholds."""
    if sc.kind == "balance_plate":
        return run_mpc(sc, max_iter)
    return run_ik(sc, max_iter)


@dataclass
class CompareReport:
    cooperative: RunResult
    stacked: RunResult
    difference: float

    @property
    def passed(self) -> bool:
        return self.cooperative.passed and self.stacked.passed


def compare_stacked_vs_cooperative(sc: Scenario, max_iter: int | None = None) -> CompareReport:
    """Solve a plane scenario with per-arm point residuals and with the cooperative pointpair."""
    if sc.kind != "reach_plane":
        raise ValueError("compare needs a reach_plane scenario")
    coop = run_ik(sc, max_iter, "cooperative")
    stacked = run_ik(sc, max_iter, "stacked")
    return CompareReport(coop, stacked, float(np.linalg.norm(coop.q - stacked.q)))
