import numpy as np
import pytest

from cgacdts.cdts import CdtsState, residual_distance, residual_pointpair_point
from cgacdts.geometry import embed_raw
from cgacdts.kinematics import DualArmSystem, load_robot
from cgacdts.solvers import (
    GaussNewtonOptions,
    IkProblem,
    SingularityError,
    Term,
    gauss_newton,
    pointpair_singularity_guard,
    posture_term,
    projected_gradient,
)
from conftest import HOME2


def slider_pair(gap: float) -> DualArmSystem:
    """Two identical one-joint arms whose end-effectors sit ``gap`` apart along x at q = 0."""
    def arm(x, reach):
        return load_robot({
            "joints": [{"axis": [0, 0, 1], "point": [0, 0, 0], "offset_translation": [reach, 0.0, 0.0]}],
            "base_pose": {"translation": [x, 0.0, 0.0], "quaternion": [1, 0, 0, 0]},
        })
    return DualArmSystem(arm(0.0, 0.5), arm(1.0, gap - 0.5))


def reach_problem(system, target, q0=HOME2):
    p = embed_raw(target)
    return IkProblem(system, (Term("pointpair", lambda s: residual_pointpair_point(s, p)),), q0=q0, uses_pointpair=True)


def test_guard_boundaries():
    assert not pointpair_singularity_guard(CdtsState(slider_pair(0.5), [0.0], [0.0]), eps=0.01)
    with pytest.raises(SingularityError):
        pointpair_singularity_guard(CdtsState(slider_pair(0.0), [0.0], [0.0]))
    # 0.5 m apart with eps 0.5 sits exactly on the closed threshold
    with pytest.raises(SingularityError):
        pointpair_singularity_guard(CdtsState(slider_pair(0.5), [0.0], [0.0]), eps=0.5)
    assert not pointpair_singularity_guard(CdtsState(slider_pair(0.5), [0.0], [0.0]), eps=0.4999)
    with pytest.raises(SingularityError):
        pointpair_singularity_guard(CdtsState(slider_pair(0.005), [0.0], [0.0]))
    assert not pointpair_singularity_guard(CdtsState(slider_pair(0.02), [0.0], [0.0]))
    # with a distance constraint the guard reports instead of raising
    assert pointpair_singularity_guard(CdtsState(slider_pair(0.005), [0.0], [0.0]), distance_constrained=True)


def test_solver_raises_when_end_effectors_meet():
    system = slider_pair(0.0)
    problem = reach_problem(system, [0.3, 0.2, 0.0], q0=np.zeros(2))
    with pytest.raises(SingularityError):
        gauss_newton(problem)
    guarded = IkProblem(
        system, problem.objectives,
        (Term("dist", lambda s: residual_distance(s, 0.2), kind="distance"),),
        q0=np.zeros(2), uses_pointpair=True,
    )
    assert guarded.distance_constrained
    gauss_newton(guarded, GaussNewtonOptions(max_iter=5))


def test_already_optimal_start_returns_immediately(system):
    x1, _ = CdtsState.from_q(system, HOME2).ee_positions
    q, report = gauss_newton(reach_problem(system, x1))
    assert report.success and report.iterations <= 1
    assert np.allclose(q, HOME2)


def test_reach_point_converges_and_merit_never_increases(system):
    x1, _ = CdtsState.from_q(system, HOME2).ee_positions
    target = x1 + [0.1, 0.2, -0.2]  # 0.3 m away
    q, report = gauss_newton(reach_problem(system, target))
    assert report.success
    assert report.residual_norms["pointpair"] < 1e-8
    merits = [r.merit for r in report.history]
    assert all(b <= a for a, b in zip(merits, merits[1:]))
    assert [r.iteration for r in report.history] == list(range(len(report.history)))


def test_max_iter_status(system):
    x1, _ = CdtsState.from_q(system, HOME2).ee_positions
    _, report = gauss_newton(reach_problem(system, x1 + [0.1, 0.1, -0.2]), GaussNewtonOptions(max_iter=1))
    assert report.status == "max_iter" and report.iterations == 1


def test_unreachable_constraint_is_reported(system):
    problem = IkProblem(
        system, (posture_term(HOME2, 1.0),),
        (Term("dist", lambda s: residual_distance(s, 10.0), kind="distance"),), q0=HOME2,
    )
    q, report = gauss_newton(problem, GaussNewtonOptions(max_iter=60))
    assert report.status == "constraint_violation"
    assert np.all(np.isfinite(q))


def test_penalty_loops_merit_monotone_within_each_loop(system):
    problem = IkProblem(
        system, (posture_term(HOME2, 1.0),),
        (Term("dist", lambda s: residual_distance(s, 0.6), kind="distance"),), q0=HOME2,
    )
    q, report = gauss_newton(problem)
    assert report.success and report.constraint_norm < 1e-6
    x1, x2 = CdtsState.from_q(system, q).ee_positions
    assert np.linalg.norm(x1 - x2) == pytest.approx(0.6, abs=1e-6)
    hist = report.history
    for a, b in zip(hist, hist[1:]):
        if a.penalty == b.penalty and b.iteration > 0:
            assert b.merit <= a.merit
    assert projected_gradient(problem, q) < 1e-5


def test_limit_projection(system):
    x1, _ = CdtsState.from_q(system, HOME2).ee_positions
    opts = GaussNewtonOptions(enforce_limits=True)
    q, _ = gauss_newton(reach_problem(system, x1 + [0.3, 0.0, -0.3]), opts)
    lim = system.limits
    assert np.all(q >= lim[:, 0]) and np.all(q <= lim[:, 1])


def test_projected_gradient_without_constraints_is_gradient_norm(system):
    problem = IkProblem(system, (posture_term(np.zeros(14), 1.0),), q0=HOME2)
    assert projected_gradient(problem, HOME2) == pytest.approx(2 * np.linalg.norm(HOME2))


def test_option_and_problem_validation(system):
    with pytest.raises(ValueError, match="unknown"):
        GaussNewtonOptions.from_mapping({"max_iters": 3})
    assert GaussNewtonOptions.from_mapping({"max_iter": 3}).max_iter == 3
    with pytest.raises(ValueError):
        Term("bad", lambda s: None, weight=0.0)
    with pytest.raises(ValueError):
        IkProblem(system, ())
    with pytest.raises(ValueError):
        IkProblem(system, (posture_term(HOME2),), q0=np.zeros(3))
