import numpy as np
import pytest

from cgacdts.solvers import OcProblem, Perturbation, ilqr, mpc_loop


def spring(target=0.0, wq=1.0, wv=0.1, fail_above=None):
    sq, sv = np.sqrt(wq), np.sqrt(wv)

    def fn(x):
        if fail_above is not None and x[0] > fail_above:
            return np.array([np.nan, 0.0]), np.zeros((2, 2))
        return np.array([sq * (x[0] - target), sv * x[1]]), np.array([[sq, 0.0], [0.0, sv]])

    return fn


def monitor(x):
    return {"q": float(x[0]), "dq": float(x[1])}


def test_equilibrium_hold():
    ocp = OcProblem(1, 10, 0.01, spring(), spring(), 1e-2)
    run = mpc_loop(ocp, np.zeros(2), steps=200, replan_every=10, plant_dt=0.001, monitor=monitor)
    assert len(run.records) == 200
    assert np.max(np.abs(run.states)) == 0.0
    assert np.max(np.abs(run.controls)) == 0.0
    assert run.failures == 0


def test_tick_bookkeeping_and_perturbation_timing():
    ocp = OcProblem(1, 10, 0.01, spring(), spring(), 1e-2)
    run = mpc_loop(ocp, np.zeros(2), [Perturbation(25, np.array([0.2]))], steps=60, replan_every=10,
                   plant_dt=0.001, monitor=monitor)
    assert [r.tick for r in run.records] == list(range(60))
    assert run.records[9].time == pytest.approx(0.01)
    assert [r.replanned for r in run.records[:11]] == [True] + [False] * 9 + [True]
    # the offset lands before tick 25 integrates, so the plan from tick 20 does not see it
    assert run.records[24].x[0] == 0.0
    assert run.records[25].x[0] == pytest.approx(0.2, abs=1e-6)
    assert np.all(run.controls[25:30] == 0.0)
    assert run.records[30].u[0] < 0.0
    # the spring then pulls the state back towards zero
    assert abs(run.records[-1].x[0]) < 0.2


def test_failed_replan_holds_previous_control():
    ocp = OcProblem(1, 10, 0.01, spring(target=0.1, fail_above=0.5), spring(target=0.1, fail_above=0.5), 1e-2)
    run = mpc_loop(ocp, np.zeros(2), [Perturbation(15, np.array([1.0]))], steps=40, replan_every=10, plant_dt=0.001)
    assert run.failures >= 1
    failed = run.records[20]
    assert failed.failed and failed.replanned
    assert np.array_equal(failed.u, run.records[19].u)
    assert np.array_equal(run.records[25].u, run.records[19].u)


def test_replan_every_horizon_is_open_loop_segments():
    ocp = OcProblem(1, 5, 0.01, spring(target=1.0), spring(target=1.0, wq=100.0), 1e-2)
    x0 = np.array([0.0, 0.0])
    run = mpc_loop(ocp, x0, steps=5, replan_every=5, plant_dt=0.01)
    traj, _ = ilqr(ocp, x0)
    assert np.array_equal(run.controls, traj.controls)
    assert np.allclose(run.states, traj.states[1:], atol=0.0)


def test_argument_validation():
    ocp = OcProblem(1, 5, 0.01, spring(), spring(), 1.0)
    with pytest.raises(ValueError):
        mpc_loop(ocp, np.zeros(2), replan_every=0)
    with pytest.raises(ValueError):
        mpc_loop(ocp, np.zeros(2), plant_dt=0.0)
    with pytest.raises(ValueError):
        mpc_loop(ocp, np.zeros(2), steps=-1)
    assert mpc_loop(ocp, np.zeros(2), steps=0).records == []
