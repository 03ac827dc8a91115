import numpy as np
import pytest

from cgacdts.cdts import CdtsState
from cgacdts.kinematics import DualArmSystem, franka
from cgacdts.motor import log_motor, motor_from_pose, to_compact

HOME = np.array([0.0, -np.pi / 4, 0.0, -3 * np.pi / 4, 0.0, np.pi / 2, np.pi / 4])
HOME2 = np.concatenate([HOME, HOME])


def side_by_side() -> DualArmSystem:
    chain = franka()
    return DualArmSystem(
        chain.with_base(motor_from_pose([0.0, 0.5, 0.0], [1, 0, 0, 0])),
        chain.with_base(motor_from_pose([0.0, -0.5, 0.0], [1, 0, 0, 0])),
    )


@pytest.fixture(scope="session")
def system() -> DualArmSystem:
    return side_by_side()


def random_states(system, n, seed=0, scale=0.5):
    """``n`` perturbed home configurations whose relative rotation stays clear of pi."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        q = HOME2 + rng.normal(scale=scale, size=system.dof)
        s = CdtsState.from_q(system, q)
        rel = to_compact(s.relative_motor)
        if np.arctan2(np.linalg.norm(rel[1:4]), rel[0]) < np.pi - 0.1:
            log_motor(rel)
            out.append(s)
    return out


def central_difference(fn, x, h=1e-6):
    """Rows ``d fn / d x_i`` by central differences."""
    x = np.asarray(x, dtype=float)
    rows = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        rows.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2 * h))
    return np.array(rows)


def rel_err(a, b, floor=1e-12) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), floor))


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record and print one pass/fail line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_VERDICTS, [])
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}  {detail}".rstrip()
        lines.append(line)
        with capman.global_and_fixture_disabled():
            print(f"\n{line}")
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
