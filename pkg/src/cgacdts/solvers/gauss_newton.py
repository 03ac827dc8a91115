"""Damped Gauss-Newton (Levenberg) over dual-arm joint configurations.

Objectives are weighted least-squares terms; equality constraints enter as a
quadratic penalty whose weight grows geometrically over a fixed number of
outer loops.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..algebra import ip
from ..cdts import CdtsState, Residual
from ..kinematics import DualArmSystem

log = logging.getLogger(__name__)

ResidualBuilder = Callable[[CdtsState], Residual]

DEFAULT_SEPARATION_EPS = 0.01  # meters


class SingularityError(RuntimeError):
    """End-effector points too close for the cooperative pointpair to be informative."""


@dataclass(frozen=True)
class Term:
    """Named residual builder with a weight (objectives) or as a constraint."""

    name: str
    builder: ResidualBuilder
    weight: float = 1.0
    kind: str = "generic"  # "distance" marks a separation constraint for the guard

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError(f"term {self.name!r}: weight must be positive")


@dataclass(frozen=True)
class IkProblem:
    system: DualArmSystem
    objectives: tuple[Term, ...]
    constraints: tuple[Term, ...] = ()
    q0: np.ndarray | None = None
    uses_pointpair: bool = False

    def __post_init__(self):
        if not self.objectives and not self.constraints:
            raise ValueError("an IK problem needs at least one objective or constraint")
        object.__setattr__(self, "objectives", tuple(self.objectives))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        q0 = np.zeros(self.system.dof) if self.q0 is None else np.array(self.q0, dtype=float)
        if q0.shape != (self.system.dof,):
            raise ValueError(f"q0 must have {self.system.dof} entries")
        object.__setattr__(self, "q0", q0)

    @property
    def distance_constrained(self) -> bool:
        return any(t.kind == "distance" for t in self.constraints)


@dataclass
class GaussNewtonOptions:
    max_iter: int = 200
    tol: float = 1e-20  # merit below which a loop is converged
    grad_tol: float = 1e-12
    step_tol: float = 1e-12
    ftol: float = 1e-10  # relative merit decrease that ends an inner loop
    stationary_tol: float = 1e-8
    constraint_tol: float = 1e-6
    damping: float = 1e-3
    damping_up: float = 2.0
    damping_down: float = 3.0
    damping_min: float = 1e-12
    damping_max: float = 1e10
    penalty: float = 1e2
    penalty_factor: float = 10.0
    penalty_loops: int = 5
    enforce_limits: bool = False
    separation_eps: float = DEFAULT_SEPARATION_EPS

    @classmethod
    def from_mapping(cls, cfg: dict) -> "GaussNewtonOptions":
        known = set(cls.__dataclass_fields__)
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown Gauss-Newton options: {sorted(unknown)}")
        return cls(**cfg)


@dataclass
class IterationRecord:
    iteration: int
    q: np.ndarray
    merit: float
    objective: float
    constraint_norm: float
    penalty: float
    damping: float


@dataclass
class GaussNewtonReport:
    status: str
    iterations: int
    objective: float
    constraint_norm: float
    residual_norms: dict[str, float]
    history: list[IterationRecord] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status == "converged"


@dataclass
class JointResidual:
    """Plain joint-space residual ``q - q_ref`` with the same interface as :class:`Residual`."""

    value: np.ndarray

    def vector(self) -> np.ndarray:
        return self.value

    def matrix(self) -> np.ndarray:
        return np.eye(len(self.value))

    def norm(self) -> float:
        return float(np.linalg.norm(self.value))


def posture_term(q_ref, weight: float = 1e-4, name: str = "posture") -> Term:
    """Objective keeping the configuration near ``q_ref``."""
    q_ref = np.array(q_ref, dtype=float)
    return Term(name, lambda s: JointResidual(s.q - q_ref), weight)


def pointpair_singularity_guard(
    state: CdtsState,
    eps: float = DEFAULT_SEPARATION_EPS,
    distance_constrained: bool = False,
) -> bool:
    """Check the end-effector separation that keeps ``P1 ^ P2`` well defined.

    The metric magnitude of the pointpair, ``|P1 . P2| = d^2 / 2``, is compared
    against ``eps^2 / 2`` (closed threshold).

    Returns:
        True if the guard tripped (only possible with ``distance_constrained``).

    Raises:
        SingularityError: if tripped and no distance constraint is active.
    """
    magnitude = abs(float(ip(state.point1, state.point2)[0]))
    tripped = magnitude <= 0.5 * eps * eps
    if tripped and not distance_constrained:
        sep = np.sqrt(2.0 * magnitude)
        raise SingularityError(
            f"end-effector separation {sep:.4g} m is at or below {eps:.4g} m; "
            "the cooperative pointpair Jacobian is singular"
        )
    return tripped


def _evaluate(problem: IkProblem, q: np.ndarray, penalty: float, shifts=None):
    """Stacked weighted rows and the merit ``f + sum mu |c + y/mu|^2``."""
    state = CdtsState.from_q(problem.system, q)
    rows, mats = [], []
    objective = 0.0
    norms = {}
    for term in problem.objectives:
        r = term.builder(state)
        v = r.vector()
        objective += term.weight * float(v @ v)
        norms[term.name] = float(np.linalg.norm(v))
        sw = np.sqrt(term.weight)
        rows.append(sw * v)
        mats.append(sw * r.matrix())
    cons_sq = 0.0
    raw = []
    for i, term in enumerate(problem.constraints):
        r = term.builder(state)
        v = r.vector()
        raw.append(v)
        cons_sq += float(v @ v)
        norms[term.name] = float(np.linalg.norm(v))
        sp = np.sqrt(penalty * term.weight)
        shifted = v if shifts is None else v + shifts[i]
        rows.append(sp * shifted)
        mats.append(sp * r.matrix())
    resid = np.concatenate(rows)
    jac = np.vstack(mats)
    merit = float(resid @ resid)
    return _Eval(state, resid, jac, merit, objective, float(np.sqrt(cons_sq)), norms, raw)


@dataclass
class _Eval:
    state: CdtsState
    r: np.ndarray
    jac: np.ndarray
    merit: float
    objective: float
    cnorm: float
    norms: dict
    raw: list


def _project(problem: IkProblem, q: np.ndarray, enforce: bool) -> np.ndarray:
    if not enforce:
        return q
    lim = problem.system.limits
    return np.clip(q, lim[:, 0], lim[:, 1])


def gauss_newton(problem: IkProblem, opts: GaussNewtonOptions | None = None):
    """Solve an IK problem with Levenberg-damped Gauss-Newton steps.

    Constraints are handled by a quadratic penalty whose weight is multiplied
    by ``penalty_factor`` after each outer loop.  Between loops the constraint
    targets are shifted by multiplier estimates (augmented Lagrangian), so the
    constraints can be met to ``constraint_tol`` at a finite penalty even when
    they conflict with the objectives.

    Returns:
        ``(q, report)``.  Failure to converge is reported through
        ``report.status`` rather than raised.

    Raises:
        SingularityError: if the problem uses the cooperative pointpair, the
            end-effectors meet and no distance constraint is configured.
    """
    opts = opts or GaussNewtonOptions()
    q = _project(problem, problem.q0.copy(), opts.enforce_limits)
    loops = max(1, opts.penalty_loops) if problem.constraints else 1
    penalty = opts.penalty
    lam = opts.damping
    history: list[IterationRecord] = []
    it = 0
    ev = _evaluate(problem, q, penalty)
    shifts = [np.zeros_like(v) for v in ev.raw]
    history.append(IterationRecord(0, q.copy(), ev.merit, ev.objective, ev.cnorm, penalty, lam))
    stalled = False

    for loop in range(loops):
        if loop > 0:
            # multiplier update y += mu c, stored as the shift y / mu
            shifts = [(sh + v) / opts.penalty_factor for sh, v in zip(shifts, ev.raw)]
            penalty *= opts.penalty_factor
            ev = _evaluate(problem, q, penalty, shifts)
            lam = opts.damping
        stalled = False
        while it < opts.max_iter:
            if problem.uses_pointpair:
                pointpair_singularity_guard(ev.state, opts.separation_eps, problem.distance_constrained)
            grad = ev.jac.T @ ev.r
            if ev.merit <= opts.tol or np.max(np.abs(grad)) <= opts.grad_tol:
                break
            jtj = ev.jac.T @ ev.jac
            trial = None
            while lam <= opts.damping_max:
                try:
                    step = np.linalg.solve(jtj + lam * np.eye(len(q)), -grad)
                except np.linalg.LinAlgError:
                    step = None
                if step is not None:
                    q_new = _project(problem, q + step, opts.enforce_limits)
                    cand = _evaluate(problem, q_new, penalty, shifts)
                    if np.isfinite(cand.merit) and cand.merit < ev.merit:
                        trial = cand
                        break
                lam *= opts.damping_up
            it += 1
            if trial is None:
                log.debug("damping exceeded cap at iteration %d", it)
                stalled = True
                break
            decrease = ev.merit - trial.merit
            small = (
                np.linalg.norm(q_new - q) <= opts.step_tol * (1.0 + np.linalg.norm(q))
                or decrease <= opts.ftol * ev.merit
            )
            q, ev = q_new, trial
            lam = max(lam / opts.damping_down, opts.damping_min)
            history.append(IterationRecord(it, q.copy(), ev.merit, ev.objective, ev.cnorm, penalty, lam))
            if small:
                break
        if problem.constraints and ev.cnorm < opts.constraint_tol and not _stationary_gap(ev, opts):
            break
        if it >= opts.max_iter:
            break

    converged = _stationary_gap(ev, opts) is False or stalled or ev.merit <= opts.tol
    if problem.constraints and ev.cnorm >= opts.constraint_tol:
        status = "constraint_violation"
    elif it >= opts.max_iter and not converged:
        status = "max_iter"
    else:
        status = "converged"
    report = GaussNewtonReport(status, it, ev.objective, ev.cnorm, ev.norms, history)
    return q, report


def _stationary_gap(ev: _Eval, opts) -> bool:
    """True while the merit gradient is still clearly nonzero."""
    grad = ev.jac.T @ ev.r
    return float(np.max(np.abs(grad))) > max(opts.grad_tol, opts.stationary_tol)


def projected_gradient(problem: IkProblem, q, rank_tol: float = 1e-8) -> float:
    """Norm of the objective gradient restricted to the constraint tangent space.

    Directions in the null space of the stacked constraint Jacobian keep the
    constraints satisfied to first order; a vanishing value marks a
    constrained stationary point.
    """
    ev = _evaluate(problem, np.asarray(q, dtype=float), 1.0)
    n_obj = sum(len(t.builder(ev.state).vector()) for t in problem.objectives)
    grad = 2.0 * ev.jac[:n_obj].T @ ev.r[:n_obj]
    jc = ev.jac[n_obj:]
    if jc.size == 0:
        return float(np.linalg.norm(grad))
    _, sv, vt = np.linalg.svd(jc)
    rank = int(np.sum(sv > rank_tol * sv[0])) if sv.size and sv[0] > 0 else 0
    null = vt[rank:]
    return float(np.linalg.norm(null @ grad))
