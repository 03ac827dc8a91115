"""iLQR over double-integrator joint dynamics.

State ``x = (q, dq)``, control ``u = ddq``, semi-implicit Euler::

    dq+ = dq + dt u,    q+ = q + dt dq+

Cost ``sum_k |r(x_k)|^2 + u_k' R u_k + |r_N(x_N)|^2`` with residual functions
returning ``(r, dr/dx)``.  Cost Hessians use the Gauss-Newton approximation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..cdts import CdtsState
from ..kinematics import DualArmSystem
from .gauss_newton import Term

log = logging.getLogger(__name__)

StateResidual = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


class NonFiniteCostError(FloatingPointError):
    """Rollout produced a NaN or infinite cost."""


def zero_residual(nx: int) -> StateResidual:
    def fn(x):
        return np.zeros(0), np.zeros((0, nx))

    return fn


@dataclass(frozen=True)
class OcProblem:
    nq: int
    horizon: int
    dt: float
    running: StateResidual
    terminal: StateResidual
    R: np.ndarray

    def __post_init__(self):
        if self.nq < 1:
            raise ValueError("need at least one joint")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError(f"horizon must be an integer >= 1, got {self.horizon}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        r = np.asarray(self.R, dtype=float)
        if r.ndim == 0:
            r = np.full(self.nq, float(r))
        elif r.ndim == 2:
            if not np.allclose(r, np.diag(np.diag(r))):
                raise ValueError("R must be diagonal")
            r = np.diag(r).copy()
        if r.shape != (self.nq,) or not np.all(r > 0):
            raise ValueError("R must have positive diagonal entries")
        object.__setattr__(self, "R", r)

    @property
    def nx(self) -> int:
        return 2 * self.nq

    def dynamics_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        n, dt = self.nq, self.dt
        eye = np.eye(n)
        a = np.block([[eye, dt * eye], [np.zeros((n, n)), eye]])
        b = np.vstack([dt * dt * eye, dt * eye])
        return a, b

    def with_residuals(self, running=None, terminal=None) -> "OcProblem":
        return OcProblem(
            self.nq, self.horizon, self.dt,
            running or self.running, terminal or self.terminal, self.R,
        )


def step(x: np.ndarray, u: np.ndarray, dt: float) -> np.ndarray:
    n = len(u)
    dq = x[n:] + dt * u
    return np.concatenate([x[:n] + dt * dq, dq])


@dataclass
class Trajectory:
    states: np.ndarray  # (N+1, nx)
    controls: np.ndarray  # (N, nq)
    residual_norms: np.ndarray  # (N+1,)
    cost: float
    gains: np.ndarray | None = None  # (N, nq, nx)

    @property
    def horizon(self) -> int:
        return len(self.controls)


def rollout(ocp: OcProblem, x0, controls, memo: _Memo | None = None) -> Trajectory:
    """Integrate the dynamics and evaluate the cost of an open-loop control sequence."""
    u = np.asarray(controls, dtype=float)
    if u.shape != (ocp.horizon, ocp.nq):
        raise ValueError(f"controls must have shape {(ocp.horizon, ocp.nq)}, got {u.shape}")
    xs = np.empty((ocp.horizon + 1, ocp.nx))
    xs[0] = np.asarray(x0, dtype=float)
    for k in range(ocp.horizon):
        xs[k + 1] = step(xs[k], u[k], ocp.dt)
    norms, cost = _cost(ocp, xs, u, memo)
    return Trajectory(xs, u, norms, cost)


class _Memo:
    """Per-solve cache of residual evaluations keyed on the exact state bytes."""

    def __init__(self, ocp: OcProblem):
        self.ocp = ocp
        self.store: dict[tuple[bool, bytes], tuple[np.ndarray, np.ndarray]] = {}

    def __call__(self, x: np.ndarray, terminal: bool):
        key = (terminal, x.tobytes())
        hit = self.store.get(key)
        if hit is None:
            fn = self.ocp.terminal if terminal else self.ocp.running
            r, j = fn(x)
            hit = (np.asarray(r, dtype=float), np.asarray(j, dtype=float).reshape(len(r), self.ocp.nx))
            if len(self.store) > 256:
                self.store.clear()
            self.store[key] = hit
        return hit


def _cost(ocp: OcProblem, xs, us, memo: _Memo | None = None) -> tuple[np.ndarray, float]:
    norms = np.empty(len(xs))
    cost = 0.0
    memo = memo or _Memo(ocp)
    for k, x in enumerate(xs):
        r = memo(x, k == ocp.horizon)[0]
        sq = float(r @ r)
        norms[k] = np.sqrt(sq)
        cost += sq
    cost += float(np.sum(ocp.R * us * us))
    return norms, cost


def _linearize(ocp: OcProblem, xs, memo: _Memo | None = None):
    memo = memo or _Memo(ocp)
    rs, js = [], []
    for k, x in enumerate(xs):
        r, j = memo(x, k == ocp.horizon)
        rs.append(r)
        js.append(j)
    return rs, js


def cost_gradient(ocp: OcProblem, x0, controls) -> np.ndarray:
    """Gradient of the total cost with respect to the controls (adjoint method)."""
    traj = rollout(ocp, x0, controls)
    rs, js = _linearize(ocp, traj.states)
    return _adjoint_gradient(ocp, traj.controls, rs, js)


def _adjoint_gradient(ocp, us, rs, js) -> np.ndarray:
    a, b = ocp.dynamics_matrices()
    lam = 2.0 * js[-1].T @ rs[-1]
    grad = np.empty_like(us)
    for k in range(ocp.horizon - 1, -1, -1):
        grad[k] = 2.0 * ocp.R * us[k] + b.T @ lam
        lam = 2.0 * js[k].T @ rs[k] + a.T @ lam
    return grad


@dataclass
class IlqrOptions:
    max_iter: int = 50
    grad_tol: float = 1e-10
    cost_tol: float = 1e-14  # relative cost improvement treated as converged
    mu_init: float = 1e-6  # first regularization used after a failure
    mu_factor: float = 10.0
    mu_max: float = 1e10
    alpha_min: float = 1e-4


@dataclass
class IlqrReport:
    status: str
    iterations: int
    cost: float
    grad_norm: float
    cost_history: list[float] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status == "converged"


def _backward(ocp, a, b, us, rs, js, mu):
    n, nx = ocp.nq, ocp.nx
    vx = 2.0 * js[-1].T @ rs[-1]
    vxx = 2.0 * js[-1].T @ js[-1]
    kff = np.empty((ocp.horizon, n))
    kfb = np.empty((ocp.horizon, n, nx))
    expected = 0.0
    rmat = np.diag(2.0 * ocp.R)
    for k in range(ocp.horizon - 1, -1, -1):
        qx = 2.0 * js[k].T @ rs[k] + a.T @ vx
        qu = 2.0 * ocp.R * us[k] + b.T @ vx
        qxx = 2.0 * js[k].T @ js[k] + a.T @ vxx @ a
        quu = rmat + b.T @ vxx @ b
        qux = b.T @ vxx @ a
        quu_reg = quu + mu * np.eye(n)
        try:
            chol = np.linalg.cholesky(quu_reg)
        except np.linalg.LinAlgError:
            return None
        sol = np.linalg.solve(chol.T, np.linalg.solve(chol, np.column_stack([qu, qux])))
        kk, kmat = -sol[:, 0], -sol[:, 1:]
        kff[k], kfb[k] = kk, kmat
        expected += float(kk @ qu)
        vx = qx + kmat.T @ quu @ kk + kmat.T @ qu + qux.T @ kk
        vxx = qxx + kmat.T @ quu @ kmat + kmat.T @ qux + qux.T @ kmat
        vxx = 0.5 * (vxx + vxx.T)
    return kff, kfb, expected


def _forward(ocp, traj, kff, kfb, alpha, memo):
    xs = np.empty_like(traj.states)
    us = np.empty_like(traj.controls)
    xs[0] = traj.states[0]
    for k in range(ocp.horizon):
        us[k] = traj.controls[k] + alpha * kff[k] + kfb[k] @ (xs[k] - traj.states[k])
        xs[k + 1] = step(xs[k], us[k], ocp.dt)
    norms, cost = _cost(ocp, xs, us, memo)
    return Trajectory(xs, us, norms, cost)


def ilqr(ocp: OcProblem, x0, u_init=None, opts: IlqrOptions | None = None):
    """Locally optimal trajectory from ``x0`` starting at the controls ``u_init``.

    Returns:
        ``(trajectory, report)``; the trajectory carries the feedback gains of
        the last backward pass.

    Raises:
        NonFiniteCostError: if the initial rollout has a non-finite cost.
    """
    opts = opts or IlqrOptions()
    if u_init is None:
        u_init = np.zeros((ocp.horizon, ocp.nq))
    memo = _Memo(ocp)
    traj = rollout(ocp, x0, u_init, memo)
    if not np.isfinite(traj.cost):
        raise NonFiniteCostError("initial rollout cost is not finite")
    a, b = ocp.dynamics_matrices()
    mu = 0.0
    history = [traj.cost]
    status = "max_iter"
    grad_norm = np.inf
    it = 0
    gains = None
    while it < opts.max_iter:
        rs, js = _linearize(ocp, traj.states, memo)
        grad_norm = float(np.linalg.norm(_adjoint_gradient(ocp, traj.controls, rs, js)))
        if grad_norm < opts.grad_tol:
            status = "converged"
            break
        it += 1
        accepted = False
        while True:
            back = _backward(ocp, a, b, traj.controls, rs, js, mu)
            if back is not None:
                kff, kfb, expected = back
                if -expected <= opts.cost_tol * max(traj.cost, 1e-300):
                    # predicted improvement below round-off: stationary
                    break
                alpha = 1.0
                while alpha >= opts.alpha_min:
                    cand = _forward(ocp, traj, kff, kfb, alpha, memo)
                    if np.isfinite(cand.cost) and cand.cost < traj.cost:
                        accepted = True
                        break
                    alpha *= 0.5
                if accepted:
                    break
            mu = opts.mu_init if mu == 0.0 else mu * opts.mu_factor
            if mu > opts.mu_max:
                break
        if not accepted:
            if back is not None and -back[2] <= opts.cost_tol * max(traj.cost, 1e-300):
                status = "converged"
            else:
                status = "stalled"
            break
        gains = kfb
        improvement = traj.cost - cand.cost
        traj = cand
        history.append(traj.cost)
        mu = 0.0 if mu <= opts.mu_init else mu / opts.mu_factor
        if improvement <= opts.cost_tol * max(traj.cost, 1e-300):
            status = "converged"
            break
    traj.gains = gains
    report = IlqrReport(status, it, traj.cost, grad_norm, history)
    return traj, report


def cdts_state_residual(
    system: DualArmSystem,
    terms: Sequence[Term],
    velocity_weight: float = 0.0,
) -> StateResidual:
    """Stack weighted CDTS residuals of ``q`` (and optionally ``sqrt(w) dq``) as a state residual."""
    nq = system.dof
    weights = [np.sqrt(t.weight) for t in terms]
    sv = np.sqrt(velocity_weight)

    def fn(x):
        x = np.asarray(x, dtype=float)
        state = CdtsState.from_q(system, x[:nq])
        rows, mats = [], []
        for t, w in zip(terms, weights):
            res = t.builder(state)
            rows.append(w * res.vector())
            m = np.zeros((int(res.mask.sum()), 2 * nq))
            m[:, :nq] = w * res.matrix()
            mats.append(m)
        if velocity_weight > 0:
            rows.append(sv * x[nq:])
            m = np.zeros((nq, 2 * nq))
            m[:, nq:] = sv * np.eye(nq)
            mats.append(m)
        return np.concatenate(rows), np.vstack(mats)

    return fn
