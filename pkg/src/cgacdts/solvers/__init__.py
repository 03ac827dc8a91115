"""Gauss-Newton inverse kinematics, iLQR and receding-horizon control."""

from .gauss_newton import (
    DEFAULT_SEPARATION_EPS,
    GaussNewtonOptions,
    GaussNewtonReport,
    IkProblem,
    IterationRecord,
    JointResidual,
    SingularityError,
    Term,
    gauss_newton,
    pointpair_singularity_guard,
    posture_term,
    projected_gradient,
)
from .ilqr import (
    IlqrOptions,
    IlqrReport,
    NonFiniteCostError,
    OcProblem,
    Trajectory,
    cdts_state_residual,
    cost_gradient,
    ilqr,
    rollout,
    zero_residual,
)
from .mpc import MpcLog, Perturbation, TickRecord, mpc_loop
