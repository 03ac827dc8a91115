"""Cooperative dual-task space in conformal geometric algebra."""

from .algebra import (
    BLADE_NAMES,
    Multivector,
    basis,
    commutator_product,
    geometric_product,
    inner_product,
    outer_product,
    reverse,
)
from .cdts import (
    CdtsState,
    MultivectorJacobian,
    Residual,
    absolute_jacobian,
    absolute_motor,
    cooperative_pointpair,
    cooperative_pointpair_jacobian,
    relative_jacobian,
    relative_motor,
    residual_absolute_axis,
    residual_containment,
    residual_distance,
    residual_line_alignment,
    residual_pointpair_point,
    residual_reach_primitive,
    residual_target_motor,
)
from .geometry import (
    PointAtInfinityError,
    circle,
    embed_point,
    extract_point,
    line,
    plane,
    point_pair,
    sphere,
)
from .kinematics import (
    DualArmSystem,
    JointDescription,
    KinematicChain,
    RobotDescriptionError,
    analytic_jacobian,
    forward_kinematics,
    franka,
    joint_motor,
    load_robot,
    load_robot_file,
)
from .motor import (
    BranchError,
    InvalidMotorError,
    exp_jacobian,
    log_jacobian,
    motor_exp,
    motor_log,
    rotor,
    sandwich,
    translator,
)

__version__ = "0.1.0"
