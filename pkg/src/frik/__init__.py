"""Functionally redundant inverse kinematics for serial manipulators."""

from .analysis import (
    SweepSpec,
    TimingSummary,
    TravelReport,
    WorkspaceMap,
    joint_limit_weights,
    joint_travel,
    manipulability_jl,
    summarize_timing,
    workspace_summary,
    workspace_sweep,
)
from .config import RunConfig, load_config
from .errors import (
    DegenerateProjection,
    DimensionMismatch,
    FrikError,
    InvalidRotation,
    NotConverged,
    OutOfLimits,
    ParseError,
    RotationNearPi,
)
from .liegroup import (
    is_rotation,
    make_pose,
    pose_inverse,
    quat_to_rot,
    rot_to_quat,
    rot_x,
    rot_y,
    rot_z,
    se3_exp,
    se3_log,
    so3_exp,
    so3_log,
    twist_rotation,
)
from .robot import (
    DHRow,
    RobotModel,
    forward_kinematics,
    geometric_jacobian,
    hessian_contract,
    irb4600,
    kinematic_hessian,
    load_robot,
)
from .solver import (
    SolveResult,
    SolverSettings,
    TaskProjector,
    damped_step,
    decompose,
    error_twist,
    halley_step,
    saturate,
    solve,
    solve_toolpath,
    task_error,
)
from .toolpath import (
    ConeSpec,
    Toolpath,
    ToolpathTarget,
    assign_adhoc_orientation,
    generate_cone_spiral,
    load_toolpath,
    save_toolpath,
)

__version__ = "0.1.0"
