"""Functionally redundant inverse kinematics (FRIK).

The solver iterates a damped least-squares update on a task-space-decomposed
error twist. Decomposition re-expresses the error twist, Jacobian and
kinematic Hessian in the target frame and keeps only the first r of the six
twist components (r = 5 drops rotation about the target z-axis, r = 3 keeps
position only). The "halley" method augments the Jacobian with a half
Hessian contraction along the damped Newton step before a second damped
solve, giving third-order convergence.

Error models:

- "decoupled" (default): position difference plus an orientation error tuned
  to the task. For r = 6 the orientation error is the rotation vector taking
  the TCP orientation onto the target; for r = 5 it is the minimal rotation
  aligning the TCP z-axis with the target z-axis, which depends on the target
  only through its z-axis. That makes every solver iterate exactly invariant
  to re-spinning the target about its own z-axis, and a converged r = 5 solve
  places the TCP position on the target exactly (within tolerance).
- "se3-log": the full SE(3) matrix logarithm of the relative transform. Kept
  for comparison; its r = 5 projection tolerates a position offset that grows
  with the residual spin angle, so it is not the default.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionMismatch, NotConverged
from .liegroup import pose_inverse, se3_log, so3_log, twist_rotation
from .robot import (
    RobotModel,
    chain_frames,
    hessian_contract,
    hessian_from_frames,
    jacobian_from_frames,
)

_TASK_DOFS = (3, 5, 6)


@dataclass(frozen=True)
class TaskProjector:
    """Row-selection matrix keeping the first r of the six twist components."""

    r: int

    def __post_init__(self):
        if self.r not in _TASK_DOFS:
            raise ValueError(f"task dimension must be one of {_TASK_DOFS}, got {self.r}")

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(6)[: self.r]


@dataclass(frozen=True)
class SolverSettings:
    """Iteration parameters. ``lam`` is the damping factor (must be > 0).

    The default damping is small relative to the Jacobian's angular-row
    scale: large enough to bound steps through singular configurations, small
    enough that near-singular but reachable targets still converge to tight
    tolerances within the iteration cap.
    """

    lam: float = 0.02
    e_max: float = 50.0
    epsilon: float = 1e-6
    max_iterations: int = 100
    method: str = "halley"
    position_scale: float = 1.0
    error_model: str = "decoupled"
    record_residuals: bool = False

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.e_max <= 0:
            raise ValueError("e_max must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.method not in ("newton", "halley"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.error_model not in ("decoupled", "se3-log"):
            raise ValueError(f"unknown error model {self.error_model!r}")
        if self.position_scale <= 0:
            raise ValueError("position_scale must be positive")


@dataclass
class SolveResult:
    q: np.ndarray
    converged: bool
    iterations: int
    residual: np.ndarray
    wall_time_us: float
    residual_norms: list[float] | None = field(default=None, repr=False)
    saturation_flags: list[bool] | None = field(default=None, repr=False)


def error_twist(t_e: np.ndarray, t_d: np.ndarray) -> np.ndarray:
    """Descent-direction error twist between the TCP pose and the target.

    Computed as the SE(3) log of the relative transform that carries ``t_e``
    onto ``t_d``: stepping the TCP along the result reduces the pose error.
    Zero exactly when the poses coincide. Raises RotationNearPi when the
    relative rotation is within tolerance of a half-turn.
    """
    return se3_log(t_d @ pose_inverse(t_e))


def _perpendicular(axis: np.ndarray) -> np.ndarray:
    """A unit vector perpendicular to ``axis``, chosen from ``axis`` alone."""
    pick = np.zeros(3)
    pick[np.argmin(np.abs(axis))] = 1.0
    perp = np.cross(axis, pick)
    return perp / np.linalg.norm(perp)


def axis_alignment_error(z_e: np.ndarray, z_d: np.ndarray) -> np.ndarray:
    """Minimal rotation vector carrying unit axis ``z_e`` onto ``z_d``.

    Depends on the two axes only, so any spin of the target frame about its
    z-axis leaves the result bitwise unchanged. For (near-)antiparallel axes
    the half-turn axis is picked deterministically from ``z_d``.
    """
    cos_a = float(np.dot(z_e, z_d))
    perp = np.cross(z_e, z_d)
    sin_a = float(np.linalg.norm(perp))
    if sin_a < 1e-12:
        if cos_a > 0.0:
            return np.zeros(3)
        return np.pi * _perpendicular(z_d)
    return np.arctan2(sin_a, cos_a) * (perp / sin_a)


def task_error(t_e: np.ndarray, t_d: np.ndarray, task_dof: int) -> np.ndarray:
    """Decoupled error twist: TCP position difference plus orientation error.

    The orientation part matches the task: full rotation vector for a 6-DOF
    task, tool-axis alignment for 5, zero for position-only.
    """
    linear = t_d[:3, 3] - t_e[:3, 3]
    if task_dof == 6:
        angular = so3_log(t_d[:3, :3] @ t_e[:3, :3].T)
    elif task_dof == 5:
        angular = axis_alignment_error(t_e[:3, 2], t_d[:3, 2])
    else:
        angular = np.zeros(3)
    return np.concatenate([linear, angular])


def saturate(e: np.ndarray, e_max: float) -> np.ndarray:
    """Clamp a twist to magnitude ``e_max``, preserving its direction exactly."""
    if e_max <= 0:
        raise ValueError("e_max must be positive")
    norm = np.linalg.norm(e)
    if norm <= e_max:
        return e
    return e * (e_max / norm)


def decompose(
    j: np.ndarray,
    dx: np.ndarray,
    h: np.ndarray,
    rd: np.ndarray,
    proj: TaskProjector,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Project Jacobian, error twist and Hessian into the r-dimensional task.

    Each quantity is re-expressed in the target frame ``rd`` via the twist
    rotation transform, then reduced to the selected task rows.
    """
    n = j.shape[1]
    if j.shape != (6, n) or dx.shape != (6,) or h.shape != (6, n, n):
        raise DimensionMismatch(
            f"inconsistent shapes: J {j.shape}, dx {dx.shape}, H {h.shape}"
        )
    tr = proj.matrix @ twist_rotation(rd)
    j_hat = tr @ j
    dx_hat = tr @ dx
    h_hat = np.einsum("rk,kij->rij", tr, h)
    return j_hat, dx_hat, h_hat


def damped_step(j_hat: np.ndarray, dx_hat: np.ndarray, lam: float) -> np.ndarray:
    """Damped least-squares joint update J^T (J J^T + lam^2 I)^-1 dx.

    Minimises ||dx - J dq||^2 + lam^2 ||dq||^2. The r x r system is solved
    through a Cholesky factorization; lam > 0 keeps it positive definite, so
    the step stays bounded by ||dx|| / (2 lam) at any rank.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    gram = j_hat @ j_hat.T
    gram.flat[:: gram.shape[0] + 1] += lam * lam
    factor = cho_factor(gram, lower=True, check_finite=False)
    return j_hat.T @ cho_solve(factor, dx_hat, check_finite=False)


def halley_step(
    j: np.ndarray,
    h: np.ndarray,
    dx_hat: np.ndarray,
    proj: TaskProjector,
    rd: np.ndarray,
    lam: float,
) -> np.ndarray:
    """Two-stage damped update using the kinematic Hessian.

    First a damped Newton step from the projected Jacobian, then a second
    damped solve on the projected augmented matrix J + (1/2) H dq.
    """
    tr = proj.matrix @ twist_rotation(rd)
    dq_dnr = damped_step(tr @ j, dx_hat, lam)
    augmented = j + 0.5 * hessian_contract(h, dq_dnr)
    return damped_step(tr @ augmented, dx_hat, lam)


def _rotate_select(m: np.ndarray, rd_t: np.ndarray, r: int) -> np.ndarray:
    """Fast equivalent of (T_t x twist_rotation) @ m for prefix-row projectors."""
    top = rd_t @ m[:3]
    if r == 3:
        return top
    bottom = rd_t @ m[3:]
    if r == 6:
        return np.concatenate([top, bottom])
    return np.concatenate([top, bottom[:2]])


def solve(
    model: RobotModel,
    t_d: np.ndarray,
    q0: np.ndarray,
    proj: TaskProjector,
    settings: SolverSettings = SolverSettings(),
) -> SolveResult:
    """Iterate from ``q0`` until the projected error norm drops below epsilon.

    Returns a soft result: ``converged=False`` with the best-effort joints
    when the iteration cap is hit. The returned residual is the final
    projected (unsaturated) error.
    """
    q = np.array(q0, dtype=float)
    if q.shape != (model.n,):
        raise DimensionMismatch(f"expected q0 of length {model.n}, got shape {q.shape}")
    rd_t = t_d[:3, :3].T
    r = proj.r
    use_halley = settings.method == "halley"
    scale = settings.position_scale
    lam = settings.lam
    bound_factor = 1.0 / (2.0 * lam)
    record = settings.record_residuals
    norms: list[float] | None = [] if record else None
    sats: list[bool] | None = [] if record else None

    start = time.perf_counter()
    converged = False
    iterations = 0
    residual = np.zeros(r)
    for it in range(settings.max_iterations + 1):
        tcp, axes, origins = chain_frames(model, q)
        if settings.error_model == "se3-log":
            dx = se3_log(t_d @ pose_inverse(tcp))
        else:
            dx = task_error(tcp, t_d, r)
        dx_hat = _rotate_select(dx, rd_t, r)
        res_norm = float(np.linalg.norm(dx_hat))
        if record:
            norms.append(res_norm)
        residual = dx_hat
        iterations = it
        if res_norm < settings.epsilon:
            converged = True
            break
        if it == settings.max_iterations:
            break

        saturating = res_norm > settings.e_max
        if record:
            sats.append(saturating)
        step_err = dx_hat * (settings.e_max / res_norm) if saturating else dx_hat.copy()

        p_tcp = tcp[:3, 3]
        j6 = jacobian_from_frames(p_tcp, axes, origins)
        j_hat = _rotate_select(j6, rd_t, r)
        if scale != 1.0:
            j_hat[:3] /= scale
            step_err[:3] /= scale
        dq = damped_step(j_hat, step_err, lam)
        if use_halley:
            h6 = hessian_from_frames(p_tcp, axes, origins)
            a_hat = _rotate_select(j6 + 0.5 * (h6 @ dq), rd_t, r)
            if scale != 1.0:
                a_hat[:3] /= scale
            dq = damped_step(a_hat, step_err, lam)
        # Damping guarantee sigma/(sigma^2 + lam^2) <= 1/(2 lam); a violation
        # means the step math is broken, not that the pose is hard.
        step_norm = float(np.linalg.norm(dq))
        limit = bound_factor * float(np.linalg.norm(step_err))
        assert step_norm <= limit * (1.0 + 1e-9) and np.isfinite(step_norm), (
            f"damped step {step_norm} exceeds bound {limit}"
        )
        q = q + dq

    wall_us = (time.perf_counter() - start) * 1e6
    return SolveResult(
        q=q,
        converged=converged,
        iterations=iterations,
        residual=residual,
        wall_time_us=wall_us,
        residual_norms=norms,
        saturation_flags=sats,
    )


def solve_toolpath(
    model: RobotModel,
    toolpath,
    q0: np.ndarray,
    proj: TaskProjector,
    settings: SolverSettings = SolverSettings(),
) -> list[SolveResult]:
    """Solve every target in order, warm-starting each from the previous joints.

    Warm starting is what keeps the greedy per-target updates continuous and
    the accumulated joint travel low. Raises NotConverged carrying the target
    index on the first failure.
    """
    poses = toolpath.base_poses()
    if len(poses) == 0:
        raise ValueError("toolpath has no targets")
    results: list[SolveResult] = []
    q = q0
    for k, t_d in enumerate(poses):
        result = solve(model, t_d, q, proj, settings)
        if not result.converged:
            raise NotConverged(k)
        results.append(result)
        q = result.q
    return results
