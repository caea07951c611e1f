"""Kinematic performance metrics: joint-limit-weighted manipulability,
joint-travel accounting, workpiece-placement sweeps over a wall grid, and
per-step timing statistics."""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotConverged, OutOfLimits, RotationNearPi
from .liegroup import make_pose
from .robot import RobotModel, geometric_jacobian
from .solver import SolveResult, SolverSettings, TaskProjector, solve_toolpath
from .toolpath import Toolpath, assign_adhoc_orientation


def joint_limit_weights(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Per-joint penalties s_i = (max - q)(q - min) / (max - min)^2.

    Each s_i is a downward parabola in q_i: zero exactly at either limit and
    maximal (1/4) at midrange. Raises OutOfLimits outside [min, max], where
    the penalty would turn negative.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != model.joint_min.shape:
        raise DimensionMismatch(f"expected q of length {model.n}, got shape {q.shape}")
    if np.any(q < model.joint_min) or np.any(q > model.joint_max):
        raise OutOfLimits(f"q {np.round(q, 4)} outside joint limits")
    span = model.joint_max - model.joint_min
    return (model.joint_max - q) * (q - model.joint_min) / (span * span)


def manipulability_jl(model: RobotModel, q: np.ndarray) -> float:
    """Joint-limit-weighted manipulability sqrt(det(J W J^T)).

    W is the diagonal of ``joint_limit_weights``; the Jacobian carries mm
    linear rows, so magnitudes are mm^3-scaled. Zero when any joint sits at a
    limit or the Jacobian is rank-deficient.
    """
    weights = joint_limit_weights(model, q)
    jac = geometric_jacobian(model, q)
    gram = (jac * weights) @ jac.T
    return math.sqrt(max(np.linalg.det(gram), 0.0))


@dataclass(frozen=True)
class TimingSummary:
    mean_us: float
    total_us: float


def summarize_timing(results: list[SolveResult]) -> TimingSummary:
    """Mean and total per-step wall time over a batch of solve results."""
    if not results:
        raise ValueError("no results to summarize")
    times = np.array([r.wall_time_us for r in results])
    return TimingSummary(mean_us=float(times.mean()), total_us=float(times.sum()))


@dataclass(frozen=True)
class TravelReport:
    """Joint-space travel of a trajectory, in degrees, plus optional timing."""

    per_joint_deg: np.ndarray
    overall_deg: float
    timing: TimingSummary | None = None


def joint_travel(trajectory: list[np.ndarray]) -> TravelReport:
    """Accumulated |dq| per joint and accumulated Euclidean step norm.

    The overall figure sums the per-step 6D step lengths, so it never exceeds
    the sum of the per-joint totals.
    """
    if len(trajectory) == 0:
        raise ValueError("empty trajectory")
    lengths = {len(q) for q in trajectory}
    if len(lengths) != 1:
        raise DimensionMismatch("trajectory configurations must have uniform length")
    arr = np.asarray(trajectory, dtype=float)
    steps = np.diff(arr, axis=0)
    per_joint = np.degrees(np.abs(steps).sum(axis=0)) if len(steps) else np.zeros(arr.shape[1])
    overall = float(np.degrees(np.linalg.norm(steps, axis=1).sum())) if len(steps) else 0.0
    return TravelReport(per_joint_deg=per_joint, overall_deg=overall)


@dataclass(frozen=True)
class SweepSpec:
    """Wall-grid extents (base frame, mm) and voxel size for placement sweeps.

    The wall is the x = 0 plane; voxel centers tile [y_min, y_max] x
    [z_min, z_max].
    """

    y_min_mm: float = -2400.0
    y_max_mm: float = 0.0
    z_min_mm: float = 0.0
    z_max_mm: float = 2400.0
    voxel_mm: float = 100.0

    def __post_init__(self):
        if self.voxel_mm <= 0:
            raise ValueError("voxel size must be positive")
        if self.y_max_mm <= self.y_min_mm or self.z_max_mm <= self.z_min_mm:
            raise ValueError("grid extents must be non-empty")

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        n_y = max(1, int(round((self.y_max_mm - self.y_min_mm) / self.voxel_mm)))
        n_z = max(1, int(round((self.z_max_mm - self.z_min_mm) / self.voxel_mm)))
        y = self.y_min_mm + self.voxel_mm * (np.arange(n_y) + 0.5)
        z = self.z_min_mm + self.voxel_mm * (np.arange(n_z) + 0.5)
        return y, z


@dataclass
class WorkspaceMap:
    """Per-voxel reachability and mean manipulability for one solve mode."""

    mode: str
    y_centers: np.ndarray
    z_centers: np.ndarray
    reachable: np.ndarray
    mean_w: np.ndarray
    causes: dict[tuple[int, int], str] = field(default_factory=dict)

    @property
    def reachable_count(self) -> int:
        return int(self.reachable.sum())

    def reachable_means(self) -> np.ndarray:
        return self.mean_w[self.reachable]


def _evaluate_mode(
    model: RobotModel,
    path: Toolpath,
    q0: np.ndarray,
    proj: TaskProjector,
    settings: SolverSettings,
    reach: float,
) -> tuple[bool, float, str]:
    positions = path.base_positions()
    if float(np.linalg.norm(positions, axis=1).max()) > reach:
        return False, math.nan, "out_of_reach"
    try:
        results = solve_toolpath(model, path, q0, proj, settings)
    except NotConverged as exc:
        return False, math.nan, f"not_converged@{exc.index}"
    except RotationNearPi:
        return False, math.nan, "rotation_near_pi"
    for k, res in enumerate(results):
        if not model.within_limits(res.q):
            return False, math.nan, f"joint_limit@{k}"
    mean_w = float(np.mean([manipulability_jl(model, res.q) for res in results]))
    return True, mean_w, ""


_WORKER: dict = {}


def _init_worker(payload: dict) -> None:
    _WORKER.update(payload)


def _evaluate_voxel(task: tuple[int, int, float, float]):
    iy, iz, y_mm, z_mm = task
    ctx = _WORKER
    frame = make_pose(ctx["frame_rot"], np.array([ctx["frame_x"], y_mm, z_mm]))
    out = []
    for mode in ("adhoc", "frik"):
        result = _evaluate_mode(
            ctx["model"],
            ctx[f"path_{mode}"].with_frame(frame),
            ctx["q0"],
            ctx[f"proj_{mode}"],
            ctx["settings"],
            ctx["reach"],
        )
        out.append(result)
    return iy, iz, out[0], out[1]


def workspace_sweep(
    model: RobotModel,
    path_template: Toolpath,
    sweep: SweepSpec,
    q0: np.ndarray,
    settings: SolverSettings = SolverSettings(),
    jobs: int = 1,
    frik_task_dof: int = 5,
) -> tuple[WorkspaceMap, WorkspaceMap]:
    """Evaluate workpiece placement on every wall voxel in both solve modes.

    The toolpath template is re-framed at each voxel center (keeping the
    template frame's rotation and x offset) and solved twice from ``q0``:
    once with the ad hoc fully-constrained orientation (6-DOF task) and once
    functionally redundant. A voxel counts as reachable only if every target
    converges with all joints inside their limits; failures are recorded as
    per-voxel causes, not raised. Returns ``(adhoc_map, frik_map)``.
    """
    y_centers, z_centers = sweep.centers()
    payload = {
        "model": model,
        "path_adhoc": assign_adhoc_orientation(path_template),
        "path_frik": path_template,
        "proj_adhoc": TaskProjector(6),
        "proj_frik": TaskProjector(frik_task_dof),
        "q0": np.asarray(q0, dtype=float),
        "settings": settings,
        "reach": model.reach_bound(),
        "frame_rot": path_template.frame[:3, :3].copy(),
        "frame_x": float(path_template.frame[0, 3]),
    }
    tasks = [
        (iy, iz, float(y), float(z))
        for iy, y in enumerate(y_centers)
        for iz, z in enumerate(z_centers)
    ]
    if jobs > 1:
        chunk = max(1, len(tasks) // (jobs * 8))
        with multiprocessing.Pool(jobs, initializer=_init_worker, initargs=(payload,)) as pool:
            rows = pool.map(_evaluate_voxel, tasks, chunksize=chunk)
    else:
        _init_worker(payload)
        rows = [_evaluate_voxel(t) for t in tasks]

    shape = (len(y_centers), len(z_centers))
    maps = {
        mode: WorkspaceMap(
            mode=mode,
            y_centers=y_centers,
            z_centers=z_centers,
            reachable=np.zeros(shape, dtype=bool),
            mean_w=np.full(shape, math.nan),
        )
        for mode in ("adhoc", "frik")
    }
    for iy, iz, adhoc_cell, frik_cell in rows:
        for mode, (ok, mean_w, cause) in (("adhoc", adhoc_cell), ("frik", frik_cell)):
            maps[mode].reachable[iy, iz] = ok
            maps[mode].mean_w[iy, iz] = mean_w
            if cause:
                maps[mode].causes[(iy, iz)] = cause
    return maps["adhoc"], maps["frik"]


def _mode_stats(wmap: WorkspaceMap) -> dict:
    means = wmap.reachable_means()
    if means.size == 0:
        return {"reachable_voxels": 0, "max_w": None, "mean_w": None, "std_w": None}
    return {
        "reachable_voxels": wmap.reachable_count,
        "max_w": float(means.max()),
        "mean_w": float(means.mean()),
        "std_w": float(means.std()),
    }


def workspace_summary(map_adhoc: WorkspaceMap, map_frik: WorkspaceMap) -> dict:
    """Reachable-voxel counts and manipulability statistics for both modes."""
    adhoc = _mode_stats(map_adhoc)
    frik = _mode_stats(map_frik)
    summary = {"adhoc": adhoc, "frik": frik}
    if adhoc["reachable_voxels"]:
        summary["reachable_pct_change"] = 100.0 * (
            frik["reachable_voxels"] - adhoc["reachable_voxels"]
        ) / adhoc["reachable_voxels"]
    frik_only = [
        c for c in map_frik.causes
        if map_adhoc.reachable[c] and not map_frik.reachable[c]
    ]
    summary["adhoc_reachable_frik_not"] = len(frik_only)
    return summary
