"""Toolpath data model, cone-spiral generation, and file round-tripping.

A toolpath is an ordered list of target poses expressed relative to a
workpiece frame; each target's z-axis is the required tool-approach
direction (pointing into the surface). Targets transform to the robot base
on demand via ``base_poses``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DegenerateProjection, InvalidRotation, ParseError
from .liegroup import is_rotation, make_pose, quat_to_rot, rot_to_quat


@dataclass(frozen=True)
class ToolpathTarget:
    k: int
    pose: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pose", np.asarray(self.pose, dtype=float))
        if self.pose.shape != (4, 4):
            raise ValueError(f"target {self.k}: pose must be 4x4")


@dataclass(frozen=True)
class Toolpath:
    """Targets in workpiece coordinates plus the workpiece placement frame."""

    targets: tuple[ToolpathTarget, ...]
    frame: np.ndarray = field(default_factory=lambda: np.eye(4))
    orientation_fallbacks: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "frame", np.asarray(self.frame, dtype=float))
        if not self.targets:
            raise ValueError("toolpath must contain at least one target")
        for expected, target in enumerate(self.targets):
            if target.k != expected:
                raise ValueError(
                    f"target indices must be contiguous from 0, got {target.k} at position {expected}"
                )

    def __len__(self) -> int:
        return len(self.targets)

    def base_poses(self) -> list[np.ndarray]:
        """Target poses in the robot base frame."""
        return [self.frame @ t.pose for t in self.targets]

    def base_positions(self) -> np.ndarray:
        """(N, 3) target positions in the base frame; cheap reach screening."""
        local = np.stack([t.pose[:3, 3] for t in self.targets])
        return local @ self.frame[:3, :3].T + self.frame[:3, 3]

    def with_frame(self, frame: np.ndarray) -> "Toolpath":
        return replace(self, frame=np.asarray(frame, dtype=float))


@dataclass(frozen=True)
class ConeSpec:
    """Cone-spiral parameters: diameter/height of the cone, spiral pitch per
    revolution, samples per revolution, and TCP standoff along the outward
    surface normal (all mm)."""

    diameter: float = 100.0
    height: float = 50.0
    pitch: float = 2.0
    samples_per_rev: int = 114
    standoff: float = 0.0

    def __post_init__(self):
        if self.diameter <= 0 or self.height <= 0 or self.pitch <= 0:
            raise ValueError("diameter, height and pitch must be positive")
        if self.standoff < 0:
            raise ValueError("standoff must be non-negative")
        if self.samples_per_rev < 8:
            raise ValueError("samples_per_rev must be at least 8")


def cone_surface_point(spec: ConeSpec, azimuth: float, z: float) -> np.ndarray:
    radius = 0.5 * spec.diameter * (1.0 - z / spec.height)
    return np.array([radius * math.cos(azimuth), radius * math.sin(azimuth), z])


def cone_outward_normal(spec: ConeSpec, azimuth: float) -> np.ndarray:
    """Unit outward surface normal; independent of height along a ruling."""
    slope = 0.5 * spec.diameter / spec.height
    n = np.array([math.cos(azimuth), math.sin(azimuth), slope])
    return n / np.linalg.norm(n)


def generate_cone_spiral(spec: ConeSpec) -> Toolpath:
    """Spiral of tool targets over the cone surface, base to apex.

    Consecutive targets advance 2*pi/samples_per_rev in azimuth and
    pitch/samples_per_rev in climb; the final target lands exactly on the
    apex. Each target sits ``standoff`` outside the surface with its z-axis
    along the inward normal and its x-axis along the up-slant tangent.
    """
    slope = 0.5 * spec.diameter / spec.height
    climb = spec.pitch / spec.samples_per_rev
    steps = math.ceil(spec.height / climb)
    targets = []
    for k in range(steps + 1):
        azimuth = 2.0 * math.pi * k / spec.samples_per_rev
        z = min(k * climb, spec.height)
        normal = cone_outward_normal(spec, azimuth)
        position = cone_surface_point(spec, azimuth, z) + spec.standoff * normal
        tangent_up = np.array(
            [-slope * math.cos(azimuth), -slope * math.sin(azimuth), 1.0]
        )
        tangent_up /= np.linalg.norm(tangent_up)
        rotation = np.column_stack(
            [tangent_up, np.cross(-normal, tangent_up), -normal]
        )
        targets.append(ToolpathTarget(k=k, pose=make_pose(rotation, position)))
    return Toolpath(targets=tuple(targets))


def assign_adhoc_orientation(path: Toolpath) -> Toolpath:
    """Pin each target's free spin by aligning its x-axis with the workpiece x.

    The workpiece-frame x-axis is projected onto the plane perpendicular to
    the target's approach direction (which is preserved exactly); y completes
    the right-handed frame. Targets whose approach direction is parallel to
    the workpiece x fall back to projecting the workpiece y-axis instead, and
    their indices are recorded on the returned path.
    """
    new_targets = []
    fallbacks = []
    for target in path.targets:
        z_axis = target.pose[:3, 2]
        x_ref = np.array([1.0, 0.0, 0.0])
        projected = x_ref - np.dot(x_ref, z_axis) * z_axis
        norm = np.linalg.norm(projected)
        if norm < 1e-9:
            y_ref = np.array([0.0, 1.0, 0.0])
            projected = y_ref - np.dot(y_ref, z_axis) * z_axis
            norm = np.linalg.norm(projected)
            if norm < 1e-9:
                raise DegenerateProjection(
                    f"target {target.k}: no workpiece axis projects onto the tool plane"
                )
            fallbacks.append(target.k)
        x_axis = projected / norm
        rotation = np.column_stack([x_axis, np.cross(z_axis, x_axis), z_axis])
        new_targets.append(
            ToolpathTarget(k=target.k, pose=make_pose(rotation, target.pose[:3, 3]))
        )
    return Toolpath(
        targets=tuple(new_targets),
        frame=path.frame,
        orientation_fallbacks=tuple(fallbacks),
    )


def _pose_from_record(record: dict, where: str) -> np.ndarray:
    try:
        position = np.asarray(record["pos_mm"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: bad or missing pos_mm: {exc}") from exc
    if position.shape != (3,):
        raise ParseError(f"{where}: pos_mm must have 3 components")
    if "quat" in record:
        quat = np.asarray(record["quat"], dtype=float)
        if quat.shape != (4,):
            raise ParseError(f"{where}: quat must have 4 components")
        norm = float(np.linalg.norm(quat))
        if abs(norm - 1.0) > 1e-6:
            raise InvalidRotation(f"{where}: quaternion norm {norm} deviates from 1")
        rotation = quat_to_rot(quat / norm)
    elif "rot" in record:
        rotation = np.asarray(record["rot"], dtype=float)
        if rotation.shape != (3, 3):
            raise ParseError(f"{where}: rot must be a 3x3 matrix")
        if not is_rotation(rotation, tol=1e-6):
            raise InvalidRotation(f"{where}: rot is not orthonormal with det +1")
    else:
        raise ParseError(f"{where}: record needs a quat or rot field")
    return make_pose(rotation, position)


def _load_json(path: Path) -> Toolpath:
    text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be an object")
    records = raw.get("targets")
    if not records:
        raise ParseError(f"{path}: no targets")
    targets = []
    for i, record in enumerate(records):
        pose = _pose_from_record(record, f"{path}: target record {i}")
        k = record.get("k", i)
        targets.append(ToolpathTarget(k=int(k), pose=pose))
    frame_rec = raw.get("frame")
    frame = _pose_from_record(frame_rec, f"{path}: frame") if frame_rec else np.eye(4)
    try:
        return Toolpath(targets=tuple(targets), frame=frame)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


_CSV_COLUMNS = ["k", "x_mm", "y_mm", "z_mm", "qx", "qy", "qz", "qw"]


def _load_csv(path: Path) -> Toolpath:
    targets = []
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: empty file")
        missing = [c for c in _CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ParseError(f"{path}: missing columns {missing}")
        for line_no, row in enumerate(reader, start=2):
            where = f"{path}: line {line_no}"
            try:
                record = {
                    "pos_mm": [row["x_mm"], row["y_mm"], row["z_mm"]],
                    "quat": [row["qx"], row["qy"], row["qz"], row["qw"]],
                }
                k = int(row["k"])
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{where}: {exc}") from exc
            targets.append(ToolpathTarget(k=k, pose=_pose_from_record(record, where)))
    if not targets:
        raise ParseError(f"{path}: no targets")
    try:
        return Toolpath(targets=tuple(targets))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_toolpath(path: str | Path) -> Toolpath:
    """Read a toolpath file; JSON by default, CSV for a ``.csv`` suffix."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _load_csv(path)
    return _load_json(path)


def toolpath_to_dict(path: Toolpath) -> dict:
    out = {
        "frame": {
            "pos_mm": path.frame[:3, 3].tolist(),
            "quat": rot_to_quat(path.frame[:3, :3]).tolist(),
        },
        "targets": [
            {
                "k": t.k,
                "pos_mm": t.pose[:3, 3].tolist(),
                "quat": rot_to_quat(t.pose[:3, :3]).tolist(),
            }
            for t in path.targets
        ],
    }
    if path.orientation_fallbacks:
        out["orientation_fallbacks"] = list(path.orientation_fallbacks)
    return out


def save_toolpath(path: Toolpath, file: str | Path) -> None:
    Path(file).write_text(json.dumps(toolpath_to_dict(path), indent=1, sort_keys=True))
