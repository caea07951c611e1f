"""DH-parameterized serial chain: forward kinematics, Jacobian, kinematic Hessian.

All joints are revolute. Lengths are mm, angles rad. The geometric Jacobian
maps joint rates to the twist ``[tcp linear velocity; angular velocity]`` in
the base frame, with the linear part taken about the TCP point. The kinematic
Hessian is the 6 x n x n tensor of Jacobian partials, ``H[:, :, j] = dJ/dq_j``,
built from cross products of the Jacobian's own column data rather than by
finite differences.

Cross products are spelled out component-wise here: solver iterations call
these functions in a tight loop and ``np.cross`` spends more time shuffling
axes than multiplying at this size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, ParseError
from .liegroup import is_rotation


@dataclass(frozen=True)
class DHRow:
    """One link's parameters: a (mm), alpha (rad), d (mm), theta_offset (rad)."""

    a: float
    alpha: float
    d: float
    theta_offset: float = 0.0


@dataclass(frozen=True)
class RobotModel:
    """Immutable serial-chain description: DH rows, joint limits, tool transform.

    ``convention`` selects where each row's joint rotation acts: "standard"
    (distal) rows are Rz(theta) Tz(d) Tx(a) Rx(alpha); "modified" (proximal,
    Craig) rows are Rx(alpha) Tx(a) Rz(theta) Tz(d).
    """

    dh: tuple[DHRow, ...]
    joint_min: np.ndarray
    joint_max: np.ndarray
    tool: np.ndarray = field(default_factory=lambda: np.eye(4))
    convention: str = "standard"
    name: str = "robot"

    def __post_init__(self):
        object.__setattr__(self, "dh", tuple(self.dh))
        object.__setattr__(self, "joint_min", np.asarray(self.joint_min, dtype=float))
        object.__setattr__(self, "joint_max", np.asarray(self.joint_max, dtype=float))
        object.__setattr__(self, "tool", np.asarray(self.tool, dtype=float))
        n = len(self.dh)
        if n < 1:
            raise ValueError("model needs at least one joint")
        if self.joint_min.shape != (n,) or self.joint_max.shape != (n,):
            raise DimensionMismatch(f"joint limits must have length {n}")
        if not np.all(self.joint_min < self.joint_max):
            raise ValueError("joint_min must be strictly below joint_max elementwise")
        if self.convention not in ("standard", "modified"):
            raise ValueError(f"unknown DH convention {self.convention!r}")
        if self.tool.shape != (4, 4):
            raise DimensionMismatch("tool transform must be 4x4")
        object.__setattr__(
            self,
            "_row_constants",
            tuple(
                (r.a, r.d, r.theta_offset, math.cos(r.alpha), math.sin(r.alpha))
                for r in self.dh
            ),
        )
        if self.convention == "modified":
            object.__setattr__(
                self,
                "_modified_prefixes",
                tuple(_modified_prefix(r) for r in self.dh),
            )

    @property
    def n(self) -> int:
        return len(self.dh)

    def reach_bound(self) -> float:
        """Conservative radius (mm) that no reachable TCP point can exceed."""
        span = sum(abs(r.a) + abs(r.d) for r in self.dh)
        return span + float(np.linalg.norm(self.tool[:3, 3]))

    def within_limits(self, q: np.ndarray) -> bool:
        return bool(np.all(q >= self.joint_min) and np.all(q <= self.joint_max))

    def midrange(self) -> np.ndarray:
        return 0.5 * (self.joint_min + self.joint_max)


def _modified_prefix(row: DHRow) -> np.ndarray:
    """Fixed part Rx(alpha) Tx(a) preceding the joint rotation (modified rows)."""
    ca, sa = np.cos(row.alpha), np.sin(row.alpha)
    return np.array(
        [
            [1.0, 0.0, 0.0, row.a],
            [0.0, ca, -sa, 0.0],
            [0.0, sa, ca, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def _fill_standard_dh(out: np.ndarray, a, d, ca, sa, theta: float) -> None:
    """Write Rz(theta) Tz(d) Tx(a) Rx(alpha) into a preallocated 4x4."""
    ct = math.cos(theta)
    st = math.sin(theta)
    out[0, 0] = ct
    out[0, 1] = -st * ca
    out[0, 2] = st * sa
    out[0, 3] = a * ct
    out[1, 0] = st
    out[1, 1] = ct * ca
    out[1, 2] = -ct * sa
    out[1, 3] = a * st
    out[2, 1] = sa
    out[2, 2] = ca
    out[2, 3] = d


def _fill_modified_joint(out: np.ndarray, d, theta: float) -> None:
    """Write Rz(theta) Tz(d) into a preallocated 4x4."""
    ct = math.cos(theta)
    st = math.sin(theta)
    out[0, 0] = ct
    out[0, 1] = -st
    out[1, 0] = st
    out[1, 1] = ct
    out[2, 3] = d


def chain_frames(model: RobotModel, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """TCP pose plus each joint's rotation axis and origin in the base frame.

    Returns ``(tcp, axes, origins)`` with ``axes``/``origins`` of shape (n, 3).
    This single chain walk backs forward_kinematics, the Jacobian and the
    Hessian, so solver iterations pay for it once.
    """
    q = np.asarray(q, dtype=float)
    n = model.n
    if q.shape != (n,):
        raise DimensionMismatch(f"expected q of length {n}, got shape {q.shape}")
    axes = np.empty((n, 3))
    origins = np.empty((n, 3))
    t = np.eye(4)
    spare = np.empty((4, 4))
    link = np.zeros((4, 4))
    link[3, 3] = 1.0
    if model.convention == "standard":
        for i, (a, d, offset, ca, sa) in enumerate(model._row_constants):
            axes[i, 0] = t[0, 2]
            axes[i, 1] = t[1, 2]
            axes[i, 2] = t[2, 2]
            origins[i, 0] = t[0, 3]
            origins[i, 1] = t[1, 3]
            origins[i, 2] = t[2, 3]
            _fill_standard_dh(link, a, d, ca, sa, q[i] + offset)
            np.matmul(t, link, out=spare)
            t, spare = spare, t
    else:
        link[2, 2] = 1.0
        for i, ((a, d, offset, ca, sa), prefix) in enumerate(
            zip(model._row_constants, model._modified_prefixes)
        ):
            np.matmul(t, prefix, out=spare)
            t, spare = spare, t
            axes[i, 0] = t[0, 2]
            axes[i, 1] = t[1, 2]
            axes[i, 2] = t[2, 2]
            origins[i, 0] = t[0, 3]
            origins[i, 1] = t[1, 3]
            origins[i, 2] = t[2, 3]
            _fill_modified_joint(link, d, q[i] + offset)
            np.matmul(t, link, out=spare)
            t, spare = spare, t
    return t @ model.tool, axes, origins


def forward_kinematics(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Base-to-TCP pose: the DH chain product composed with the tool transform."""
    tcp, _, _ = chain_frames(model, q)
    return tcp


def _cross_rows(a: np.ndarray, b: np.ndarray, out: np.ndarray) -> np.ndarray:
    """Row-wise cross product for (..., 3) arrays without np.cross overhead."""
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    out[..., 0] = a1 * b2 - a2 * b1
    out[..., 1] = a2 * b0 - a0 * b2
    out[..., 2] = a0 * b1 - a1 * b0
    return out


def jacobian_from_frames(p_tcp: np.ndarray, axes: np.ndarray, origins: np.ndarray) -> np.ndarray:
    n = axes.shape[0]
    lever = p_tcp - origins
    j = np.empty((6, n))
    _cross_rows(axes, lever, j[:3].T)
    j[3:] = axes.T
    return j


def geometric_jacobian(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """6 x n geometric Jacobian in the base frame about the TCP point.

    Column i is ``[z_{i-1} x (p_tcp - p_{i-1}); z_{i-1}]``.
    """
    tcp, axes, origins = chain_frames(model, q)
    return jacobian_from_frames(tcp[:3, 3], axes, origins)


def hessian_from_frames(p_tcp: np.ndarray, axes: np.ndarray, origins: np.ndarray) -> np.ndarray:
    n = axes.shape[0]
    v = np.empty((n, 3))
    _cross_rows(axes, p_tcp - origins, v)
    idx = np.arange(n)
    col = idx[:, None]
    der = idx[None, :]
    lo = np.minimum(col, der)
    hi = np.maximum(col, der)
    h = np.empty((6, n, n))
    # cell (i, j): linear w_min x v_max, angular w_j x w_i (zero above diagonal)
    lin = h[:3].transpose(1, 2, 0)
    ang = h[3:].transpose(1, 2, 0)
    _cross_rows(axes[lo], v[hi], lin)
    _cross_rows(axes[der], axes[col], ang)
    ang[der > col] = 0.0
    return h


def kinematic_hessian(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """6 x n x n tensor of Jacobian partials, H[:, :, j] = dJ/dq_j.

    Angular block: dw_i/dq_j = w_j x w_i for j <= i, zero for j > i.
    Linear block:  dv_i/dq_j = w_j x v_i for j <= i and w_i x v_j for j > i,
    where (v_i, w_i) are the Jacobian's column halves.
    """
    tcp, axes, origins = chain_frames(model, q)
    return hessian_from_frames(tcp[:3, 3], axes, origins)


def hessian_contract(h: np.ndarray, dq: np.ndarray) -> np.ndarray:
    """Directional Jacobian derivative: result[:, i] = sum_j H[:, i, j] dq[j]."""
    dq = np.asarray(dq, dtype=float)
    if dq.shape != (h.shape[2],):
        raise DimensionMismatch(f"expected dq of length {h.shape[2]}, got shape {dq.shape}")
    return h @ dq


def irb4600() -> RobotModel:
    """Bundled ABB IRB4600 model: DH table plus datasheet joint limits."""
    dh = (
        DHRow(a=175.0, alpha=-np.pi / 2, d=329.5, theta_offset=0.0),
        DHRow(a=900.0, alpha=0.0, d=0.0, theta_offset=-np.pi / 2),
        DHRow(a=174.56, alpha=-np.pi / 2, d=0.0, theta_offset=0.0),
        DHRow(a=0.0, alpha=-np.pi / 2, d=960.0, theta_offset=np.pi),
        DHRow(a=0.0, alpha=-np.pi / 2, d=0.0, theta_offset=np.pi),
        DHRow(a=0.0, alpha=0.0, d=135.0, theta_offset=0.0),
    )
    deg = np.pi / 180.0
    joint_min = deg * np.array([-180.0, -90.0, -180.0, -400.0, -125.0, -400.0])
    joint_max = deg * np.array([180.0, 150.0, 75.0, 400.0, 120.0, 400.0])
    return RobotModel(dh=dh, joint_min=joint_min, joint_max=joint_max, name="irb4600")


def load_robot(path: str | Path) -> RobotModel:
    """Read a robot description JSON file.

    Schema: ``dh`` (list of {a_mm, alpha_rad, d_mm, theta_rad}),
    ``joint_limits_rad`` ({min: [...], max: [...]}), ``tool`` (4x4 row-major
    array or null), ``dh_convention`` ("standard" | "modified").
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    try:
        rows = tuple(
            DHRow(
                a=float(r["a_mm"]),
                alpha=float(r["alpha_rad"]),
                d=float(r["d_mm"]),
                theta_offset=float(r.get("theta_rad", 0.0)),
            )
            for r in raw["dh"]
        )
        limits = raw["joint_limits_rad"]
        joint_min = np.asarray(limits["min"], dtype=float)
        joint_max = np.asarray(limits["max"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: bad robot description: {exc}") from exc
    tool_raw = raw.get("tool")
    if tool_raw is None:
        tool = np.eye(4)
    else:
        tool = np.asarray(tool_raw, dtype=float).reshape(4, 4)
        if not is_rotation(tool[:3, :3], tol=1e-8):
            raise ParseError(f"{path}: tool transform rotation block is not orthonormal")
    return RobotModel(
        dh=rows,
        joint_min=joint_min,
        joint_max=joint_max,
        tool=tool,
        convention=raw.get("dh_convention", "standard"),
        name=raw.get("name", path.stem),
    )


def robot_to_dict(model: RobotModel) -> dict:
    """JSON-ready form of a model, matching the robot description schema."""
    return {
        "name": model.name,
        "dh": [
            {"a_mm": r.a, "alpha_rad": r.alpha, "d_mm": r.d, "theta_rad": r.theta_offset}
            for r in model.dh
        ],
        "joint_limits_rad": {
            "min": model.joint_min.tolist(),
            "max": model.joint_max.tolist(),
        },
        "tool": None if np.array_equal(model.tool, np.eye(4)) else model.tool.tolist(),
        "dh_convention": model.convention,
    }
