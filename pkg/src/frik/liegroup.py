"""Rigid-body math: rotations, homogeneous transforms, twists, exp/log maps.

Conventions, fixed project-wide:

- Poses are 4x4 homogeneous transforms (rotation matrix + translation in mm).
- Twists are 6-vectors packed ``[linear; angular]`` (mm, rad).
- ``twist_rotation(Rd)`` re-expresses base-frame twists in the frame whose
  rotation is ``Rd``, i.e. both diagonal blocks carry ``Rd.T``.
"""

from __future__ import annotations

import numpy as np

from .errors import RotationNearPi

# Below this angle (rad) trig ratios switch to their Taylor expansions.
SMALL_ANGLE = 1e-6

# Log map is refused within this margin of pi, where it is non-unique.
PI_MARGIN = 1e-6


def skew(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric cross-product matrix of a 3-vector."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def unskew(m: np.ndarray) -> np.ndarray:
    """Extract the 3-vector from a skew-symmetric matrix."""
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def make_pose(rotation: np.ndarray, translation: np.ndarray) -> np.ndarray:
    """Assemble a 4x4 homogeneous transform from a 3x3 rotation and 3-vector."""
    pose = np.eye(4)
    pose[:3, :3] = rotation
    pose[:3, 3] = translation
    return pose


def pose_inverse(pose: np.ndarray) -> np.ndarray:
    """Analytic inverse of a homogeneous transform."""
    rot_t = pose[:3, :3].T
    inv = np.eye(4)
    inv[:3, :3] = rot_t
    inv[:3, 3] = -rot_t @ pose[:3, 3]
    return inv


def is_rotation(matrix: np.ndarray, tol: float = 1e-10) -> bool:
    """True if ``matrix`` is orthonormal with determinant +1 within ``tol``."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (3, 3):
        return False
    if not np.allclose(matrix.T @ matrix, np.eye(3), atol=tol):
        return False
    return abs(np.linalg.det(matrix) - 1.0) <= tol


def so3_exp(omega: np.ndarray) -> np.ndarray:
    """Rotation matrix from a rotation vector (Rodrigues' formula)."""
    theta = np.linalg.norm(omega)
    k = skew(omega)
    if theta < SMALL_ANGLE:
        return np.eye(3) + k + 0.5 * (k @ k)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * k + b * (k @ k)


def so3_log(rotation: np.ndarray) -> np.ndarray:
    """Rotation vector of a rotation matrix.

    Raises RotationNearPi within PI_MARGIN of a half-turn, where the axis
    sign is ambiguous.
    """
    trace = rotation[0, 0] + rotation[1, 1] + rotation[2, 2]
    theta = np.arccos(np.clip(0.5 * (trace - 1.0), -1.0, 1.0))
    if theta >= np.pi - PI_MARGIN:
        raise RotationNearPi(f"rotation angle {theta:.9f} rad is within {PI_MARGIN} of pi")
    vee = unskew(rotation - rotation.T) * 0.5
    if theta < SMALL_ANGLE:
        return vee
    return (theta / np.sin(theta)) * vee


def _v_matrix(omega: np.ndarray) -> np.ndarray:
    """Left Jacobian V of the rotation vector: translation part of exp."""
    theta = np.linalg.norm(omega)
    k = skew(omega)
    if theta < SMALL_ANGLE:
        return np.eye(3) + 0.5 * k + (k @ k) / 6.0
    t2 = theta * theta
    # 1 - cos as 2 sin^2(theta/2) avoids cancellation at small angles
    half_sin = np.sin(0.5 * theta)
    a = 2.0 * half_sin * half_sin / t2
    b = (theta - np.sin(theta)) / (t2 * theta)
    return np.eye(3) + a * k + b * (k @ k)


def _v_inverse(omega: np.ndarray) -> np.ndarray:
    """Inverse of the left Jacobian V, valid away from 2*pi."""
    theta = np.linalg.norm(omega)
    k = skew(omega)
    if theta < SMALL_ANGLE:
        return np.eye(3) - 0.5 * k + (k @ k) / 12.0
    # (1 - (theta/2) cot(theta/2)) / theta^2, stable down to SMALL_ANGLE
    half = 0.5 * theta
    c = (1.0 - half * np.cos(half) / np.sin(half)) / (theta * theta)
    return np.eye(3) - 0.5 * k + c * (k @ k)


def se3_exp(xi: np.ndarray) -> np.ndarray:
    """Pose reached by flowing along a twist for unit time."""
    xi = np.asarray(xi, dtype=float)
    linear, angular = xi[:3], xi[3:]
    return make_pose(so3_exp(angular), _v_matrix(angular) @ linear)


def se3_log(pose: np.ndarray) -> np.ndarray:
    """Twist whose exp reconstructs ``pose``; packed ``[linear; angular]``.

    Raises RotationNearPi when the rotation angle is within PI_MARGIN of pi.
    """
    angular = so3_log(pose[:3, :3])
    linear = _v_inverse(angular) @ pose[:3, 3]
    return np.concatenate([linear, angular])


def twist_rotation(rd: np.ndarray) -> np.ndarray:
    """6x6 block-diagonal twist transform for a target-frame rotation ``rd``.

    Applying the result to a base-frame twist yields the same twist with both
    3-vector halves expressed along the target frame's axes, hence the blocks
    are ``rd.T``. Off-diagonal blocks are exactly zero.
    """
    block = rd.T
    out = np.zeros((6, 6))
    out[:3, :3] = block
    out[3:, 3:] = block
    return out


def quat_to_rot(quat: np.ndarray) -> np.ndarray:
    """Rotation matrix from a unit quaternion ``(x, y, z, w)``."""
    x, y, z, w = quat
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def rot_to_quat(rotation: np.ndarray) -> np.ndarray:
    """Unit quaternion ``(x, y, z, w)`` of a rotation matrix (Shepperd's method)."""
    r = rotation
    trace = r[0, 0] + r[1, 1] + r[2, 2]
    if trace > 0:
        s = 2.0 * np.sqrt(trace + 1.0)
        w = 0.25 * s
        x = (r[2, 1] - r[1, 2]) / s
        y = (r[0, 2] - r[2, 0]) / s
        z = (r[1, 0] - r[0, 1]) / s
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = 2.0 * np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2])
        w = (r[2, 1] - r[1, 2]) / s
        x = 0.25 * s
        y = (r[0, 1] + r[1, 0]) / s
        z = (r[0, 2] + r[2, 0]) / s
    elif r[1, 1] > r[2, 2]:
        s = 2.0 * np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2])
        w = (r[0, 2] - r[2, 0]) / s
        x = (r[0, 1] + r[1, 0]) / s
        y = 0.25 * s
        z = (r[1, 2] + r[2, 1]) / s
    else:
        s = 2.0 * np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1])
        w = (r[1, 0] - r[0, 1]) / s
        x = (r[0, 2] + r[2, 0]) / s
        y = (r[1, 2] + r[2, 1]) / s
        z = 0.25 * s
    quat = np.array([x, y, z, w])
    return quat / np.linalg.norm(quat)
