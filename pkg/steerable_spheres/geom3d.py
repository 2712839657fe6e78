"""Rotation machinery in 3D.

Rotations are plain ``(3, 3)`` float arrays. This module builds them
(geodesic rotations between directions, Haar-uniform samples), applies them
to point clouds, and lifts them to the ``(4, 4)`` projective and ``(5, 5)``
conformal representations by appending ones to the diagonal.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

from .constants import EPS
from .errors import DegenerateDirection, ShapeMismatch

ROTATION_TOL = 1e-12
# Below this |a x b| the axis is roundoff and opposite directions get a half turn.
HALF_TURN_TOL = 1e-13


def check_rotation(m: np.ndarray, tol: float = ROTATION_TOL) -> np.ndarray:
    """Validate that ``m`` is a proper rotation and return it as a float array.

    Raises:
        ShapeMismatch: If ``m`` is not 3x3.
        ValueError: If ``m`` is not orthogonal or has determinant other than +1.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        raise ShapeMismatch(f"Rotation must be 3x3, got shape {m.shape}.")
    if not np.allclose(m.T @ m, np.eye(3), rtol=0.0, atol=tol):
        raise ValueError("Rotation matrix is not orthogonal.")
    if abs(np.linalg.det(m) - 1.0) > tol:
        raise ValueError("Rotation matrix must have determinant +1.")
    return m


def lift4(r: np.ndarray) -> np.ndarray:
    """Return ``diag(r, 1)``, the projective representation of ``r``."""
    out = np.eye(4)
    out[:3, :3] = r
    return out


def lift5(r: np.ndarray) -> np.ndarray:
    """Return ``diag(r, 1, 1)``, the conformal representation of ``r``."""
    out = np.eye(5)
    out[:3, :3] = r
    return out


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def geodesic_rotation(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Return the minimal-angle rotation taking ``source`` onto ``target``.

    Rodrigues' formula with axis ``source x target`` and angle
    ``atan2(|source x target|, source . target)``. The normalized axis is
    projected off both directions once more before use. Opposite inputs
    (``|a x b|`` at roundoff level) get a half turn about ``source x e``, where ``e`` is the
    standard basis vector least aligned with ``source``.

    Args:
        source: Direction to rotate from; only its direction matters.
        target: Direction to rotate to.

    Returns:
        A 3x3 rotation ``R`` with ``R @ source/|source| == target/|target|``.

    Raises:
        DegenerateDirection: If either vector has norm <= ``EPS``.
    """
    a = np.asarray(source, dtype=np.float64)
    b = np.asarray(target, dtype=np.float64)
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a <= EPS or norm_b <= EPS:
        raise DegenerateDirection(
            f"Cannot rotate between directions with norms {norm_a:g} and {norm_b:g}."
        )
    a = a / norm_a
    b = b / norm_b

    cross = np.cross(a, b)
    sin = float(np.linalg.norm(cross))
    cos = float(np.dot(a, b))

    if sin <= HALF_TURN_TOL and cos < 0.0:
        helper = np.zeros(3)
        helper[int(np.argmin(np.abs(a)))] = 1.0
        axis = np.cross(a, helper)
        axis /= np.linalg.norm(axis)
        return 2.0 * np.outer(axis, axis) - np.eye(3)
    if sin == 0.0:
        return np.eye(3)

    axis = cross / sin
    axis -= (axis @ a) * a
    axis -= (axis @ b) * b
    axis /= np.linalg.norm(axis)
    k = _skew(axis)
    angle = np.arctan2(sin, cos)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def sample_rotation(rng: np.random.Generator) -> np.ndarray:
    """Draw a Haar-uniform rotation from a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    return Rotation.from_quat(q).as_matrix()


def rotate_cloud(r: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Rotate every point of an ``(..., 3)`` array by ``r``."""
    points = np.asarray(points, dtype=np.float64)
    if points.shape[-1] != 3:
        raise ShapeMismatch(f"Points must have 3 coordinates, got shape {points.shape}.")
    return points @ np.asarray(r).T
