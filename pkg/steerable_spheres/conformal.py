"""Conformal embedding of points and spheres into R^5.

A point ``x`` in R^3 is embedded as

    X = (x1, x2, x3, -1, -||x||^2 / 2)

and a sphere with center ``c`` and radius ``r`` as

    S = (c1, c2, c3, (||c||^2 - r^2) / 2, 1).

Their ordinary dot product is the signed squared distance

    X . S = -||x - c||^2 / 2 + r^2 / 2,

positive inside the sphere, zero on it and negative outside. Learned spheres
are stored unnormalized: any nonzero multiple of ``S`` is the same decision
surface, and the multiple (the last component) is the neuron's scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import GAMMA_MIN_FACTOR
from .errors import DegenerateScale, ShapeMismatch


@dataclass(frozen=True)
class SphereGeometry:
    """Center and squared radius of a sphere.

    ``radius_sq`` is negative for imaginary spheres, which are valid
    decision surfaces.
    """

    center: np.ndarray
    radius_sq: float


def embed_point(x: np.ndarray) -> np.ndarray:
    """Embed points of shape ``(..., 3)`` into shape ``(..., 5)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != 3:
        raise ShapeMismatch(f"Points must have 3 coordinates, got shape {x.shape}.")
    return embed_vector(x)


def embed_vector(x: np.ndarray) -> np.ndarray:
    """Embed vectors of any length n as ``(x, -1, -||x||^2 / 2)``.

    The hidden layer output of the perceptron is embedded the same way with
    n equal to the number of hidden units.
    """
    x = np.asarray(x, dtype=np.float64)
    tail = np.empty(x.shape[:-1] + (2,))
    tail[..., 0] = -1.0
    tail[..., 1] = -0.5 * np.sum(x * x, axis=-1)
    return np.concatenate((x, tail), axis=-1)


def sphere_from_geometry(center: np.ndarray, radius: float) -> np.ndarray:
    """Build the normalized sphere vector from a center and a radius."""
    c = np.asarray(center, dtype=np.float64).reshape(3)
    return np.array([c[0], c[1], c[2], 0.5 * (float(c @ c) - radius * radius), 1.0])


def activation(embedded: np.ndarray, sphere: np.ndarray) -> np.ndarray:
    """Return the scalar product of embedded points and a sphere vector.

    Broadcasts over leading axes of ``embedded``.
    """
    return np.asarray(embedded, dtype=np.float64) @ np.asarray(sphere, dtype=np.float64)


def gamma_min(sphere: np.ndarray) -> float:
    """Scale-relative threshold below which ``|s5|`` counts as zero."""
    return GAMMA_MIN_FACTOR * max(1.0, float(np.linalg.norm(sphere[:4])))


def normalize_sphere(sphere: np.ndarray) -> tuple[float, np.ndarray]:
    """Split a raw sphere into its scale and its normalized form.

    Returns:
        Tuple ``(gamma, normalized)`` with ``gamma = s5`` and
        ``normalized = sphere / s5`` whose last entry is exactly 1.

    Raises:
        DegenerateScale: If ``|s5|`` is below the scale-relative threshold.
            Such a classifier is a plane, not a sphere.
    """
    s = np.asarray(sphere, dtype=np.float64)
    if s.shape != (5,):
        raise ShapeMismatch(f"Sphere must have 5 components, got shape {s.shape}.")
    gamma = float(s[4])
    if abs(gamma) <= gamma_min(s):
        raise DegenerateScale(f"Sphere scale {gamma:g} is too small to normalize.")
    normalized = s / gamma
    normalized[4] = 1.0
    return gamma, normalized


def sphere_geometry(sphere: np.ndarray) -> SphereGeometry:
    """Recover center and squared radius from a raw or normalized sphere."""
    _, s = normalize_sphere(sphere)
    center = s[:3].copy()
    return SphereGeometry(center=center, radius_sq=float(center @ center - 2.0 * s[3]))
