"""Tests for the conformal embedding of points and spheres."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from steerable_spheres.conformal import (
    activation,
    embed_point,
    embed_vector,
    normalize_sphere,
    sphere_from_geometry,
    sphere_geometry,
)
from steerable_spheres.errors import DegenerateScale, ShapeMismatch
from steerable_spheres.geom3d import lift5, sample_rotation

points = arrays(np.float64, 3, elements=st.floats(-5.0, 5.0, allow_nan=False))
radii = st.floats(0.1, 5.0)


@given(points, points, radii)
def test_activation_is_half_signed_squared_distance(x: np.ndarray, c: np.ndarray, r: float) -> None:
    """X . S equals (r^2 - |x - c|^2) / 2."""
    expected = 0.5 * (r * r - np.sum((x - c) ** 2))
    np.testing.assert_allclose(activation(embed_point(x), sphere_from_geometry(c, r)), expected, atol=1e-10)


def test_activation_sign_marks_inside_surface_and_outside() -> None:
    """Positive inside the sphere, zero on it, negative outside."""
    s = sphere_from_geometry([1.0, 0.0, 0.0], 2.0)
    assert activation(embed_point([1.0, 0.5, 0.0]), s) > 0.0
    assert activation(embed_point([3.0, 0.0, 0.0]), s) == pytest.approx(0.0, abs=1e-12)
    assert activation(embed_point([1.0, 0.0, 5.0]), s) < 0.0


def test_embedding_layout() -> None:
    """Points and vectors get the (x, -1, -|x|^2/2) tail and batch over leading axes."""
    np.testing.assert_array_equal(embed_point([1.0, 2.0, 2.0]), [1.0, 2.0, 2.0, -1.0, -4.5])
    np.testing.assert_array_equal(embed_vector([3.0, 4.0]), [3.0, 4.0, -1.0, -12.5])
    assert embed_point(np.zeros((2, 4, 3))).shape == (2, 4, 5)
    with pytest.raises(ShapeMismatch):
        embed_point([1.0, 2.0])


def test_rotation_preserves_activation() -> None:
    """Rotating both the point and the sphere leaves the activation unchanged."""
    rng = np.random.default_rng(7)
    for _ in range(20):
        r, x = sample_rotation(rng), rng.normal(size=3)
        s = 1.7 * sphere_from_geometry(rng.normal(size=3), 0.8)
        np.testing.assert_allclose(
            activation(embed_point(r @ x), lift5(r) @ s), activation(embed_point(x), s), atol=1e-10
        )


def test_normalize_splits_scale_from_sphere() -> None:
    """A scaled sphere normalizes back with its scale split off."""
    s = sphere_from_geometry([0.5, -1.0, 2.0], 1.5)
    gamma, normalized = normalize_sphere(-3.0 * s)
    assert gamma == -3.0
    assert normalized[4] == 1.0
    np.testing.assert_allclose(normalized, s, rtol=1e-14)
    np.testing.assert_allclose(gamma * normalized, -3.0 * s, rtol=1e-14)


def test_normalize_rejects_vanishing_scale_and_bad_shape() -> None:
    """A sphere with zero last component is a plane; wrong lengths are rejected."""
    with pytest.raises(DegenerateScale):
        normalize_sphere([1.0, 2.0, 3.0, 4.0, 0.0])
    with pytest.raises(DegenerateScale):
        normalize_sphere([1e6, 0.0, 0.0, 0.0, 1e-4])
    with pytest.raises(ShapeMismatch):
        normalize_sphere([1.0, 2.0, 3.0, 1.0])


def test_sphere_geometry_recovers_center_and_radius() -> None:
    """Center and squared radius come back from a raw sphere."""
    geometry = sphere_geometry(0.25 * sphere_from_geometry([1.0, 2.0, -1.0], 3.0))
    np.testing.assert_allclose(geometry.center, [1.0, 2.0, -1.0], rtol=1e-14)
    assert geometry.radius_sq == pytest.approx(9.0, rel=1e-12)


def test_imaginary_sphere_has_negative_squared_radius() -> None:
    """A sphere whose fourth entry exceeds |c|^2/2 is imaginary but valid."""
    geometry = sphere_geometry([0.0, 0.0, 0.0, 1.0, 1.0])
    assert geometry.radius_sq == pytest.approx(-2.0)
