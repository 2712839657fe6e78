"""Tests for rotations, lifts and geodesic rotations."""

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from steerable_spheres.errors import DegenerateDirection, ShapeMismatch
from steerable_spheres.geom3d import (
    check_rotation,
    geodesic_rotation,
    lift4,
    lift5,
    rotate_cloud,
    sample_rotation,
)

vectors = arrays(np.float64, 3, elements=st.floats(-10.0, 10.0, allow_nan=False))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


@given(vectors, vectors)
def test_geodesic_maps_source_direction_onto_target(a: np.ndarray, b: np.ndarray) -> None:
    """The geodesic rotation takes the unit source onto the unit target."""
    assume(np.linalg.norm(a) > 1e-3 and np.linalg.norm(b) > 1e-3)
    ua, ub = _unit(a), _unit(b)
    r = geodesic_rotation(a, b)
    np.testing.assert_allclose(r @ ua, ub, rtol=0.0, atol=1e-12)
    check_rotation(r, tol=1e-9)


@given(vectors, vectors, st.floats(-9.0, -6.0))
def test_geodesic_is_exact_for_nearly_opposite_directions(a: np.ndarray, p: np.ndarray, exponent: float) -> None:
    """Targets a hair away from -source still land within 1e-12."""
    assume(np.linalg.norm(a) > 1e-3 and np.linalg.norm(p) > 1e-3)
    ua = _unit(a)
    b = -ua + 10.0**exponent * _unit(p)
    r = geodesic_rotation(a, b)
    assert np.max(np.abs(r @ ua - _unit(b))) < 1e-12
    check_rotation(r, tol=1e-12)


@pytest.mark.parametrize(
    "a",
    [np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, -2.0]), np.array([1.0, 1.0, 1.0]), np.array([0.3, -2.0, 0.1])],
)
def test_antiparallel_directions_get_a_half_turn(a: np.ndarray) -> None:
    """Opposite directions are joined by a proper rotation by pi."""
    r = geodesic_rotation(a, -3.0 * a)
    np.testing.assert_allclose(r @ _unit(a), -_unit(a), atol=1e-12)
    check_rotation(r)
    np.testing.assert_allclose(np.trace(r), -1.0, atol=1e-12)


def test_parallel_directions_give_identity() -> None:
    """Equal directions need no rotation."""
    np.testing.assert_array_equal(geodesic_rotation([0.0, 2.0, 0.0], [0.0, 5.0, 0.0]), np.eye(3))


@pytest.mark.parametrize("a, b", [([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]), ([1.0, 0.0, 0.0], [0.0, 1e-12, 0.0])])
def test_degenerate_direction_raises(a, b) -> None:
    """Directions with vanishing norm are rejected."""
    with pytest.raises(DegenerateDirection):
        geodesic_rotation(a, b)


def test_lifts_are_homomorphisms() -> None:
    """Lifting commutes with composition for both lifts."""
    rng = np.random.default_rng(3)
    for _ in range(20):
        r1, r2 = sample_rotation(rng), sample_rotation(rng)
        np.testing.assert_allclose(lift4(r1 @ r2), lift4(r1) @ lift4(r2), atol=1e-12)
        np.testing.assert_allclose(lift5(r1 @ r2), lift5(r1) @ lift5(r2), atol=1e-12)
    assert lift5(np.eye(3)).shape == (5, 5)
    np.testing.assert_array_equal(lift4(r1)[3], [0.0, 0.0, 0.0, 1.0])


def test_sampled_rotations_are_valid_and_seeded() -> None:
    """Samples are proper rotations and repeat for a repeated seed."""
    a = [sample_rotation(np.random.default_rng(11)) for _ in range(2)]
    np.testing.assert_array_equal(a[0], a[1])
    rng = np.random.default_rng(0)
    for _ in range(50):
        check_rotation(sample_rotation(rng))


def test_check_rotation_rejects_reflections_and_bad_shapes() -> None:
    """Reflections, scalings and non-3x3 arrays are not rotations."""
    with pytest.raises(ValueError):
        check_rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        check_rotation(2.0 * np.eye(3))
    with pytest.raises(ShapeMismatch):
        check_rotation(np.eye(2))


def test_rotate_cloud_matches_pointwise_product() -> None:
    """Batched rotation equals rotating each point on its own."""
    rng = np.random.default_rng(5)
    r = sample_rotation(rng)
    clouds = rng.normal(size=(2, 4, 3))
    rotated = rotate_cloud(r, clouds)
    for n in range(2):
        for k in range(4):
            np.testing.assert_allclose(rotated[n, k], r @ clouds[n, k], atol=1e-14)
    with pytest.raises(ShapeMismatch):
        rotate_cloud(r, np.zeros((4, 2)))


def test_sampled_rotations_have_zero_mean_trace() -> None:
    """Under the Haar measure the trace 1 + 2cos(angle) averages to zero."""
    rng = np.random.default_rng(2024)
    traces = np.array([np.trace(sample_rotation(rng)) for _ in range(20_000)])
    assert abs(traces.mean()) < 0.05
    # The rotation angle has density (1 - cos t) / pi, so large angles dominate.
    assert np.mean(traces < 0.0) > 0.5
