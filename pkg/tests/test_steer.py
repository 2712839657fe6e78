"""Tests for filter banks, steering coefficients and the steerable model."""

import dataclasses

import numpy as np
import pytest

from steerable_spheres.conformal import activation, embed_point, normalize_sphere, sphere_from_geometry
from steerable_spheres.data import Dataset
from steerable_spheres.errors import DegenerateScale, SchemaMismatch, ShapeMismatch
from steerable_spheres.geom3d import check_rotation, lift5, rotate_cloud, sample_rotation
from steerable_spheres.mlgp import MLGPParams, mlgp_forward_batch
from steerable_spheres.steer import (
    BASIS_M,
    TETRA_VERTICES,
    SteerableModel,
    bank_forward,
    build_filter_bank,
    build_steerable,
    derives_from,
    interp_coeffs,
    rotation_from_rep,
    rotation_rep_V,
    set_rotation,
    steer_activation,
    steerable_forward,
    steerable_forward_batch,
    steerable_hidden,
    tetra_rotation,
)

SPHERES = [
    2.5 * sphere_from_geometry([0.3, -1.2, 0.8], 1.1),
    -0.7 * sphere_from_geometry([-2.0, 0.5, 0.1], 0.4),
    1.0 * sphere_from_geometry([0.0, 0.0, 0.0], 1.0),
    0.4 * sphere_from_geometry([-1.0, -1.0, -1.0], 2.0),
]


def test_basis_is_a_proper_orthogonal_matrix_of_tetrahedron_vertices() -> None:
    """M is orthogonal with determinant +1 and its columns are (vertex, 1)/2."""
    np.testing.assert_allclose(BASIS_M.T @ BASIS_M, np.eye(4), atol=1e-15)
    assert np.linalg.det(BASIS_M) == pytest.approx(1.0)
    for i, v in enumerate(TETRA_VERTICES):
        np.testing.assert_array_equal(BASIS_M[:, i], 0.5 * np.append(v, 1.0))


def test_tetra_rotations_reach_each_vertex() -> None:
    """R_Ti takes (1, 1, 1) to vertex i and R_T0 is the identity."""
    np.testing.assert_array_equal(tetra_rotation(0), np.eye(3))
    for i in range(4):
        r = check_rotation(tetra_rotation(i))
        np.testing.assert_allclose(r @ TETRA_VERTICES[0], TETRA_VERTICES[i], atol=1e-14)
    with pytest.raises(ValueError):
        tetra_rotation(4)


@pytest.mark.parametrize("sphere", SPHERES)
def test_bank_rows_are_rotated_copies_of_the_normalized_sphere(sphere: np.ndarray) -> None:
    """Row 0 is the normalized sphere and the last two columns never change."""
    bank = build_filter_bank(sphere)
    gamma, normalized = normalize_sphere(sphere)
    assert bank.gamma == gamma
    np.testing.assert_allclose(bank.matrix[0], normalized, atol=1e-14)
    np.testing.assert_array_equal(bank.b2, np.tile(normalized[3:], (4, 1)))
    assert bank.b3.shape == (4, 3)


def test_center_at_origin_uses_identity_origin_rotation() -> None:
    """A sphere centered at the origin needs no alignment rotation."""
    bank = build_filter_bank(SPHERES[2])
    np.testing.assert_array_equal(bank.origin_rotation, np.eye(3))


@pytest.mark.parametrize("sphere", SPHERES)
def test_bank_is_equivariant(sphere: np.ndarray) -> None:
    """Rotating the input permutes-and-mixes bank outputs through V(R)."""
    bank = build_filter_bank(sphere)
    rng = np.random.default_rng(0)
    for _ in range(20):
        r, x = sample_rotation(rng), embed_point(rng.normal(size=3))
        np.testing.assert_allclose(
            rotation_rep_V(bank, r) @ bank_forward(bank, x), bank_forward(bank, lift5(r) @ x), atol=1e-10
        )


@pytest.mark.parametrize("sphere", SPHERES)
def test_steered_bank_reproduces_the_canonical_activation(sphere: np.ndarray) -> None:
    """gamma * v(R) . B(R X) equals the raw sphere's activation on X."""
    bank = build_filter_bank(sphere)
    rng = np.random.default_rng(1)
    for _ in range(20):
        r, x = sample_rotation(rng), embed_point(rng.normal(size=3))
        steered = steer_activation(bank, bank.gamma, interp_coeffs(bank, r), lift5(r) @ x)
        assert steered == pytest.approx(activation(x, sphere), abs=1e-9)


def test_coefficients_are_unit_vectors_summing_to_one() -> None:
    """v(R) is the first column of V(R); identity gives (1, 0, 0, 0)."""
    bank = build_filter_bank(SPHERES[0])
    np.testing.assert_allclose(interp_coeffs(bank, np.eye(3)), [1.0, 0.0, 0.0, 0.0], atol=1e-14)
    rng = np.random.default_rng(2)
    for _ in range(10):
        r = sample_rotation(rng)
        v = interp_coeffs(bank, r)
        np.testing.assert_allclose(v, rotation_rep_V(bank, r)[:, 0], atol=1e-14)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        assert v.sum() == pytest.approx(1.0, abs=1e-12)


def test_representation_round_trips_and_composes() -> None:
    """The rotation is recovered from V, and V respects composition."""
    bank = build_filter_bank(SPHERES[1])
    rng = np.random.default_rng(3)
    for _ in range(10):
        r1, r2 = sample_rotation(rng), sample_rotation(rng)
        np.testing.assert_allclose(rotation_from_rep(bank, rotation_rep_V(bank, r1)), r1, atol=1e-12)
        np.testing.assert_allclose(
            rotation_rep_V(bank, r1 @ r2), rotation_rep_V(bank, r1) @ rotation_rep_V(bank, r2), atol=1e-12
        )


def test_build_steerable_has_one_bank_per_sphere(tetris: Dataset, tetris_ancestor: MLGPParams) -> None:
    """H*K banks, default coefficients, and the ancestor's logits on canonical input."""
    model = build_steerable(tetris_ancestor)
    assert model.banks.shape == (5, 4, 4, 5)
    np.testing.assert_array_equal(model.coeffs[..., 0], 1.0)
    np.testing.assert_array_equal(model.coeffs[..., 1:], 0.0)
    np.testing.assert_allclose(
        steerable_forward_batch(model, tetris.points).logits,
        mlgp_forward_batch(tetris_ancestor, tetris.points).logits,
        atol=1e-9,
    )
    assert derives_from(model, tetris_ancestor)


def test_known_rotation_restores_ancestor_logits(tetris: Dataset, tetris_ancestor: MLGPParams) -> None:
    """Steered to R, the model on rotated clouds matches the ancestor on canonical ones."""
    model = build_steerable(tetris_ancestor)
    reference = mlgp_forward_batch(tetris_ancestor, tetris.points)
    rng = np.random.default_rng(4)
    for _ in range(10):
        r = sample_rotation(rng)
        rotated = rotate_cloud(r, tetris.points)
        steered = set_rotation(model, r)
        np.testing.assert_allclose(steerable_hidden(steered, rotated), reference.hidden_pre, atol=1e-9)
        np.testing.assert_allclose(steerable_forward_batch(steered, rotated).logits, reference.logits, atol=1e-9)
        single = steerable_forward(steered, rotated[2])
        np.testing.assert_allclose(single.logits, reference.logits[2], atol=1e-9)


def test_ancestor_alone_is_not_rotation_invariant(tetris: Dataset, tetris_ancestor: MLGPParams) -> None:
    """Without steering, rotated input changes the ancestor's hidden vectors."""
    r = sample_rotation(np.random.default_rng(5))
    before = mlgp_forward_batch(tetris_ancestor, tetris.points).hidden_pre
    after = mlgp_forward_batch(tetris_ancestor, rotate_cloud(r, tetris.points)).hidden_pre
    assert np.max(np.abs(before - after)) > 1e-3


def test_steering_to_the_wrong_rotation_does_not_restore_the_ancestor(
    tetris: Dataset, tetris_ancestor: MLGPParams
) -> None:
    """Coefficients for a different rotation leave a large hidden-vector error."""
    model = build_steerable(tetris_ancestor)
    rng = np.random.default_rng(7)
    r, wrong = sample_rotation(rng), sample_rotation(rng)
    rotated = rotate_cloud(r, tetris.points)
    reference = mlgp_forward_batch(tetris_ancestor, tetris.points).hidden_pre
    right = steerable_hidden(set_rotation(model, r), rotated)
    np.testing.assert_allclose(right, reference, atol=1e-9)
    assert np.max(np.abs(steerable_hidden(set_rotation(model, wrong), rotated) - reference)) > 1e-3


def test_set_rotation_rejects_non_rotations(tetris_ancestor: MLGPParams) -> None:
    model = build_steerable(tetris_ancestor)
    with pytest.raises(ValueError):
        set_rotation(model, 2.0 * np.eye(3))
    with pytest.raises(ValueError):
        set_rotation(model, np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ShapeMismatch):
        set_rotation(model, np.eye(4))


def test_build_steerable_is_bitwise_deterministic(tetris_ancestor: MLGPParams) -> None:
    """Two builds from one ancestor give identical banks and rotations."""
    first, second = build_steerable(tetris_ancestor), build_steerable(tetris_ancestor)
    np.testing.assert_array_equal(first.banks, second.banks)
    np.testing.assert_array_equal(first.origin_rotations, second.origin_rotations)
    np.testing.assert_array_equal(first.gammas, second.gammas)
    np.testing.assert_array_equal(first.coeffs, second.coeffs)


def test_set_rotation_matches_per_bank_coefficients(tetris_ancestor: MLGPParams) -> None:
    """The vectorized update equals interp_coeffs bank by bank."""
    model = build_steerable(tetris_ancestor)
    r = sample_rotation(np.random.default_rng(6))
    steered = set_rotation(model, r)
    for h in range(model.hidden_units):
        for k in range(model.points_per_shape):
            np.testing.assert_allclose(steered.coeffs[h, k], interp_coeffs(model.bank(h, k), r), atol=1e-14)
    np.testing.assert_array_equal(model.coeffs[..., 0], 1.0)


def test_degenerate_sphere_reports_its_location(tetris_ancestor: MLGPParams) -> None:
    """A zero scale names the hidden unit and point of the offending sphere."""
    hidden = tetris_ancestor.hidden.copy()
    hidden[1, 2, 4] = 0.0
    broken = dataclasses.replace(tetris_ancestor, hidden=hidden)
    with pytest.raises(DegenerateScale) as info:
        build_steerable(broken)
    assert info.value.location == (1, 2)
    assert "hidden unit 1, point 2" in str(info.value)


def test_model_arrays_are_read_only_and_validated(tetris_ancestor: MLGPParams) -> None:
    """Steerable arrays cannot be mutated in place and must fit together."""
    model = build_steerable(tetris_ancestor)
    with pytest.raises(ValueError):
        model.coeffs[0, 0, 0] = 2.0
    with pytest.raises(SchemaMismatch):
        dataclasses.replace(model, coeffs=model.coeffs[:, :3])
    assert isinstance(model, SteerableModel)


def test_derives_from_detects_a_different_ancestor(tetris_ancestor: MLGPParams) -> None:
    """A changed output layer or hidden sphere breaks the link."""
    model = build_steerable(tetris_ancestor)
    output = tetris_ancestor.output.copy()
    output[0, 0] += 1.0
    assert not derives_from(model, dataclasses.replace(tetris_ancestor, output=output))
    hidden = tetris_ancestor.hidden.copy()
    hidden[0, 0, 0] += 0.1
    assert not derives_from(model, dataclasses.replace(tetris_ancestor, hidden=hidden))
