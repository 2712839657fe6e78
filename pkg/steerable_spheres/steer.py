"""Spherical filter banks and the steerable model built from a frozen ancestor.

A sphere's activation under a rotated input only contains spherical
harmonics up to degree one, so four rotated copies of the sphere are enough
to steer it. The copies sit on the vertices of a regular tetrahedron:

1. ``R_O`` is the geodesic rotation taking the sphere center ``c0`` to the
   direction (1, 1, 1).
2. ``R_Ti`` takes (1, 1, 1) to tetrahedron vertex i (``R_T0 = I``).
3. Row i of the bank is ``lift5(R_O^T R_Ti R_O) S``.

For a known input rotation R the interpolation coefficients

    v(R) = M^T lift4(R_O R R_O^T) m1

weight the four bank responses so that ``v(R) . B (R X) == X . S``. ``M`` holds
half the homogeneous tetrahedron vertices as columns and ``m1`` is its first
column.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .conformal import embed_point, normalize_sphere
from .constants import EPS
from .errors import DegenerateScale, SchemaMismatch
from .geom3d import check_rotation, geodesic_rotation, lift4, lift5
from .mlgp import ForwardTrace, MLGPParams, check_cloud, check_clouds, output_layer

logger = logging.getLogger(__name__)

TETRA_VERTICES = np.array(
    [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)]
)

# Columns are (vertex, 1) / 2; orthogonal with determinant +1.
BASIS_M = 0.5 * np.array(
    [
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0, 1.0],
    ]
)

M1 = np.array([0.5, 0.5, 0.5, 0.5])


@lru_cache(maxsize=None)
def _tetra_rotations() -> tuple[np.ndarray, ...]:
    rotations = tuple(geodesic_rotation(TETRA_VERTICES[0], v) for v in TETRA_VERTICES)
    for r in rotations:
        r.setflags(write=False)
    return rotations


def tetra_rotation(i: int) -> np.ndarray:
    """Return the geodesic rotation from (1, 1, 1) to tetrahedron vertex ``i``."""
    if i not in (0, 1, 2, 3):
        raise ValueError(f"Tetrahedron vertex index must be 0..3, got {i}.")
    return _tetra_rotations()[i].copy()


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Four tetrahedron-rotated copies of one normalized sphere.

    Attributes:
        matrix: Bank ``B``, shape ``(4, 5)``; row 0 is the normalized sphere.
        origin_rotation: ``R_O``; identity when the center is at the origin.
        tetra_rotations: ``R_T0..R_T3``, shape ``(4, 3, 3)``.
        gamma: Scale split off the raw sphere before banking.
    """

    matrix: np.ndarray
    origin_rotation: np.ndarray
    tetra_rotations: np.ndarray
    gamma: float

    @property
    def b3(self) -> np.ndarray:
        """Left ``(4, 3)`` block acting on the point coordinates."""
        return self.matrix[:, :3]

    @property
    def b2(self) -> np.ndarray:
        """Right ``(4, 2)`` block; its four rows are identical."""
        return self.matrix[:, 3:]


def origin_rotation_for(center: np.ndarray) -> np.ndarray:
    """``R_O`` for a sphere center: geodesic to (1, 1, 1), identity near zero."""
    if np.linalg.norm(center) <= EPS:
        return np.eye(3)
    return geodesic_rotation(center, TETRA_VERTICES[0])


def build_filter_bank(sphere: np.ndarray) -> FilterBank:
    """Build the filter bank of a raw learned sphere.

    Raises:
        DegenerateScale: If the sphere cannot be normalized.
    """
    gamma, normalized = normalize_sphere(sphere)
    r_o = origin_rotation_for(normalized[:3])
    tetra = np.stack(_tetra_rotations())
    rows = [lift5(r_o.T @ r_t @ r_o) @ normalized for r_t in tetra]
    return FilterBank(matrix=np.array(rows), origin_rotation=r_o, tetra_rotations=tetra, gamma=gamma)


def bank_forward(bank: FilterBank, embedded: np.ndarray) -> np.ndarray:
    """Bank responses ``B X`` for embedded points of shape ``(..., 5)``."""
    return np.asarray(embedded, dtype=np.float64) @ bank.matrix.T


def rotation_rep_V(bank: FilterBank, r: np.ndarray) -> np.ndarray:
    """Representation of ``r`` acting on the bank's output space (4x4, orthogonal)."""
    r_o = lift4(bank.origin_rotation)
    return BASIS_M.T @ r_o @ lift4(r) @ r_o.T @ BASIS_M


def rotation_from_rep(bank: FilterBank, v: np.ndarray) -> np.ndarray:
    """Recover the 3D rotation from its bank-space representation."""
    r_o = lift4(bank.origin_rotation)
    return (r_o.T @ BASIS_M @ v @ BASIS_M.T @ r_o)[:3, :3]


def interp_coeffs(bank: FilterBank, r: np.ndarray) -> np.ndarray:
    """Interpolation coefficients steering the bank to input rotation ``r``.

    Equal to the first column of ``rotation_rep_V(bank, r)``; unit norm.
    """
    r_o = lift4(bank.origin_rotation)
    return BASIS_M.T @ (r_o @ lift4(r) @ r_o.T @ M1)


def steer_activation(bank: FilterBank, gamma: float, coeffs: np.ndarray, embedded_rot: np.ndarray) -> np.ndarray:
    """Steered response ``gamma * v . (B X_rot)``."""
    return gamma * (bank_forward(bank, embedded_rot) @ np.asarray(coeffs, dtype=np.float64))


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SteerableModel:
    """Steerable counterpart of an ancestor MLGP.

    Attributes:
        banks: Filter-bank matrices, shape ``(H, K, 4, 5)``.
        origin_rotations: ``R_O`` per hidden sphere, shape ``(H, K, 3, 3)``.
        gammas: Scales per hidden sphere, shape ``(H, K)``.
        output: Output spheres copied from the ancestor, shape ``(C, H + 2)``.
        coeffs: Interpolation coefficients, shape ``(H, K, 4)``; the only
            free parameters.
        class_names: Class names in label order.
        units: Length unit of the data.
    """

    banks: np.ndarray
    origin_rotations: np.ndarray
    gammas: np.ndarray
    output: np.ndarray
    coeffs: np.ndarray
    class_names: tuple[str, ...]
    units: str = "abstract"

    def __post_init__(self) -> None:
        for name in ("banks", "origin_rotations", "gammas", "output", "coeffs"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        h, k = self.gammas.shape
        if (
            self.banks.shape != (h, k, 4, 5)
            or self.origin_rotations.shape != (h, k, 3, 3)
            or self.coeffs.shape != (h, k, 4)
            or self.output.shape != (len(self.class_names), h + 2)
        ):
            raise SchemaMismatch("Steerable model arrays have inconsistent shapes.")
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def hidden_units(self) -> int:
        return self.gammas.shape[0]

    @property
    def points_per_shape(self) -> int:
        return self.gammas.shape[1]

    def bank(self, h: int, k: int) -> FilterBank:
        return FilterBank(
            matrix=self.banks[h, k].copy(),
            origin_rotation=self.origin_rotations[h, k].copy(),
            tetra_rotations=np.stack(_tetra_rotations()),
            gamma=float(self.gammas[h, k]),
        )


def build_steerable(params: MLGPParams) -> SteerableModel:
    """Freeze an ancestor and turn each hidden sphere into a filter bank.

    The output layer is copied unchanged and every coefficient vector starts
    at (1, 0, 0, 0), which reproduces the ancestor on canonical input.

    Raises:
        DegenerateScale: With the ``(h, k)`` location of the first sphere that
            cannot be normalized.
    """
    h_units, k_points = params.hidden_units, params.points_per_shape
    banks = np.empty((h_units, k_points, 4, 5))
    origins = np.empty((h_units, k_points, 3, 3))
    gammas = np.empty((h_units, k_points))
    for h in range(h_units):
        for k in range(k_points):
            try:
                bank = build_filter_bank(params.hidden[h, k])
            except DegenerateScale as exc:
                raise DegenerateScale("Hidden sphere cannot be normalized", location=(h, k)) from exc
            banks[h, k] = bank.matrix
            origins[h, k] = bank.origin_rotation
            gammas[h, k] = bank.gamma
    coeffs = np.zeros((h_units, k_points, 4))
    coeffs[..., 0] = 1.0
    logger.info("built %d filter banks", h_units * k_points)
    return SteerableModel(
        banks=banks,
        origin_rotations=origins,
        gammas=gammas,
        output=params.output.copy(),
        coeffs=coeffs,
        class_names=params.class_names,
        units=params.units,
    )


def set_rotation(model: SteerableModel, r: np.ndarray) -> SteerableModel:
    """Return a copy of ``model`` steered to the known input rotation ``r``.

    Raises:
        ShapeMismatch: If ``r`` is not 3x3.
        ValueError: If ``r`` is not a proper rotation.
    """
    r = check_rotation(r)
    conjugated = model.origin_rotations @ r @ np.swapaxes(model.origin_rotations, -1, -2)
    lifted_m1 = np.empty(model.gammas.shape + (4,))
    lifted_m1[..., :3] = conjugated @ M1[:3]
    lifted_m1[..., 3] = M1[3]
    return dataclasses.replace(model, coeffs=lifted_m1 @ BASIS_M)


def steerable_hidden(model: SteerableModel, clouds: np.ndarray) -> np.ndarray:
    """Steered hidden vectors for a batch of clouds, shape ``(N, H)``."""
    clouds = check_clouds(clouds, model.points_per_shape)
    return np.einsum(
        "hk,hki,hkid,nkd->nh",
        model.gammas,
        model.coeffs,
        model.banks,
        embed_point(clouds),
        optimize=True,
    )


def steerable_forward_batch(model: SteerableModel, clouds: np.ndarray) -> ForwardTrace:
    """Steered forward pass over an ``(N, K, 3)`` batch."""
    return output_layer(steerable_hidden(model, clouds), model.output)


def steerable_forward(model: SteerableModel, cloud: np.ndarray) -> ForwardTrace:
    """Steered forward pass over a single ``(K, 3)`` cloud."""
    cloud = check_cloud(cloud, model.points_per_shape)
    trace = steerable_forward_batch(model, cloud[np.newaxis])
    return ForwardTrace(
        hidden_pre=trace.hidden_pre[0],
        embedded_hidden=trace.embedded_hidden[0],
        logits=trace.logits[0],
    )


def derives_from(model: SteerableModel, params: MLGPParams, rtol: float = 1e-9) -> bool:
    """Whether ``model`` was built from ``params``.

    The output layers must match exactly and ``gamma * row_0`` of every bank
    must reproduce the raw hidden sphere.
    """
    if model.banks.shape[:2] != params.hidden.shape[:2] or model.output.shape != params.output.shape:
        return False
    if not np.array_equal(model.output, params.output):
        return False
    restored = model.gammas[..., np.newaxis] * model.banks[:, :, 0, :]
    return bool(np.allclose(restored, params.hidden, rtol=rtol, atol=rtol * np.max(np.abs(params.hidden))))
