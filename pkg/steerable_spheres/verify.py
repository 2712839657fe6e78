"""Randomized property suite for the geometric and steering identities.

Each property draws a random instance, measures an error, and the suite
keeps the worst error over all trials together with the instance that
produced it. A property passes when its worst error stays below its
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.spatial.transform import Rotation

from .conformal import activation, embed_point, sphere_from_geometry
from .geom3d import geodesic_rotation, lift4, lift5, rotate_cloud, sample_rotation
from .mlgp import MLGPParams, hidden_activations, mlgp_forward_batch
from .steer import (
    build_filter_bank,
    build_steerable,
    bank_forward,
    interp_coeffs,
    rotation_from_rep,
    rotation_rep_V,
    set_rotation,
    steer_activation,
    steerable_forward_batch,
    steerable_hidden,
    tetra_rotation,
)
from .train import loss_and_gradients

# Floor of the denominator in the gradient check's relative error.
GRAD_CHECK_FLOOR = 1e-3
GRAD_CHECK_STEP = 1e-5

Trial = Callable[[np.random.Generator], tuple[float, dict[str, Any]]]


@dataclass(frozen=True)
class PropertyResult:
    """Worst case of one property over all trials."""

    name: str
    trials: int
    max_error: float
    tolerance: float
    counterexample: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_error) and self.max_error < self.tolerance)


def _listify(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _random_sphere(rng: np.random.Generator) -> np.ndarray:
    """Raw sphere: random center and radius, random nonzero scale."""
    gamma = rng.uniform(0.5, 2.0) * rng.choice((-1.0, 1.0))
    return gamma * sphere_from_geometry(rng.normal(size=3), rng.uniform(0.2, 2.0))


def _random_params(rng: np.random.Generator, hidden_units: int = 3, points: int = 4, classes: int = 3) -> MLGPParams:
    return MLGPParams(
        hidden=rng.uniform(-0.5, 0.5, size=(hidden_units, points, 5)),
        output=rng.uniform(-0.5, 0.5, size=(classes, hidden_units + 2)),
        class_names=tuple(f"class_{c}" for c in range(classes)),
    )


def finite_difference_gradients(
    params: MLGPParams, clouds: np.ndarray, labels: np.ndarray, step: float = GRAD_CHECK_STEP
) -> tuple[np.ndarray, np.ndarray]:
    """Central differences of the mean loss for every weight."""

    def loss_at(hidden: np.ndarray, output: np.ndarray) -> float:
        shifted = MLGPParams(hidden=hidden, output=output, class_names=params.class_names)
        return loss_and_gradients(shifted, clouds, labels)[0]

    grads = []
    for name in ("hidden", "output"):
        base = getattr(params, name)
        grad = np.empty_like(base)
        for index in np.ndindex(base.shape):
            plus, minus = base.copy(), base.copy()
            plus[index] += step
            minus[index] -= step
            if name == "hidden":
                grad[index] = (loss_at(plus, params.output) - loss_at(minus, params.output)) / (2 * step)
            else:
                grad[index] = (loss_at(params.hidden, plus) - loss_at(params.hidden, minus)) / (2 * step)
        grads.append(grad)
    return grads[0], grads[1]


def gradient_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Worst coordinate of ``|a - n| / max(|a|, |n|, GRAD_CHECK_FLOOR)``."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), GRAD_CHECK_FLOOR)
    return float(np.max(np.abs(analytic - numeric) / denom))


def _geodesic_image(rng):
    a, b = rng.normal(size=3), rng.normal(size=3)
    r = geodesic_rotation(a, b)
    err = np.max(np.abs(r @ (a / np.linalg.norm(a)) - b / np.linalg.norm(b)))
    return err, {"source": a, "target": b}


def _lift_homomorphism(rng):
    r1, r2 = sample_rotation(rng), sample_rotation(rng)
    err = max(
        np.max(np.abs(lift4(r1 @ r2) - lift4(r1) @ lift4(r2))),
        np.max(np.abs(lift5(r1 @ r2) - lift5(r1) @ lift5(r2))),
    )
    return err, {"r1": r1, "r2": r2}


def _rotation_validity(rng):
    r = sample_rotation(rng)
    err = max(np.max(np.abs(r.T @ r - np.eye(3))), abs(np.linalg.det(r) - 1.0))
    return err, {"rotation": r}


def _conformal_isometry(rng):
    x, r = rng.normal(size=3), sample_rotation(rng)
    s = sphere_from_geometry(rng.normal(size=3), rng.uniform(0.2, 2.0))
    err = abs(activation(embed_point(r @ x), lift5(r) @ s) - activation(embed_point(x), s))
    return err, {"point": x, "sphere": s, "rotation": r}


def _first_degree_spectrum(rng):
    x = rng.normal(size=3)
    s = sphere_from_geometry(rng.normal(size=3), rng.uniform(0.2, 2.0))
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    thetas = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    samples = np.array(
        [activation(embed_point(x), lift5(Rotation.from_rotvec(t * axis).as_matrix()) @ s) for t in thetas]
    )
    energy = np.abs(np.fft.fft(samples)) ** 2
    freqs = np.abs(np.fft.fftfreq(64, d=1.0 / 64))
    err = energy[freqs >= 2].sum() / energy.sum()
    return err, {"point": x, "sphere": s, "axis": axis}


def _bank_equivariance(rng):
    bank = build_filter_bank(_random_sphere(rng))
    r, x = sample_rotation(rng), embed_point(rng.normal(size=3))
    err = np.max(np.abs(rotation_rep_V(bank, r) @ bank_forward(bank, x) - bank_forward(bank, lift5(r) @ x)))
    return err, {"bank": bank.matrix, "rotation": r, "point": x}


def _tetra_selection(rng):
    bank = build_filter_bank(_random_sphere(rng))
    r_o = bank.origin_rotation
    coeffs = interp_coeffs(bank, r_o.T @ tetra_rotation(1) @ r_o)
    err = np.max(np.abs(coeffs - np.array([0.0, 1.0, 0.0, 0.0])))
    return err, {"bank": bank.matrix, "coeffs": coeffs}


def _steering_identity(rng):
    sphere = _random_sphere(rng)
    bank = build_filter_bank(sphere)
    r, x = sample_rotation(rng), embed_point(rng.normal(size=3))
    steered = steer_activation(bank, bank.gamma, interp_coeffs(bank, r), lift5(r) @ x)
    err = abs(steered - activation(x, sphere))
    return err, {"sphere": sphere, "rotation": r, "point": x}


def _geometric_neuron_steering(rng):
    params = _random_params(rng)
    clouds = rng.normal(size=(2, params.points_per_shape, 3))
    r = sample_rotation(rng)
    steered = set_rotation(build_steerable(params), r)
    err = np.max(np.abs(steerable_hidden(steered, rotate_cloud(r, clouds)) - hidden_activations(params, clouds)))
    return err, {"hidden": params.hidden, "clouds": clouds, "rotation": r}


def _model_invariance(rng):
    params = _random_params(rng)
    clouds = rng.normal(size=(2, params.points_per_shape, 3))
    r = sample_rotation(rng)
    steered = set_rotation(build_steerable(params), r)
    logits_s = steerable_forward_batch(steered, rotate_cloud(r, clouds)).logits
    err = np.max(np.abs(logits_s - mlgp_forward_batch(params, clouds).logits))
    return err, {"hidden": params.hidden, "output": params.output, "clouds": clouds, "rotation": r}


def _rep_round_trip(rng):
    bank = build_filter_bank(_random_sphere(rng))
    r = sample_rotation(rng)
    err = np.linalg.norm(rotation_from_rep(bank, rotation_rep_V(bank, r)) - r)
    return err, {"bank": bank.matrix, "rotation": r}


def _rep_homomorphism(rng):
    bank = build_filter_bank(_random_sphere(rng))
    r1, r2 = sample_rotation(rng), sample_rotation(rng)
    err = np.max(np.abs(rotation_rep_V(bank, r1 @ r2) - rotation_rep_V(bank, r1) @ rotation_rep_V(bank, r2)))
    return err, {"bank": bank.matrix, "r1": r1, "r2": r2}


def _coeff_equivariance(rng):
    bank = build_filter_bank(_random_sphere(rng))
    r1, r2 = sample_rotation(rng), sample_rotation(rng)
    err = np.max(np.abs(interp_coeffs(bank, r2 @ r1) - rotation_rep_V(bank, r2) @ interp_coeffs(bank, r1)))
    return err, {"bank": bank.matrix, "r1": r1, "r2": r2}


def _bank_rank(rng):
    bank = build_filter_bank(_random_sphere(rng))
    singular = np.linalg.svd(bank.b3, compute_uv=False)
    return singular[0] / singular[-1], {"bank": bank.matrix, "singular_values": singular}


def _gradient_check(rng):
    params = _random_params(rng, hidden_units=2, points=3, classes=3)
    clouds = rng.uniform(-1.0, 1.0, size=(2, params.points_per_shape, 3))
    labels = rng.integers(0, params.num_classes, size=2)
    _, grads = loss_and_gradients(params, clouds, labels)
    fd_hidden, fd_output = finite_difference_gradients(params, clouds, labels)
    err = max(gradient_relative_error(grads.hidden, fd_hidden), gradient_relative_error(grads.output, fd_output))
    return err, {"hidden": params.hidden, "output": params.output, "clouds": clouds, "labels": labels}


# (name, tolerance, trial). The bank-rank "error" is the condition number of
# B3, so the tolerance reads as smallest singular value > 1e-8 * largest.
PROPERTIES: tuple[tuple[str, float, Trial], ...] = (
    ("geodesic_image", 1e-12, _geodesic_image),
    ("lift_homomorphism", 1e-12, _lift_homomorphism),
    ("rotation_validity", 1e-12, _rotation_validity),
    ("conformal_isometry", 1e-10, _conformal_isometry),
    ("first_degree_spectrum", 1e-9, _first_degree_spectrum),
    ("bank_equivariance", 1e-10, _bank_equivariance),
    ("tetra_selection", 1e-12, _tetra_selection),
    ("steering_identity", 1e-9, _steering_identity),
    ("geometric_neuron_steering", 1e-9, _geometric_neuron_steering),
    ("model_invariance", 1e-9, _model_invariance),
    ("rep_round_trip", 1e-10, _rep_round_trip),
    ("rep_homomorphism", 1e-12, _rep_homomorphism),
    ("coeff_equivariance", 1e-12, _coeff_equivariance),
    ("bank_rank", 1e8, _bank_rank),
    ("gradient_check", 1e-5, _gradient_check),
)


def run_property(name: str, tolerance: float, trial: Trial, rng: np.random.Generator, trials: int) -> PropertyResult:
    """Run one property ``trials`` times and keep the worst case."""
    worst, worst_case = -np.inf, {}
    for _ in range(trials):
        err, case = trial(rng)
        err = float(err)
        if not np.isfinite(err) or err > worst:
            worst, worst_case = err, case
            if not np.isfinite(err):
                break
    counterexample = {key: _listify(value) for key, value in worst_case.items()}
    return PropertyResult(name=name, trials=trials, max_error=worst, tolerance=tolerance, counterexample=counterexample)


def run_suite(seed: int = 0, trials: int = 100) -> list[PropertyResult]:
    """Run every property with its own generator derived from ``seed``."""
    if trials < 1:
        raise ValueError("trials must be >= 1.")
    return [
        run_property(name, tolerance, trial, np.random.default_rng([seed, index]), trials)
        for index, (name, tolerance, trial) in enumerate(PROPERTIES)
    ]


def format_results(results: list[PropertyResult]) -> str:
    """Console table with trials, worst error, tolerance and status."""
    width = max(len(r.name) for r in results)
    lines = [f"{'property':<{width}}  {'trials':>6}  {'max error':>10}  {'tolerance':>9}  status"]
    for r in results:
        lines.append(
            f"{r.name:<{width}}  {r.trials:>6}  {r.max_error:>10.3e}  {r.tolerance:>9.0e}  {'pass' if r.passed else 'FAIL'}"
        )
    return "\n".join(lines)
