"""Two-layer multilayer geometric perceptron (MLGP).

The hidden layer has H geometric neurons. Neuron ``h`` owns one raw sphere
per input point and outputs the sum of the K point-to-sphere activations:

    z_h = sum_k X_k . S_hk

There is no bias and no nonlinearity; the conformal embedding is already
quadratic. The hidden vector is embedded with the same pattern as a point,
``(z, -1, -||z||^2 / 2)``, and C hypersphere neurons over R^(H+2) produce the
logits. Softmax belongs to the loss, not to the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conformal import activation, embed_point, embed_vector
from .errors import ShapeMismatch


@dataclass(frozen=True)
class MLGPParams:
    """Weights of a trained (or initialized) ancestor model.

    Attributes:
        hidden: Raw hidden spheres, shape ``(H, K, 5)``.
        output: Raw output spheres, shape ``(C, H + 2)``.
        class_names: Names of the C classes, in label order.
        units: Length unit of the data the model was trained on.
    """

    hidden: np.ndarray
    output: np.ndarray
    class_names: tuple[str, ...]
    units: str = "abstract"

    def __post_init__(self) -> None:
        hidden = np.asarray(self.hidden, dtype=np.float64)
        output = np.asarray(self.output, dtype=np.float64)
        if hidden.ndim != 3 or hidden.shape[2] != 5 or hidden.shape[0] < 1:
            raise ShapeMismatch(f"Hidden spheres must have shape (H, K, 5), got {hidden.shape}.")
        if output.ndim != 2 or output.shape[1] != hidden.shape[0] + 2 or output.shape[0] < 2:
            raise ShapeMismatch(
                f"Output spheres must have shape (C >= 2, {hidden.shape[0] + 2}), got {output.shape}."
            )
        if len(self.class_names) != output.shape[0]:
            raise ShapeMismatch(
                f"Got {len(self.class_names)} class names for {output.shape[0]} output spheres."
            )
        object.__setattr__(self, "hidden", hidden)
        object.__setattr__(self, "output", output)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def points_per_shape(self) -> int:
        return self.hidden.shape[1]

    @property
    def hidden_units(self) -> int:
        return self.hidden.shape[0]

    @property
    def num_classes(self) -> int:
        return self.output.shape[0]


@dataclass(frozen=True)
class ForwardTrace:
    """Intermediate values of one forward pass.

    ``hidden_pre`` is the hidden vector h (the quantity a steered model must
    reproduce), ``embedded_hidden`` its embedding and ``logits`` the output.
    Leading batch axes are kept when the pass was batched.
    """

    hidden_pre: np.ndarray
    embedded_hidden: np.ndarray
    logits: np.ndarray


def check_clouds(clouds: np.ndarray, points_per_shape: int) -> np.ndarray:
    """Return ``clouds`` as an ``(N, K, 3)`` float array or raise ShapeMismatch."""
    clouds = np.asarray(clouds, dtype=np.float64)
    if clouds.ndim != 3 or clouds.shape[1:] != (points_per_shape, 3):
        raise ShapeMismatch(
            f"Expected clouds of shape (N, {points_per_shape}, 3), got {clouds.shape}."
        )
    return clouds


def check_cloud(cloud: np.ndarray, points_per_shape: int) -> np.ndarray:
    """Return ``cloud`` as a ``(K, 3)`` float array or raise ShapeMismatch."""
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.shape != (points_per_shape, 3):
        raise ShapeMismatch(
            f"Expected a cloud of {points_per_shape} points, got shape {cloud.shape}."
        )
    return cloud


def geometric_forward(spheres: np.ndarray, cloud: np.ndarray) -> float:
    """Evaluate one geometric neuron on one cloud.

    Args:
        spheres: Raw spheres of the neuron, shape ``(K, 5)``.
        cloud: Input points, shape ``(K, 3)``.

    Returns:
        The sum over k of ``embed(x_k) . S_k``.
    """
    spheres = np.asarray(spheres, dtype=np.float64)
    cloud = check_cloud(cloud, spheres.shape[0])
    embedded = embed_point(cloud)
    return float(sum(activation(embedded[k], spheres[k]) for k in range(spheres.shape[0])))


def hidden_activations(params: MLGPParams, clouds: np.ndarray) -> np.ndarray:
    """Hidden vectors for a batch of clouds, shape ``(N, H)``."""
    clouds = check_clouds(clouds, params.points_per_shape)
    return np.einsum("nkd,hkd->nh", embed_point(clouds), params.hidden)


def output_layer(hidden: np.ndarray, output: np.ndarray) -> ForwardTrace:
    """Embed hidden vectors and apply the hypersphere output neurons."""
    embedded = embed_vector(hidden)
    return ForwardTrace(hidden_pre=hidden, embedded_hidden=embedded, logits=embedded @ output.T)


def mlgp_forward_batch(params: MLGPParams, clouds: np.ndarray) -> ForwardTrace:
    """Forward pass over an ``(N, K, 3)`` batch."""
    return output_layer(hidden_activations(params, clouds), params.output)


def mlgp_forward(params: MLGPParams, cloud: np.ndarray) -> ForwardTrace:
    """Forward pass over a single ``(K, 3)`` cloud."""
    cloud = check_cloud(cloud, params.points_per_shape)
    trace = mlgp_forward_batch(params, cloud[np.newaxis])
    return ForwardTrace(
        hidden_pre=trace.hidden_pre[0],
        embedded_hidden=trace.embedded_hidden[0],
        logits=trace.logits[0],
    )


def predict(params: MLGPParams, cloud: np.ndarray) -> int:
    """Return the arg-max class; ties go to the lowest index."""
    return int(np.argmax(mlgp_forward(params, cloud).logits))


def predict_batch(params: MLGPParams, clouds: np.ndarray) -> np.ndarray:
    """Arg-max classes for a batch of clouds."""
    return np.argmax(mlgp_forward_batch(params, clouds).logits, axis=-1)


def accuracy_from_logits(logits: np.ndarray, labels: np.ndarray) -> float:
    """Percentage of rows whose arg-max equals the label."""
    return 100.0 * float(np.mean(np.argmax(logits, axis=-1) == np.asarray(labels)))
