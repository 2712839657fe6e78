"""Supervised training of the ancestor MLGP.

Full-batch Adam on the mean softmax cross-entropy. Gradients are closed-form:
with ``E = (h, -1, -||h||^2 / 2)`` the embedded hidden vector, ``O`` the
output spheres and ``G`` the softmax error,

    dL/dO = G^T E
    dL/dh = (G O)[:, :H] - (G O)[:, H + 1] * h
    dL/dS_hk = sum_n dL/dh_nh * X_nk
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp, softmax

from .constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN_UNITS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_LOG_EVERY,
)
from .conformal import embed_point
from .data import Dataset
from .errors import BadLabel, NonFinite, ShapeMismatch
from .mlgp import (
    MLGPParams,
    accuracy_from_logits,
    check_cloud,
    check_clouds,
    mlgp_forward_batch,
    output_layer,
)

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, float, float], None]


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of a training run.

    A learning rate of zero is accepted and leaves the initial weights
    untouched.
    """

    hidden_units: int = DEFAULT_HIDDEN_UNITS
    epochs: int = DEFAULT_EPOCHS
    learning_rate: float = DEFAULT_LEARNING_RATE
    seed: int = 0
    adam_beta1: float = ADAM_BETA1
    adam_beta2: float = ADAM_BETA2
    adam_eps: float = ADAM_EPS
    log_every: int = DEFAULT_LOG_EVERY

    def __post_init__(self) -> None:
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1.")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1.")
        if not self.learning_rate >= 0.0:
            raise ValueError("learning_rate must be >= 0.")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ValueError("Adam betas must lie in [0, 1).")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1.")


@dataclass(frozen=True)
class Gradients:
    """Gradients with the same shapes as ``MLGPParams.hidden`` and ``.output``."""

    hidden: np.ndarray
    output: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.hidden**2) + np.sum(self.output**2)))


@dataclass(frozen=True)
class OptimizerState:
    """Adam moment buffers mirroring the parameter shapes, and the step count."""

    m_hidden: np.ndarray
    v_hidden: np.ndarray
    m_output: np.ndarray
    v_output: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, params: MLGPParams) -> OptimizerState:
        return cls(
            m_hidden=np.zeros_like(params.hidden),
            v_hidden=np.zeros_like(params.hidden),
            m_output=np.zeros_like(params.output),
            v_output=np.zeros_like(params.output),
        )


@dataclass(frozen=True)
class TrainResult:
    """Final weights plus per-epoch loss and accuracy (measured before each update)."""

    params: MLGPParams
    loss_history: list[float] = field(default_factory=list)
    accuracy_history: list[float] = field(default_factory=list)
    final_loss: float = float("nan")
    final_accuracy: float = float("nan")


def init_params(
    points_per_shape: int,
    hidden_units: int,
    class_names: tuple[str, ...],
    seed: int,
    units: str = "abstract",
) -> MLGPParams:
    """Draw initial weights uniformly on ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]``.

    ``fan_in`` is ``5 K`` for hidden spheres and ``H + 2`` for output spheres.
    """
    rng = np.random.default_rng(seed)
    bound_hidden = 1.0 / np.sqrt(5 * points_per_shape)
    bound_output = 1.0 / np.sqrt(hidden_units + 2)
    hidden = rng.uniform(-bound_hidden, bound_hidden, size=(hidden_units, points_per_shape, 5))
    output = rng.uniform(-bound_output, bound_output, size=(len(class_names), hidden_units + 2))
    return MLGPParams(hidden=hidden, output=output, class_names=tuple(class_names), units=units)


def _check_labels(labels: np.ndarray, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if not np.issubdtype(labels.dtype, np.integer):
        raise BadLabel("Labels must be integers.")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise BadLabel(f"Labels must lie in [0, {num_classes}).")
    return labels


def cross_entropy_loss(logits: np.ndarray, label: int) -> float:
    """Return ``-log softmax(logits)[label]`` without overflow."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= int(label) < logits.shape[-1]:
        raise BadLabel(f"Label {label} is outside [0, {logits.shape[-1]}).")
    return float(logsumexp(logits) - logits[int(label)])


def loss_and_gradients(
    params: MLGPParams, clouds: np.ndarray, labels: np.ndarray
) -> tuple[float, Gradients]:
    """Mean cross-entropy over a batch and its exact gradients."""
    clouds = check_clouds(clouds, params.points_per_shape)
    labels = _check_labels(labels, params.num_classes)
    if labels.shape != (clouds.shape[0],):
        raise ShapeMismatch(f"Got {labels.shape} labels for {clouds.shape[0]} clouds.")
    n = clouds.shape[0]
    h_units = params.hidden_units

    embedded = embed_point(clouds)
    hidden = np.einsum("nkd,hkd->nh", embedded, params.hidden)
    trace = output_layer(hidden, params.output)

    rows = np.arange(n)
    loss = float(np.mean(logsumexp(trace.logits, axis=-1) - trace.logits[rows, labels]))

    error = softmax(trace.logits, axis=-1)
    error[rows, labels] -= 1.0
    error /= n

    grad_output = error.T @ trace.embedded_hidden
    grad_embedded = error @ params.output
    grad_h = grad_embedded[:, :h_units] - grad_embedded[:, h_units + 1 : h_units + 2] * hidden
    grad_hidden = np.einsum("nh,nkd->hkd", grad_h, embedded)
    return loss, Gradients(hidden=grad_hidden, output=grad_output)


def backward(params: MLGPParams, cloud: np.ndarray, label: int) -> Gradients:
    """Gradient of the cross-entropy of one labeled cloud."""
    cloud = check_cloud(cloud, params.points_per_shape)
    _, grads = loss_and_gradients(params, cloud[np.newaxis], np.array([label]))
    return grads


def adam_step(
    params: MLGPParams, grads: Gradients, state: OptimizerState, config: TrainConfig
) -> tuple[MLGPParams, OptimizerState]:
    """Apply one bias-corrected Adam update and return new params and state."""
    step = state.step + 1
    b1, b2 = config.adam_beta1, config.adam_beta2

    def update(weights, grad, m, v):
        m = b1 * m + (1.0 - b1) * grad
        v = b2 * v + (1.0 - b2) * grad**2
        m_hat = m / (1.0 - b1**step)
        v_hat = v / (1.0 - b2**step)
        return weights - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps), m, v

    hidden, m_hidden, v_hidden = update(params.hidden, grads.hidden, state.m_hidden, state.v_hidden)
    output, m_output, v_output = update(params.output, grads.output, state.m_output, state.v_output)
    new_params = MLGPParams(
        hidden=hidden, output=output, class_names=params.class_names, units=params.units
    )
    new_state = OptimizerState(
        m_hidden=m_hidden, v_hidden=v_hidden, m_output=m_output, v_output=v_output, step=step
    )
    return new_params, new_state


def train(
    dataset: Dataset,
    config: TrainConfig,
    progress: ProgressCallback | None = None,
) -> TrainResult:
    """Train an ancestor MLGP on ``dataset`` with full-batch Adam.

    Args:
        dataset: Labeled clouds in canonical orientation.
        config: Hyperparameters; the seed fixes the initialization.
        progress: Optional ``(epoch, loss, accuracy)`` callback invoked every
            ``config.log_every`` epochs and after the last one.

    Returns:
        TrainResult with final params and per-epoch histories.

    Raises:
        NonFinite: If the loss or a gradient becomes NaN or infinite.
    """
    if len(dataset) == 0:
        raise ShapeMismatch("Cannot train on an empty dataset.")
    clouds = dataset.points
    labels = dataset.labels

    params = init_params(
        dataset.points_per_shape,
        config.hidden_units,
        dataset.class_names,
        config.seed,
        units=dataset.units,
    )
    state = OptimizerState.zeros_like(params)
    loss_history: list[float] = []
    accuracy_history: list[float] = []

    for epoch in range(1, config.epochs + 1):
        loss, grads = loss_and_gradients(params, clouds, labels)
        if not np.isfinite(loss) or not (
            np.all(np.isfinite(grads.hidden)) and np.all(np.isfinite(grads.output))
        ):
            raise NonFinite(f"Training diverged at epoch {epoch}: loss={loss}.")
        accuracy = accuracy_from_logits(mlgp_forward_batch(params, clouds).logits, labels)
        loss_history.append(loss)
        accuracy_history.append(accuracy)

        if epoch % config.log_every == 0 or epoch == config.epochs:
            logger.debug("epoch %d loss %.6f accuracy %.1f", epoch, loss, accuracy)
            if progress is not None:
                progress(epoch, loss, accuracy)

        params, state = adam_step(params, grads, state, config)

    final_loss, _ = loss_and_gradients(params, clouds, labels)
    if not np.isfinite(final_loss):
        raise NonFinite(f"Training diverged after the last epoch: loss={final_loss}.")
    final_accuracy = accuracy_from_logits(mlgp_forward_batch(params, clouds).logits, labels)
    logger.info("trained %d epochs: loss %.6f accuracy %.1f", config.epochs, final_loss, final_accuracy)
    return TrainResult(
        params=params,
        loss_history=loss_history,
        accuracy_history=accuracy_history,
        final_loss=final_loss,
        final_accuracy=final_accuracy,
    )
