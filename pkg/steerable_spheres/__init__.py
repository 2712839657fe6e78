"""Spherical neurons and rotation-steerable filter banks for 3D point clouds.

Points embed into a five-dimensional conformal space where a single scalar
product with a sphere vector gives the signed distance-like activation

    X . S = (r^2 - |x - c|^2) / 2

A small classifier built from such neurons is trained on canonically posed
clouds. Each learned sphere is then expanded into four tetrahedron-rotated
copies, and weighting their responses with coefficients derived from a known
input rotation reproduces the canonical activations on rotated input.
"""

from .conformal import embed_point, normalize_sphere, sphere_from_geometry
from .data import Dataset, resolve_dataset, tetris_dataset
from .errors import SteerableError
from .mlgp import MLGPParams, mlgp_forward, predict
from .steer import SteerableModel, build_filter_bank, build_steerable, set_rotation, steerable_forward
from .train import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "MLGPParams",
    "SteerableError",
    "SteerableModel",
    "TrainConfig",
    "build_filter_bank",
    "build_steerable",
    "embed_point",
    "mlgp_forward",
    "normalize_sphere",
    "predict",
    "resolve_dataset",
    "set_rotation",
    "sphere_from_geometry",
    "steerable_forward",
    "tetris_dataset",
    "train",
    "__version__",
]
