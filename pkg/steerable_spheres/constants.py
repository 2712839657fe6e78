"""Numerical constants and defaults used by the package.

All arithmetic is 64-bit floating point. Lengths are in dataset units
(abstract for Tetris, meters for skeleton clouds).
"""

from __future__ import annotations

# Direction-degeneracy threshold in dataset units.
EPS = 1e-9

# Relative factor of the normalization guard: |s5| must exceed
# GAMMA_MIN_FACTOR * max(1, ||(s1..s4)||).
GAMMA_MIN_FACTOR = 1e-9

# Adam defaults.
DEFAULT_LEARNING_RATE = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

DEFAULT_EPOCHS = 2000
DEFAULT_HIDDEN_UNITS = 5
DEFAULT_LOG_EVERY = 100

# Train/validation/test fractions for file datasets.
DEFAULT_SPLIT = (0.38, 0.11, 0.51)

# Hip-center, left-hip and right-hip joints of the 20-joint skeleton layout.
DEFAULT_SKELETON_ANCHORS = (0, 12, 16)
SKELETON_JOINTS = 20

# Known-rotation experiment defaults.
DEFAULT_RUNS = 1000
TETRIS_NOISE_LEVELS = (0.0, 0.05, 0.1, 0.2, 0.3, 0.5)
SKELETON_NOISE_LEVELS = (0.0, 0.005, 0.01, 0.02, 0.03, 0.05)

# File schema identifiers.
DATASET_SCHEMA = "steerable-spheres/dataset/1"
CHECKPOINT_SCHEMA = "steerable-spheres/checkpoint/1"
