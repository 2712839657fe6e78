"""Point-cloud datasets, perturbations, pose canonicalization and dataset files.

A dataset is a stack of N clouds with K points each, one integer label per
cloud. Two datasets are built in: the eight 3D Tetris shapes, and a
synthetic 20-joint skeleton set standing in for recorded skeleton data.

Dataset file format (UTF-8 text, one record per line)::

    schema: steerable-spheres/dataset/1
    points: <K>
    units: <unit name>
    classes: <name_0> <name_1> ...
    <cloud id> <label> <x_1> <y_1> <z_1> ... <x_K> <y_K> <z_K>

Blank lines and lines starting with ``#`` are ignored. Floats are written
in shortest round-trip form, so save followed by load is bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .constants import (
    DATASET_SCHEMA,
    DEFAULT_SKELETON_ANCHORS,
    DEFAULT_SPLIT,
    EPS,
    SKELETON_JOINTS,
)
from .errors import DegenerateAnchors, NegativeAmplitude, ParseError, SchemaMismatch, ShapeMismatch
from .geom3d import geodesic_rotation, rotate_cloud

TETRIS_SHAPES: dict[str, tuple[tuple[float, float, float], ...]] = {
    "chiral_shape_1": ((0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 1, 0)),
    "chiral_shape_2": ((0, 0, 0), (0, 0, 1), (1, 0, 0), (1, -1, 0)),
    "square": ((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)),
    "line": ((0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 0, 3)),
    "corner": ((0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)),
    "L": ((0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 1, 0)),
    "T": ((0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 1, 1)),
    "zigzag": ((0, 0, 0), (1, 0, 0), (1, 1, 0), (2, 1, 0)),
}

# Rest pose of the 20-joint layout, meters: hip center, spine, shoulder
# center, head, left arm (shoulder, elbow, wrist, hand), right arm, left leg
# (hip, knee, ankle, foot), right leg.
_REST_SKELETON = np.array(
    [
        (0.0, 0.05, 0.0),
        (0.0, 0.25, 0.0),
        (0.0, 0.50, 0.0),
        (0.0, 0.70, 0.0),
        (-0.20, 0.45, 0.0),
        (-0.30, 0.20, 0.0),
        (-0.35, 0.00, 0.0),
        (-0.37, -0.08, 0.0),
        (0.20, 0.45, 0.0),
        (0.30, 0.20, 0.0),
        (0.35, 0.00, 0.0),
        (0.37, -0.08, 0.0),
        (-0.10, -0.05, 0.0),
        (-0.10, -0.50, 0.0),
        (-0.10, -0.90, 0.0),
        (-0.10, -0.95, 0.10),
        (0.10, -0.05, 0.0),
        (0.10, -0.50, 0.0),
        (0.10, -0.90, 0.0),
        (0.10, -0.95, 0.10),
    ]
)

# Fixed so the class templates do not depend on the sampling seed.
_SKELETON_TEMPLATE_SEED = 20_211_020
_SKELETON_CLASSES = 10


@dataclass(frozen=True)
class LabeledCloud:
    """One cloud with its class label and identifier."""

    points: np.ndarray
    label: int
    id: str


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable stack of labeled clouds.

    Attributes:
        points: Cloud coordinates, shape ``(N, K, 3)``.
        labels: Integer labels, shape ``(N,)``.
        ids: Cloud identifiers, length N.
        class_names: Class names in label order.
        units: Length unit of the coordinates.
    """

    points: np.ndarray
    labels: np.ndarray
    ids: tuple[str, ...]
    class_names: tuple[str, ...]
    units: str = "abstract"

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if points.ndim != 3 or points.shape[2] != 3 or points.shape[0] == 0:
            raise ShapeMismatch(f"Dataset points must have shape (N > 0, K, 3), got {points.shape}.")
        if labels.shape != (points.shape[0],) or len(self.ids) != points.shape[0]:
            raise ShapeMismatch("Dataset needs exactly one label and one id per cloud.")
        if labels.min() < 0 or labels.max() >= len(self.class_names):
            raise ShapeMismatch(f"Labels must lie in [0, {len(self.class_names)}).")
        points.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    def __len__(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            np.array_equal(self.points, other.points)
            and np.array_equal(self.labels, other.labels)
            and self.ids == other.ids
            and self.class_names == other.class_names
            and self.units == other.units
        )

    @property
    def points_per_shape(self) -> int:
        return self.points.shape[1]

    def records(self) -> Iterator[LabeledCloud]:
        for i in range(len(self)):
            yield LabeledCloud(points=self.points[i], label=int(self.labels[i]), id=self.ids[i])

    def subset(self, indices: np.ndarray) -> Dataset:
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            points=self.points[indices],
            labels=self.labels[indices],
            ids=tuple(self.ids[i] for i in indices),
            class_names=self.class_names,
            units=self.units,
        )

    def with_points(self, points: np.ndarray) -> Dataset:
        """Return a copy carrying new coordinates and the same labels."""
        return Dataset(
            points=points,
            labels=self.labels,
            ids=self.ids,
            class_names=self.class_names,
            units=self.units,
        )


def tetris_dataset() -> Dataset:
    """The eight 3D Tetris shapes, four points each, one cloud per class."""
    names = tuple(TETRIS_SHAPES)
    return Dataset(
        points=np.array([TETRIS_SHAPES[name] for name in names], dtype=np.float64),
        labels=np.arange(len(names)),
        ids=names,
        class_names=names,
        units="abstract",
    )


def add_uniform_noise(cloud: np.ndarray, amplitude: float, rng: np.random.Generator) -> np.ndarray:
    """Perturb every coordinate independently by ``U(-amplitude, amplitude)``.

    Works on a single cloud or on any stack of clouds. Amplitude zero
    returns an unchanged copy without drawing from ``rng``.

    Raises:
        NegativeAmplitude: If ``amplitude < 0``.
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if amplitude < 0.0:
        raise NegativeAmplitude(f"Noise amplitude must be >= 0, got {amplitude:g}.")
    if amplitude == 0.0:
        return cloud.copy()
    return cloud + rng.uniform(-amplitude, amplitude, size=cloud.shape)


def canonicalize_pose(cloud: np.ndarray, anchors: tuple[int, int, int]) -> np.ndarray:
    """Center a cloud at its centroid and turn its anchor-plane normal to +z.

    The normal is ``(p_b - p_a) x (p_c - p_a)`` for anchors ``(a, b, c)``.
    Orientation within the xy-plane is left as it is.

    Raises:
        DegenerateAnchors: If anchors repeat, are out of range, or span a
            triangle of area below ``EPS``.
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2 or cloud.shape[1] != 3:
        raise ShapeMismatch(f"Expected a (K, 3) cloud, got shape {cloud.shape}.")
    if len(anchors) != 3 or len(set(anchors)) != 3:
        raise DegenerateAnchors(f"Need three distinct anchor indices, got {tuple(anchors)}.")
    if min(anchors) < 0 or max(anchors) >= cloud.shape[0]:
        raise DegenerateAnchors(f"Anchor indices {tuple(anchors)} out of range for {cloud.shape[0]} points.")

    centered = cloud - cloud.mean(axis=0)
    a, b, c = (centered[i] for i in anchors)
    normal = np.cross(b - a, c - a)
    if 0.5 * np.linalg.norm(normal) < EPS:
        raise DegenerateAnchors("Anchor triangle is degenerate.")
    return rotate_cloud(geodesic_rotation(normal, np.array([0.0, 0.0, 1.0])), centered)


def canonicalize_dataset(dataset: Dataset, anchors: tuple[int, int, int]) -> Dataset:
    """Apply ``canonicalize_pose`` to every cloud."""
    return dataset.with_points(np.stack([canonicalize_pose(p, anchors) for p in dataset.points]))


def synthetic_skeleton_dataset(per_class: int = 40, seed: int = 0) -> Dataset:
    """Synthetic 20-joint, 10-class skeleton clouds in meters.

    Each class is a fixed canonical template (a rest pose with small
    class-specific limb offsets). Every sample is a different subject: the
    template is scaled by a body size in [0.85, 1.15] and every joint gets
    3 cm of jitter, so neighboring classes overlap. A random tilt of the body
    plane and a random translation follow, so samples need
    ``canonicalize_pose`` with the default hip anchors before training.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1.")
    template_rng = np.random.default_rng(_SKELETON_TEMPLATE_SEED)
    movable = np.setdiff1d(np.arange(SKELETON_JOINTS), DEFAULT_SKELETON_ANCHORS)
    templates = []
    for _ in range(_SKELETON_CLASSES):
        pose = _REST_SKELETON.copy()
        pose[movable] += template_rng.normal(0.0, 0.05, size=(movable.size, 3))
        templates.append(canonicalize_pose(pose, DEFAULT_SKELETON_ANCHORS))

    rng = np.random.default_rng(seed)
    z_axis = np.array([0.0, 0.0, 1.0])
    points, labels, ids = [], [], []
    for label, template in enumerate(templates):
        for i in range(per_class):
            size = rng.uniform(0.85, 1.15)
            sample = size * template + rng.normal(0.0, 0.03, size=template.shape)
            direction = z_axis + rng.uniform(-0.5, 0.5, size=3)
            tilt = geodesic_rotation(z_axis, direction)
            points.append(rotate_cloud(tilt, sample) + rng.uniform(-1.0, 1.0, size=3))
            labels.append(label)
            ids.append(f"action_{label}_{i:04d}")
    return Dataset(
        points=np.array(points),
        labels=np.array(labels),
        ids=tuple(ids),
        class_names=tuple(f"action_{label}" for label in range(_SKELETON_CLASSES)),
        units="m",
    )


def split_dataset(
    dataset: Dataset,
    fractions: tuple[float, float, float] = DEFAULT_SPLIT,
    seed: int = 0,
) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded shuffle into train, validation and test parts.

    Fractions are normalized to sum to one; the test part takes the rounding
    remainder.
    """
    fractions = np.asarray(fractions, dtype=np.float64)
    if fractions.shape != (3,) or np.any(fractions <= 0.0):
        raise ValueError("Split needs three positive fractions.")
    fractions = fractions / fractions.sum()
    order = np.random.default_rng(seed).permutation(len(dataset))
    n_train = int(round(fractions[0] * len(dataset)))
    n_val = int(round(fractions[1] * len(dataset)))
    if n_train == 0 or n_val == 0 or n_train + n_val >= len(dataset):
        raise ValueError(f"Dataset of {len(dataset)} clouds is too small for split {tuple(fractions)}.")
    return (
        dataset.subset(order[:n_train]),
        dataset.subset(order[n_train : n_train + n_val]),
        dataset.subset(order[n_train + n_val :]),
    )


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write ``dataset`` in the text format described in the module docstring."""
    for name in dataset.class_names + dataset.ids + (dataset.units,):
        if not name or any(ch.isspace() for ch in name):
            raise ValueError(f"Names written to a dataset file must be non-empty without whitespace: {name!r}.")
    lines = [
        f"schema: {DATASET_SCHEMA}",
        f"points: {dataset.points_per_shape}",
        f"units: {dataset.units}",
        f"classes: {' '.join(dataset.class_names)}",
    ]
    for record in dataset.records():
        coords = " ".join(repr(float(v)) for v in record.points.reshape(-1))
        lines.append(f"{record.id} {record.label} {coords}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _header_value(line: str, key: str, lineno: int) -> str:
    name, sep, value = line.partition(":")
    if not sep or name.strip() != key:
        raise ParseError(f"Expected header '{key}: ...'", line=lineno, field=key)
    return value.strip()


def load_dataset(path: str | Path) -> Dataset:
    """Parse a dataset file.

    Raises:
        ParseError: For a missing or empty file, malformed header or records,
            a record whose point count differs from the header, or a label
            outside the declared classes.
        SchemaMismatch: If the file declares another schema.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"Cannot read dataset file {str(path)!r}: {exc.strerror}") from exc

    rows = [
        (lineno, line.strip())
        for lineno, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not rows:
        raise ParseError(f"Dataset file {str(path)!r} is empty.")
    if len(rows) < 5:
        raise ParseError("Dataset file needs a four-line header and at least one record.", line=rows[-1][0])

    schema = _header_value(rows[0][1], "schema", rows[0][0])
    if schema != DATASET_SCHEMA:
        raise SchemaMismatch(f"Unsupported dataset schema {schema!r}; expected {DATASET_SCHEMA!r}.")
    k_text = _header_value(rows[1][1], "points", rows[1][0])
    if not k_text.isdigit():
        raise ParseError("Point count must be an integer", line=rows[1][0], field="points")
    k = int(k_text)
    if k < 1:
        raise ParseError("Point count must be >= 1", line=rows[1][0], field="points")
    units = _header_value(rows[2][1], "units", rows[2][0])
    class_names = tuple(_header_value(rows[3][1], "classes", rows[3][0]).split())
    if len(class_names) < 2:
        raise ParseError("Need at least two classes", line=rows[3][0], field="classes")

    points, labels, ids = [], [], []
    for lineno, line in rows[4:]:
        fields = line.split()
        if len(fields) < 2:
            raise ParseError("Record needs an id and a label", line=lineno)
        cloud_id, label_text, coords = fields[0], fields[1], fields[2:]
        if len(coords) != 3 * k:
            raise ParseError(
                f"Cloud {cloud_id!r} has {len(coords)} coordinates, expected {3 * k}",
                line=lineno,
                field=cloud_id,
            )
        try:
            label = int(label_text)
        except ValueError as exc:
            raise ParseError(f"Cloud {cloud_id!r} has a non-integer label", line=lineno, field="label") from exc
        if not 0 <= label < len(class_names):
            raise ParseError(f"Cloud {cloud_id!r} has label {label} outside the classes", line=lineno, field="label")
        try:
            values = [float(v) for v in coords]
        except ValueError as exc:
            raise ParseError(f"Cloud {cloud_id!r} has a malformed coordinate", line=lineno, field=cloud_id) from exc
        if not np.all(np.isfinite(values)):
            raise ParseError(f"Cloud {cloud_id!r} has a non-finite coordinate", line=lineno, field=cloud_id)
        points.append(np.reshape(values, (k, 3)))
        labels.append(label)
        ids.append(cloud_id)

    return Dataset(
        points=np.array(points),
        labels=np.array(labels),
        ids=tuple(ids),
        class_names=class_names,
        units=units,
    )


BUILTIN_DATASETS = ("tetris", "synthetic-skeletons")


def resolve_dataset(name_or_path: str | Path, seed: int = 0) -> Dataset:
    """Return a built-in dataset by name or load one from a file."""
    if str(name_or_path) == "tetris":
        return tetris_dataset()
    if str(name_or_path) == "synthetic-skeletons":
        return synthetic_skeleton_dataset(seed=seed)
    return load_dataset(name_or_path)
