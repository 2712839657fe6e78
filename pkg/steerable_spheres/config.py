"""Parsing and validation of experiment config files.

A config is a YAML mapping. Every key is optional except ``dataset``:

- dataset: ``tetris``, ``synthetic-skeletons``, or a dataset file path
  (relative paths resolve against the config file's directory)
- hidden_units: number of geometric neurons (default 5)
- epochs: training epochs (default 2000)
- learning_rate: Adam step size (default 0.001)
- seed: initialization and split seed (default 0)
- split: train/validation/test fractions, used when the dataset has more
  than one cloud per class
  (default [0.38, 0.11, 0.51])
- anchors: three joint indices used to canonicalize poses, or null
- log_every: epochs between progress lines (default 100)
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Mapping

import yaml

from .constants import (
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN_UNITS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_LOG_EVERY,
    DEFAULT_SPLIT,
)
from .data import BUILTIN_DATASETS
from .errors import ParseError
from .train import TrainConfig

_KEYS = {"dataset", "hidden_units", "epochs", "learning_rate", "seed", "split", "anchors", "log_every"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated contents of a config file."""

    dataset: str
    hidden_units: int = DEFAULT_HIDDEN_UNITS
    epochs: int = DEFAULT_EPOCHS
    learning_rate: float = DEFAULT_LEARNING_RATE
    seed: int = 0
    split: tuple[float, float, float] = DEFAULT_SPLIT
    anchors: tuple[int, int, int] | None = None
    log_every: int = DEFAULT_LOG_EVERY

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            hidden_units=self.hidden_units,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            seed=self.seed,
            log_every=self.log_every,
        )

    def to_dict(self) -> dict[str, Any]:
        """Plain-data echo of the config, stored in checkpoints."""
        out = asdict(self)
        out["split"] = list(self.split)
        out["anchors"] = list(self.anchors) if self.anchors is not None else None
        return out


def _integer(raw: Mapping[str, Any], key: str, default: int, minimum: int) -> int:
    value = raw.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError("Expected an integer", field=key)
    if value < minimum:
        raise ParseError(f"Value must be >= {minimum}", field=key)
    return value


def parse_config(raw: Any, base_dir: str | Path = ".") -> ExperimentConfig:
    """Validate a parsed YAML document and build an ExperimentConfig.

    Args:
        raw: Parsed YAML content; must be a mapping.
        base_dir: Directory against which a relative dataset path resolves.

    Returns:
        A validated ExperimentConfig.

    Raises:
        ParseError: On unknown keys, wrong types, or out-of-range values.
    """
    if not isinstance(raw, Mapping):
        raise ParseError("Config must be a mapping of keys to values.")
    unknown = sorted(set(raw) - _KEYS)
    if unknown:
        raise ParseError("Unknown config key", field=str(unknown[0]))

    dataset = raw.get("dataset")
    if not isinstance(dataset, str) or not dataset:
        raise ParseError("A dataset name or path is required", field="dataset")
    if dataset not in BUILTIN_DATASETS:
        dataset = str(Path(base_dir) / dataset)

    learning_rate = raw.get("learning_rate", DEFAULT_LEARNING_RATE)
    if isinstance(learning_rate, bool) or not isinstance(learning_rate, (int, float)) or learning_rate < 0:
        raise ParseError("Learning rate must be a number >= 0", field="learning_rate")

    split = raw.get("split", list(DEFAULT_SPLIT))
    if (
        not isinstance(split, (list, tuple))
        or len(split) != 3
        or not all(isinstance(f, (int, float)) and not isinstance(f, bool) and f > 0 for f in split)
    ):
        raise ParseError("Split must be three positive fractions", field="split")

    anchors = raw.get("anchors")
    if anchors is not None:
        if (
            not isinstance(anchors, (list, tuple))
            or len(anchors) != 3
            or not all(isinstance(i, int) and not isinstance(i, bool) and i >= 0 for i in anchors)
            or len(set(anchors)) != 3
        ):
            raise ParseError("Anchors must be three distinct non-negative indices", field="anchors")
        anchors = tuple(anchors)

    return ExperimentConfig(
        dataset=dataset,
        hidden_units=_integer(raw, "hidden_units", DEFAULT_HIDDEN_UNITS, 1),
        epochs=_integer(raw, "epochs", DEFAULT_EPOCHS, 1),
        learning_rate=float(learning_rate),
        seed=_integer(raw, "seed", 0, 0),
        split=tuple(float(f) for f in split),
        anchors=anchors,
        log_every=_integer(raw, "log_every", DEFAULT_LOG_EVERY, 1),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a YAML config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"Cannot read config {str(path)!r}: {exc.strerror}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError("Config is not valid YAML", line=mark.line + 1 if mark else None) from exc
    return parse_config(raw, base_dir=path.parent)
