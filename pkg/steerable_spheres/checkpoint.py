"""Model checkpoint files.

A checkpoint is a UTF-8 JSON document::

    {
      "schema": "steerable-spheres/checkpoint/1",
      "kind": "ancestor" | "steerable",
      "class_names": [...],
      "units": "...",
      "seed": <int or null>,
      "config": {...},
      "arrays": {"<name>": {"shape": [...], "hex": ["0x1.8p+0", ...]}, ...}
    }

Floats are stored with ``float.hex`` so loading reproduces every bit.
Ancestors store ``hidden`` and ``output``; steerable models store ``banks``,
``origin_rotations``, ``gammas``, ``output`` and ``coeffs``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np

from .constants import CHECKPOINT_SCHEMA
from .errors import ParseError, SchemaMismatch, SteerableError
from .mlgp import MLGPParams
from .steer import SteerableModel

Model = Union[MLGPParams, SteerableModel]

_ARRAYS = {
    "ancestor": ("hidden", "output"),
    "steerable": ("banks", "origin_rotations", "gammas", "output", "coeffs"),
}


@dataclass(frozen=True)
class Checkpoint:
    """A loaded model plus the metadata stored alongside it."""

    model: Model
    kind: str
    seed: int | None = None
    config: dict[str, Any] = field(default_factory=dict)


def model_kind(model: Model) -> str:
    if isinstance(model, MLGPParams):
        return "ancestor"
    if isinstance(model, SteerableModel):
        return "steerable"
    raise TypeError(f"Cannot checkpoint object of type {type(model).__name__}.")


def _encode(array: np.ndarray) -> dict[str, Any]:
    array = np.asarray(array, dtype=np.float64)
    return {"shape": list(array.shape), "hex": [float(v).hex() for v in array.reshape(-1)]}


def _decode(name: str, payload: Any) -> np.ndarray:
    try:
        shape = tuple(int(n) for n in payload["shape"])
        values = [float.fromhex(v) for v in payload["hex"]]
        return np.array(values, dtype=np.float64).reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"Malformed array in checkpoint: {exc}", field=name) from exc


def save_checkpoint(
    model: Model,
    path: str | Path,
    seed: int | None = None,
    config: dict[str, Any] | None = None,
) -> None:
    """Write ``model`` to ``path``; identical inputs give identical bytes."""
    kind = model_kind(model)
    document = {
        "schema": CHECKPOINT_SCHEMA,
        "kind": kind,
        "class_names": list(model.class_names),
        "units": model.units,
        "seed": seed,
        "config": config or {},
        "arrays": {name: _encode(getattr(model, name)) for name in _ARRAYS[kind]},
    }
    Path(path).write_text(json.dumps(document, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint written by ``save_checkpoint``.

    Raises:
        ParseError: If the file is missing, not JSON, or lacks a field.
        SchemaMismatch: If the schema or model kind is unknown, or the arrays
            do not fit together.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"Cannot read checkpoint {str(path)!r}: {exc.strerror}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Checkpoint is not valid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(document, dict):
        raise ParseError("Checkpoint must be a JSON object.")

    schema = document.get("schema")
    if schema != CHECKPOINT_SCHEMA:
        raise SchemaMismatch(f"Unsupported checkpoint schema {schema!r}; expected {CHECKPOINT_SCHEMA!r}.")
    kind = document.get("kind")
    if kind not in _ARRAYS:
        raise SchemaMismatch(f"Unknown model kind {kind!r}.")
    for key in ("class_names", "units", "arrays"):
        if key not in document:
            raise ParseError("Checkpoint is missing a field", field=key)

    arrays = document["arrays"]
    missing = [name for name in _ARRAYS[kind] if name not in arrays]
    if missing:
        raise ParseError("Checkpoint is missing an array", field=missing[0])
    decoded = {name: _decode(name, arrays[name]) for name in _ARRAYS[kind]}

    model_cls = MLGPParams if kind == "ancestor" else SteerableModel
    try:
        model = model_cls(class_names=tuple(document["class_names"]), units=document["units"], **decoded)
    except SteerableError as exc:
        raise SchemaMismatch(f"Checkpoint arrays do not fit together: {exc}") from exc
    return Checkpoint(model=model, kind=kind, seed=document.get("seed"), config=document.get("config", {}))
