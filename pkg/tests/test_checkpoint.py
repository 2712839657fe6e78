"""Tests for checkpoint files."""

import json
from pathlib import Path

import numpy as np
import pytest

from steerable_spheres.checkpoint import load_checkpoint, model_kind, save_checkpoint
from steerable_spheres.errors import ParseError, SchemaMismatch
from steerable_spheres.geom3d import sample_rotation
from steerable_spheres.mlgp import MLGPParams
from steerable_spheres.steer import SteerableModel, build_steerable, set_rotation


def test_ancestor_round_trip_is_bit_exact(tmp_path: Path, tetris_ancestor: MLGPParams) -> None:
    """Loaded weights and metadata equal the saved ones."""
    save_checkpoint(tetris_ancestor, tmp_path / "a.json", seed=3, config={"dataset": "tetris"})
    loaded = load_checkpoint(tmp_path / "a.json")
    assert loaded.kind == "ancestor"
    assert loaded.seed == 3
    assert loaded.config == {"dataset": "tetris"}
    assert isinstance(loaded.model, MLGPParams)
    np.testing.assert_array_equal(loaded.model.hidden, tetris_ancestor.hidden)
    np.testing.assert_array_equal(loaded.model.output, tetris_ancestor.output)
    assert loaded.model.class_names == tetris_ancestor.class_names


def test_steerable_round_trip_keeps_coefficients(tmp_path: Path, tetris_ancestor: MLGPParams) -> None:
    """Banks, scales and steered coefficients survive a save and load."""
    model = set_rotation(build_steerable(tetris_ancestor), sample_rotation(np.random.default_rng(0)))
    save_checkpoint(model, tmp_path / "s.json")
    loaded = load_checkpoint(tmp_path / "s.json")
    assert loaded.kind == "steerable"
    assert isinstance(loaded.model, SteerableModel)
    for name in ("banks", "origin_rotations", "gammas", "output", "coeffs"):
        np.testing.assert_array_equal(getattr(loaded.model, name), getattr(model, name))


def test_same_model_gives_identical_bytes(tmp_path: Path, tetris_ancestor: MLGPParams) -> None:
    """Saving is deterministic."""
    save_checkpoint(tetris_ancestor, tmp_path / "a.json", seed=0)
    save_checkpoint(tetris_ancestor, tmp_path / "b.json", seed=0)
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def _edit(path: Path, **changes) -> None:
    document = json.loads(path.read_text(encoding="utf-8"))
    document.update(changes)
    path.write_text(json.dumps(document), encoding="utf-8")


def test_unknown_schema_or_kind_raises_schema_mismatch(tmp_path: Path, tetris_ancestor: MLGPParams) -> None:
    """Foreign schema versions and model kinds are rejected."""
    path = tmp_path / "a.json"
    save_checkpoint(tetris_ancestor, path)
    _edit(path, schema="steerable-spheres/checkpoint/0")
    with pytest.raises(SchemaMismatch):
        load_checkpoint(path)
    save_checkpoint(tetris_ancestor, path)
    _edit(path, kind="transformer")
    with pytest.raises(SchemaMismatch):
        load_checkpoint(path)


def test_inconsistent_arrays_raise_schema_mismatch(tmp_path: Path, tetris_ancestor: MLGPParams) -> None:
    """Arrays that do not fit the class list are a schema problem."""
    path = tmp_path / "a.json"
    save_checkpoint(tetris_ancestor, path)
    _edit(path, class_names=["just", "three", "names"])
    with pytest.raises(SchemaMismatch):
        load_checkpoint(path)


def test_unreadable_or_incomplete_files_raise_parse_error(tmp_path: Path, tetris_ancestor: MLGPParams) -> None:
    """Missing files, broken JSON and missing arrays are parse errors."""
    with pytest.raises(ParseError):
        load_checkpoint(tmp_path / "missing.json")
    (tmp_path / "broken.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError):
        load_checkpoint(tmp_path / "broken.json")
    path = tmp_path / "a.json"
    save_checkpoint(tetris_ancestor, path)
    document = json.loads(path.read_text(encoding="utf-8"))
    del document["arrays"]["output"]
    path.write_text(json.dumps(document), encoding="utf-8")
    with pytest.raises(ParseError):
        load_checkpoint(path)


def test_only_models_can_be_checkpointed() -> None:
    """Arbitrary objects have no checkpoint kind."""
    with pytest.raises(TypeError):
        model_kind(np.eye(3))
