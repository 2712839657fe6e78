"""Command-line interface for training, steering and checking spherical neurons.

Subcommands:

- ``train``: fit an ancestor MLGP from a YAML config,
- ``build-steerable``: turn an ancestor checkpoint into a steerable one,
- ``eval``: accuracy of either model on a dataset, optionally rotated,
- ``known-rotation``: the noise sweep with known input rotations,
- ``verify``: the randomized property suite,
- ``make-dataset``: write a built-in dataset to a file.

Exit codes are 0 on success, 1 when a computation fails or a property does
not hold, and 2 for usage, parse and schema errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import load_config
from .constants import DEFAULT_RUNS, SKELETON_NOISE_LEVELS, TETRIS_NOISE_LEVELS
from .data import (
    BUILTIN_DATASETS,
    Dataset,
    canonicalize_dataset,
    resolve_dataset,
    save_dataset,
    split_dataset,
)
from .errors import ParseError, SchemaMismatch, SteerableError
from .experiment import accuracy, format_table, run_known_rotation, write_report_csv, write_report_json
from .geom3d import rotate_cloud, sample_rotation
from .mlgp import MLGPParams
from .steer import SteerableModel, build_steerable, set_rotation
from .train import TrainResult, train
from .verify import format_results, run_suite

logger = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    """Construct the CLI argument parser."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="Log debug messages to stderr.")

    parser = argparse.ArgumentParser(
        prog="steerable-spheres",
        description="Train spherical-neuron classifiers and steer them to known rotations.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("train", parents=[common], help="Train an ancestor MLGP from a config file.")
    p.add_argument("--config", required=True, help="YAML experiment config.")
    p.add_argument("--out", default="ancestor.json", help="Checkpoint path (default: ancestor.json).")
    p.add_argument("--seed", type=int, default=None, help="Override the config seed.")

    p = sub.add_parser("build-steerable", parents=[common], help="Build filter banks from an ancestor checkpoint.")
    p.add_argument("--checkpoint", required=True, help="Ancestor checkpoint.")
    p.add_argument("--out", default="steerable.json", help="Checkpoint path (default: steerable.json).")

    p = sub.add_parser("eval", parents=[common], help="Report accuracy of a checkpoint on a dataset.")
    p.add_argument("--checkpoint", required=True, help="Ancestor or steerable checkpoint.")
    p.add_argument(
        "--dataset",
        default=None,
        help="Built-in dataset name or file; defaults to the dataset the checkpoint was trained on.",
    )
    p.add_argument(
        "--rotate",
        action="store_true",
        help="Rotate every cloud by one seeded random rotation; steerable models are steered to it.",
    )
    p.add_argument("--seed", type=int, default=0, help="Rotation seed (default: 0).")

    p = sub.add_parser("known-rotation", parents=[common], help="Run the known-rotation noise sweep.")
    p.add_argument("--checkpoint", required=True, help="Steerable checkpoint.")
    p.add_argument("--ancestor", required=True, help="Ancestor checkpoint the steerable model was built from.")
    p.add_argument(
        "--dataset",
        default=None,
        help="Evaluation dataset (default: the <ancestor stem>-test.txt split written by train, "
        "else the training dataset).",
    )
    p.add_argument(
        "--noise",
        type=float,
        action="append",
        default=None,
        help="Noise amplitude; repeat for several levels (default depends on the data units).",
    )
    p.add_argument("--runs", type=int, default=DEFAULT_RUNS, help=f"Number of runs (default: {DEFAULT_RUNS}).")
    p.add_argument("--seed", type=int, default=0, help="Seed of run 0 (default: 0).")
    p.add_argument(
        "--out",
        default="known_rotation",
        help="Report path stem; writes <stem>.csv and <stem>.json (default: known_rotation).",
    )

    p = sub.add_parser("verify", parents=[common], help="Run the randomized property suite.")
    p.add_argument("--seed", type=int, default=0, help="Suite seed (default: 0).")
    p.add_argument("--trials", type=int, default=100, help="Trials per property (default: 100).")
    p.add_argument("--out", default=None, help="Optional JSON report path.")

    p = sub.add_parser("make-dataset", parents=[common], help="Write a built-in dataset to a file.")
    p.add_argument("--dataset", required=True, choices=BUILTIN_DATASETS, help="Built-in dataset name.")
    p.add_argument("--out", required=True, help="Output dataset file.")
    p.add_argument("--seed", type=int, default=0, help="Sampling seed for synthetic data (default: 0).")
    return parser


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _write_loss_history(result: TrainResult, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("epoch", "loss", "accuracy"))
        for epoch, (loss, acc) in enumerate(zip(result.loss_history, result.accuracy_history), start=1):
            writer.writerow((epoch, repr(loss), repr(acc)))


def _print_progress(epoch: int, loss: float, acc: float) -> None:
    print(f"epoch {epoch} loss {loss:.6f} accuracy {acc:.1f}")


def cmd_train(args: argparse.Namespace) -> None:
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)

    dataset = resolve_dataset(config.dataset, seed=config.seed)
    if config.anchors is not None:
        dataset = canonicalize_dataset(dataset, config.anchors)
    logger.info("loaded %d clouds of %d points from %s", len(dataset), dataset.points_per_shape, config.dataset)
    # With one cloud per class there is nothing to hold out; train on the whole set.
    if len(dataset) == len(dataset.class_names):
        train_set, val_set, test_set = dataset, None, None
    else:
        train_set, val_set, test_set = split_dataset(dataset, config.split, seed=config.seed)

    result = train(train_set, config.train_config(), progress=_print_progress)

    out = Path(args.out)
    save_checkpoint(result.params, out, seed=config.seed, config=config.to_dict())
    _write_loss_history(result, _sibling(out, "-loss.csv"))
    print(f"train accuracy {result.final_accuracy:.1f}% on {len(train_set)} clouds")
    if val_set is not None and test_set is not None:
        print(f"validation accuracy {accuracy(result.params, val_set):.1f}% on {len(val_set)} clouds")
        print(f"test accuracy {accuracy(result.params, test_set):.1f}% on {len(test_set)} clouds")
        save_dataset(test_set, _sibling(out, "-test.txt"))
        print(f"Saved test split to: {_sibling(out, '-test.txt')}")
    print(f"Saved checkpoint to: {out}")


def cmd_build_steerable(args: argparse.Namespace) -> None:
    checkpoint = load_checkpoint(args.checkpoint)
    if checkpoint.kind != "ancestor":
        raise SchemaMismatch(f"Expected an ancestor checkpoint, got a {checkpoint.kind} one.")
    model = build_steerable(checkpoint.model)
    save_checkpoint(model, args.out, seed=checkpoint.seed, config=checkpoint.config)
    print(f"Built {model.hidden_units * model.points_per_shape} filter banks")
    print(f"Saved checkpoint to: {args.out}")


def _evaluation_dataset(name: str | None, checkpoint: Checkpoint) -> Dataset:
    """Resolve the dataset for a checkpoint and bring it into canonical pose."""
    name = name or checkpoint.config.get("dataset")
    if not name:
        raise ParseError("No dataset given and the checkpoint does not name one", field="dataset")
    dataset = resolve_dataset(name, seed=checkpoint.seed or 0)
    anchors = checkpoint.config.get("anchors")
    if anchors is not None:
        dataset = canonicalize_dataset(dataset, tuple(anchors))
    if dataset.points_per_shape != checkpoint.model.points_per_shape:
        raise SchemaMismatch(
            f"Dataset clouds have {dataset.points_per_shape} points; "
            f"the model expects {checkpoint.model.points_per_shape}."
        )
    return dataset


def cmd_eval(args: argparse.Namespace) -> None:
    checkpoint = load_checkpoint(args.checkpoint)
    dataset = _evaluation_dataset(args.dataset, checkpoint)
    model = checkpoint.model
    if args.rotate:
        r = sample_rotation(np.random.default_rng(args.seed))
        dataset = dataset.with_points(rotate_cloud(r, dataset.points))
        if isinstance(model, SteerableModel):
            model = set_rotation(model, r)
    label = "rotated" if args.rotate else "canonical"
    print(f"{checkpoint.kind} accuracy {accuracy(model, dataset):.1f}% on {len(dataset)} {label} clouds")


def cmd_known_rotation(args: argparse.Namespace) -> None:
    steerable = load_checkpoint(args.checkpoint)
    ancestor = load_checkpoint(args.ancestor)
    if not isinstance(steerable.model, SteerableModel):
        raise SchemaMismatch(f"--checkpoint must be a steerable checkpoint, got a {steerable.kind} one.")
    if not isinstance(ancestor.model, MLGPParams):
        raise SchemaMismatch(f"--ancestor must be an ancestor checkpoint, got a {ancestor.kind} one.")
    if args.runs < 1:
        raise ParseError("Must be >= 1", field="runs")

    dataset_name = args.dataset
    if dataset_name is None:
        test_split = _sibling(Path(args.ancestor), "-test.txt")
        if test_split.is_file():
            dataset_name = str(test_split)
    dataset = _evaluation_dataset(dataset_name, ancestor)
    logger.info("known-rotation sweep on %d clouds from %s", len(dataset), dataset_name or "the training dataset")
    if args.noise is not None:
        noise = tuple(args.noise)
    else:
        noise = SKELETON_NOISE_LEVELS if dataset.units == "m" else TETRIS_NOISE_LEVELS

    report = run_known_rotation(steerable.model, ancestor.model, dataset, noise, args.runs, args.seed)
    print(f"Evaluated {len(dataset)} clouds over {args.runs} runs")
    stem = Path(args.out)
    write_report_csv(report, stem.with_suffix(".csv"))
    write_report_json(report, stem.with_suffix(".json"))
    print(format_table(report, dataset.units))
    print(f"Saved report to: {stem.with_suffix('.csv')} and {stem.with_suffix('.json')}")


def cmd_verify(args: argparse.Namespace) -> bool:
    if args.trials < 1:
        raise ParseError("Must be >= 1", field="trials")
    results = run_suite(seed=args.seed, trials=args.trials)
    print(format_results(results))
    document = {
        "seed": args.seed,
        "trials": args.trials,
        "results": [dict(dataclasses.asdict(r), passed=r.passed) for r in results],
    }
    if args.out:
        Path(args.out).write_text(json.dumps(document, indent=1) + "\n", encoding="utf-8")
        print(f"Saved report to: {args.out}")
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(
            f"FAILED {r.name}: max error {r.max_error:.3e} >= {r.tolerance:.0e}; counterexample "
            + json.dumps(r.counterexample),
            file=sys.stderr,
        )
    return not failed


def cmd_make_dataset(args: argparse.Namespace) -> None:
    dataset = resolve_dataset(args.dataset, seed=args.seed)
    save_dataset(dataset, args.out)
    print(f"Saved {len(dataset)} clouds to: {args.out}")


_COMMANDS = {
    "train": cmd_train,
    "build-steerable": cmd_build_steerable,
    "eval": cmd_eval,
    "known-rotation": cmd_known_rotation,
    "verify": cmd_verify,
    "make-dataset": cmd_make_dataset,
}


def main(argv: list[str] | None = None) -> None:
    """Run the steerable-spheres command-line workflow."""
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        ok = _COMMANDS[args.command](args)
    except (ParseError, SchemaMismatch) as exc:
        parser.error(str(exc))
    except SteerableError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        raise SystemExit(1) from exc
    except ValueError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        raise SystemExit(1) from exc

    if ok is False:
        raise SystemExit(1)
