"""Known-rotation experiment.

Each run draws a random rotation R, rotates every cloud, and for every noise
amplitude a adds ``U(-a, a)`` noise to the rotated points. The steerable
model, steered with the true R, classifies the noisy rotated clouds. The
ancestor classifies the same noisy clouds rotated back by R^T, so both
models see one noise sample in their own frames and should agree up to
rounding. Both hidden vectors are compared with the ancestor's hidden
vectors on the clean canonical clouds (L1 norm over hidden units, averaged
over clouds).
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, add_uniform_noise
from .errors import SchemaMismatch
from .geom3d import rotate_cloud, sample_rotation
from .mlgp import MLGPParams, accuracy_from_logits, hidden_activations, mlgp_forward_batch
from .steer import SteerableModel, derives_from, set_rotation, steerable_forward_batch

logger = logging.getLogger(__name__)

REPORT_COLUMNS = (
    "noise",
    "steerable_accuracy_mean",
    "steerable_accuracy_std",
    "ancestor_accuracy_mean",
    "ancestor_accuracy_std",
    "steerable_l1_mean",
    "steerable_l1_std",
    "ancestor_l1_mean",
    "ancestor_l1_std",
    "paired_agreement",
    "runs",
    "seed",
)


@dataclass(frozen=True)
class NoiseLevelRow:
    """Aggregates over all runs at one noise amplitude.

    Accuracies are percentages. ``paired_agreement`` is the fraction of runs
    in which steerable and ancestor accuracies are equal.
    """

    noise: float
    steerable_accuracy_mean: float
    steerable_accuracy_std: float
    ancestor_accuracy_mean: float
    ancestor_accuracy_std: float
    steerable_l1_mean: float
    steerable_l1_std: float
    ancestor_l1_mean: float
    ancestor_l1_std: float
    paired_agreement: float
    runs: int
    seed: int


@dataclass(frozen=True)
class ExperimentReport:
    """One row per noise level, plus the per-run values behind them.

    Per-run arrays have shape ``(runs, levels)``.
    """

    rows: tuple[NoiseLevelRow, ...]
    steerable_accuracy: np.ndarray
    ancestor_accuracy: np.ndarray
    steerable_l1: np.ndarray
    ancestor_l1: np.ndarray


def hidden_l1(hidden: np.ndarray, reference: np.ndarray) -> float:
    """Mean over clouds of the L1 distance between hidden vectors."""
    return float(np.mean(np.sum(np.abs(hidden - reference), axis=-1)))


def accuracy(model: MLGPParams | SteerableModel, dataset: Dataset) -> float:
    """Percentage of ``dataset`` an ancestor or steerable model classifies correctly."""
    if isinstance(model, SteerableModel):
        logits = steerable_forward_batch(model, dataset.points).logits
    else:
        logits = mlgp_forward_batch(model, dataset.points).logits
    return accuracy_from_logits(logits, dataset.labels)


def run_known_rotation(
    model: SteerableModel,
    params: MLGPParams,
    dataset: Dataset,
    noise_levels: tuple[float, ...],
    runs: int,
    seed: int,
) -> ExperimentReport:
    """Run the known-rotation experiment.

    Run ``i`` draws from ``numpy.random.default_rng(seed + i)``: first the
    rotation, then one noise sample per level in the given order.

    Raises:
        SchemaMismatch: If ``model`` was not built from ``params``.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1.")
    if not noise_levels:
        raise ValueError("At least one noise level is required.")
    if not derives_from(model, params):
        raise SchemaMismatch("The steerable model was not built from this ancestor.")

    clouds = dataset.points
    labels = dataset.labels
    reference = hidden_activations(params, clouds)
    shape = (runs, len(noise_levels))
    acc_s, acc_a, l1_s, l1_a = (np.empty(shape) for _ in range(4))

    for run in range(runs):
        rng = np.random.default_rng(seed + run)
        r = sample_rotation(rng)
        steered = set_rotation(model, r)
        rotated = rotate_cloud(r, clouds)
        for j, amplitude in enumerate(noise_levels):
            noisy = add_uniform_noise(rotated, amplitude, rng)
            trace_s = steerable_forward_batch(steered, noisy)
            trace_a = mlgp_forward_batch(params, rotate_cloud(r.T, noisy))
            acc_s[run, j] = accuracy_from_logits(trace_s.logits, labels)
            acc_a[run, j] = accuracy_from_logits(trace_a.logits, labels)
            l1_s[run, j] = hidden_l1(trace_s.hidden_pre, reference)
            l1_a[run, j] = hidden_l1(trace_a.hidden_pre, reference)

    rows = tuple(
        NoiseLevelRow(
            noise=float(amplitude),
            steerable_accuracy_mean=float(acc_s[:, j].mean()),
            steerable_accuracy_std=float(acc_s[:, j].std()),
            ancestor_accuracy_mean=float(acc_a[:, j].mean()),
            ancestor_accuracy_std=float(acc_a[:, j].std()),
            steerable_l1_mean=float(l1_s[:, j].mean()),
            steerable_l1_std=float(l1_s[:, j].std()),
            ancestor_l1_mean=float(l1_a[:, j].mean()),
            ancestor_l1_std=float(l1_a[:, j].std()),
            paired_agreement=float(np.mean(acc_s[:, j] == acc_a[:, j])),
            runs=runs,
            seed=seed,
        )
        for j, amplitude in enumerate(noise_levels)
    )
    logger.info("known-rotation: %d runs over %d noise levels", runs, len(noise_levels))
    return ExperimentReport(
        rows=rows,
        steerable_accuracy=acc_s,
        ancestor_accuracy=acc_a,
        steerable_l1=l1_s,
        ancestor_l1=l1_a,
    )


def write_report_csv(report: ExperimentReport, path: str | Path) -> None:
    """Write one CSV line per noise level with the ``REPORT_COLUMNS`` header."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in report.rows:
            values = asdict(row)
            writer.writerow([repr(values[c]) for c in REPORT_COLUMNS])


def write_report_json(report: ExperimentReport, path: str | Path) -> None:
    """Write the same rows as the CSV file, as a JSON list of objects."""
    rows = [{c: asdict(row)[c] for c in REPORT_COLUMNS} for row in report.rows]
    Path(path).write_text(json.dumps({"columns": list(REPORT_COLUMNS), "rows": rows}, indent=1) + "\n", encoding="utf-8")


def read_report_csv(path: str | Path) -> list[dict[str, float]]:
    """Read a report CSV back into dictionaries of numbers."""
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return [
            {key: (int(value) if key in ("runs", "seed") else float(value)) for key, value in line.items()}
            for line in csv.DictReader(handle)
        ]


def format_table(report: ExperimentReport, units: str) -> str:
    """Console table: accuracy as mean±std with one decimal, L1 with two."""
    header = f"{'noise [' + units + ']':>14}  {'steerable %':>12}  {'ancestor %':>12}  {'steerable L1':>12}  {'ancestor L1':>12}"
    lines = [header]
    for row in report.rows:
        lines.append(
            f"{row.noise:>14g}  "
            f"{row.steerable_accuracy_mean:>6.1f}±{row.steerable_accuracy_std:<5.1f}  "
            f"{row.ancestor_accuracy_mean:>6.1f}±{row.ancestor_accuracy_std:<5.1f}  "
            f"{row.steerable_l1_mean:>6.2f}±{row.steerable_l1_std:<5.2f}  "
            f"{row.ancestor_l1_mean:>6.2f}±{row.ancestor_l1_std:<5.2f}"
        )
    return "\n".join(lines)
