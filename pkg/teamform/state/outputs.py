"""CSV outputs with fixed headers and round-trippable floats, plus JSON summaries."""

import csv
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
import orjson
from atomicwrites import atomic_write
from pydantic import BaseModel

from teamform.domain.models import (
    Board,
    CorrespondencePair,
    EvaluationResult,
    LearningCurvePoint,
    NashPair,
    NashSolution,
    PerturbationPoint,
    ShapleyVector,
)

PAIRS_HEADER = ("board", "seat", "shapley", "share")
CURVE_HEADER = ("episode", "seat", "mean_reward")
NASH_HEADER = ("player", "expected_utility", "normalized")
NASH_PAIRS_HEADER = ("board", "seat", "shapley", "nash_share")
PERTURBATION_HEADER = ("offset", "perturbed_share", "unperturbed_share")
SHAPLEY_HEADER = ("board", "seat", "weight", "shapley")
EVALUATION_HEADER = ("board", "seat", "mean_reward", "share")
REGRESSION_HEADER = ("board", "seat", "target", "prediction")
COMPARISON_HEADER = ("group", "population", "seat", "board", "share")


def _cell(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Atomically write a CSV file; floats use ``repr`` so they parse back exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with atomic_write(path, mode="w", encoding="utf-8", newline="", overwrite=True) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([_cell(value) for value in row] for row in rows)
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    """Read a CSV file into header-keyed rows."""
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def write_pairs(path: str | Path, pairs: Iterable[CorrespondencePair]) -> Path:
    """Shapley prediction against normalized share per (board, seat)."""
    return write_csv(path, PAIRS_HEADER, ((p.board, p.seat, p.shapley, p.share) for p in pairs))


def write_curves(path: str | Path, points: Iterable[LearningCurvePoint]) -> Path:
    """Learning curves."""
    return write_csv(path, CURVE_HEADER, ((p.episode, p.seat, p.mean_reward) for p in points))


def write_nash(path: str | Path, solution: NashSolution) -> Path:
    """Expected and normalized equilibrium utilities per player."""
    rows = zip(
        range(solution.board.n), solution.expected_utilities, solution.normalized, strict=True
    )
    return write_csv(path, NASH_HEADER, rows)


def write_nash_pairs(path: str | Path, pairs: Iterable[NashPair]) -> Path:
    """Shapley value against normalized equilibrium payoff per (board, seat)."""
    rows = ((p.board, p.seat, p.shapley, p.nash_share) for p in pairs)
    return write_csv(path, NASH_PAIRS_HEADER, rows)


def write_perturbation(path: str | Path, points: Iterable[PerturbationPoint]) -> Path:
    """Max-weight agent share per spawn offset."""
    rows = ((p.offset, p.perturbed_share, p.unperturbed_share) for p in points)
    return write_csv(path, PERTURBATION_HEADER, rows)


def write_comparison_samples(
    path: str | Path, rows: Iterable[tuple[str, int, int, int, float]]
) -> Path:
    """Per (group, population, seat, board) shares behind a bot comparison."""
    return write_csv(path, COMPARISON_HEADER, rows)


def write_evaluation(
    path: str | Path, results: Sequence[EvaluationResult], total_reward: float
) -> Path:
    """Mean reward and normalized share per (board, seat)."""
    rows = (
        (j, i, mean, mean / total_reward)
        for j, result in enumerate(results)
        for i, mean in enumerate(result.mean_rewards)
    )
    return write_csv(path, EVALUATION_HEADER, rows)


def write_shapley(
    path: str | Path, boards: Sequence[Board], vectors: Sequence[ShapleyVector]
) -> Path:
    """Weight and Shapley value per (board, seat)."""
    rows = (
        (j, i, board.weights[i], phi[i])
        for j, (board, phi) in enumerate(zip(boards, vectors, strict=True))
        for i in range(board.n)
    )
    return write_csv(path, SHAPLEY_HEADER, rows)


def write_regression(path: str | Path, targets: np.ndarray, predictions: np.ndarray) -> Path:
    """Target against predicted Shapley value per held-out (board, seat)."""
    rows = (
        (j, i, float(targets[j, i]), float(predictions[j, i]))
        for j in range(targets.shape[0])
        for i in range(targets.shape[1])
    )
    return write_csv(path, REGRESSION_HEADER, rows)


def write_report(path: str | Path, report: BaseModel) -> Path:
    """Atomically write a summary model as indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = orjson.dumps(
        report.model_dump(mode="json"), option=orjson.OPT_INDENT_2 | orjson.OPT_NON_STR_KEYS
    )
    with atomic_write(path, mode="wb", overwrite=True) as f:
        f.write(payload)
        f.write(b"\n")
    return path
