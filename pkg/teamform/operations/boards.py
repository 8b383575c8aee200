"""Board sampling, train/test splits and board files.

Public API for drawing weighted voting boards from Gaussian weight distributions and
persisting them as line-oriented text files.
"""

from logging import getLogger
from pathlib import Path

import numpy as np
from atomicwrites import atomic_write
from pydantic import ValidationError

from teamform.domain.errors import BoardParseError, DistributionInfeasibleError, PreconditionError
from teamform.domain.models import Board, BoardDistribution, BoardSet, SplitLabel
from teamform.operations.coopgame import all_equal_power

logger = getLogger(__name__)

MAX_REJECTIONS = 10_000


def _draw_weights(dist: BoardDistribution, rng: np.random.Generator) -> np.ndarray:
    weights = rng.normal(dist.weight_mean, dist.weight_std, size=dist.n)
    if dist.integer_weights:
        weights = np.rint(weights)
    return np.maximum(weights, 1.0)


def sample_board(dist: BoardDistribution, rng: np.random.Generator) -> Board:
    """Draw one board, resampling until it satisfies the distribution's rules.

    Args:
        dist: Weight distribution
        rng: Seeded random stream

    Returns:
        Board with quota ``dist.quota`` whose grand coalition wins and, when
        ``dist.exclude_equal_power`` is set, whose agents do not all have equal power

    Raises:
        DistributionInfeasibleError: After ``MAX_REJECTIONS`` consecutive rejections
    """
    for _ in range(MAX_REJECTIONS):
        weights = _draw_weights(dist, rng)
        if weights.sum() < dist.quota:
            continue
        board = Board(weights=tuple(float(w) for w in weights), quota=dist.quota)
        if dist.exclude_equal_power and all_equal_power(board):
            continue
        return board
    raise DistributionInfeasibleError(
        f"{MAX_REJECTIONS} consecutive rejections for {dist.model_dump()}"
    )


def generate_split(
    dist: BoardDistribution,
    rng: np.random.Generator,
    n_train: int,
    n_test: int,
    seed: int = 0,
) -> tuple[BoardSet, BoardSet]:
    """Sample disjoint, internally unique train and test board sets.

    Args:
        dist: Weight distribution
        rng: Seeded random stream
        n_train: Number of training boards
        n_test: Number of test boards
        seed: Seed recorded on both sets

    Returns:
        Tuple of (train_set, test_set)
    """
    if n_train < 1 or n_test < 1:
        raise PreconditionError("both splits need at least one board")
    boards: list[Board] = []
    seen: set[Board] = set()
    duplicates = 0
    while len(boards) < n_train + n_test:
        board = sample_board(dist, rng)
        if board in seen:
            duplicates += 1
            if duplicates >= MAX_REJECTIONS:
                raise DistributionInfeasibleError(
                    f"only {len(boards)} unique boards found after {duplicates} duplicates"
                )
            continue
        duplicates = 0
        seen.add(board)
        boards.append(board)

    logger.info(f"Sampled {len(boards)} unique boards (weight std {_pooled_std(boards):.3f})")
    return (
        BoardSet(boards=boards[:n_train], label=SplitLabel.TRAIN, seed=seed),
        BoardSet(boards=boards[n_train:], label=SplitLabel.TEST, seed=seed),
    )


def _pooled_std(boards: list[Board]) -> float:
    return float(np.std([w for board in boards for w in board.weights]))


def empirical_weight_std(dist: BoardDistribution, rng: np.random.Generator, count: int) -> float:
    """Pooled standard deviation of weights over ``count`` sampled boards."""
    std = _pooled_std([sample_board(dist, rng) for _ in range(count)])
    logger.info(f"Empirical weight std over {count} boards: {std:.3f}")
    return std


def save_boards(board_set: BoardSet, path: Path) -> None:
    """Write a board set as ``w_1 ... w_n ; q`` lines with ``#`` headers."""
    n = board_set.boards[0].n if board_set.boards else 0
    lines = [
        f"# seed={board_set.seed}",
        f"# label={board_set.label.value}",
        f"# n={n}",
        *(str(board) for board in board_set.boards),
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with atomic_write(path, mode="w", encoding="utf-8", overwrite=True) as f:
        f.write("\n".join(lines) + "\n")


def load_boards(path: Path) -> BoardSet:
    """Read a board file written by ``save_boards``.

    Raises:
        BoardParseError: For malformed lines, with the 1-based line number
    """
    headers: dict[str, str] = {}
    boards: list[Board] = []
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line.lstrip("#").strip().partition("=")
            if sep:
                headers[key.strip()] = val.strip()
            continue
        try:
            board = Board.parse(line)
        except (ValueError, ValidationError) as exc:
            raise BoardParseError(number, str(exc)) from exc
        expected = int(headers.get("n", board.n))
        if board.n != expected:
            raise BoardParseError(number, f"expected {expected} weights, got {board.n}")
        boards.append(board)

    try:
        return BoardSet(
            boards=boards,
            label=SplitLabel(headers.get("label", SplitLabel.TEST.value)),
            seed=int(headers.get("seed", 0)),
        )
    except (ValueError, ValidationError) as exc:
        raise BoardParseError(0, str(exc)) from exc
