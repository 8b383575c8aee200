"""Team formation in weighted voting games.

A Python library for measuring how reinforcement learning agents negotiating team
rewards relate to the Shapley value and to equilibrium predictions.

Quick Start (High-Level API):
    >>> from teamform import shapley_value
    >>> shapley_value("49 49 2 ; 50").values
    (0.3333333333333333, 0.3333333333333333, 0.3333333333333333)

    >>> from teamform import solve_nash
    >>> solve_nash("0.4 0.4 0.2 0.2 0.2 ; 1", total_reward=20, rounds=10).normalized

Quick Start (SDK API):
    >>> from teamform import Correspondence, EnvKind, Settings
    >>> config = Settings(seed=7)
    >>> report = Correspondence(config).run(EnvKind.PROPOSE_ACCEPT)
    >>> report.pearson

Configuration:
    >>> import os
    >>> os.environ["TEAMFORM_HARNESS__TRAINING_EPISODES"] = "20000"
    >>> config = Settings()  # Loads from environment

    >>> config = Settings.from_toml("experiment.toml", seed=3)

Public API:
    High-level functions:
        - shapley_value: Exact Shapley values of a board
        - solve_nash: Backward-induction equilibrium of Propose-Accept
        - generate_boards: Sampled train and test boards

    Orchestrators:
        - Training: Training, evaluation and checkpoints
        - Correspondence: Shapley correspondence experiment
        - BotComparison: Learners against hand-crafted bots
        - Perturbation: Spatial perturbation sweep
        - Regression: Supervised Shapley regression
        - NashCorrelation: Equilibrium payoffs against Shapley values

    Configuration:
        - Settings: Configuration model

    Domain Models:
        - Board: Weighted voting game
        - ShapleyVector: Shapley values of a board
        - BoardSet: Labelled list of boards
        - NashSolution: Equilibrium tables and utilities

    Reporters (for custom UIs):
        - Reporter: Progress reporter (use silent=True for headless mode)
"""

import numpy as np

# Configuration
from teamform.config import Settings

# Domain models
from teamform.domain import (
    Board,
    BoardDistribution,
    BoardSet,
    BotMode,
    EnvKind,
    NashSolution,
    ShapleyVector,
    TeamformError,
)

# Operations
from teamform.operations import coopgame
from teamform.operations.boards import generate_split
from teamform.operations.nash import solve_backward_induction

# Orchestrators
from teamform.orchestrators import (
    BotComparison,
    Correspondence,
    NashCorrelation,
    Perturbation,
    Regression,
    Training,
)

# UI Reporters
from teamform.ui import Reporter

__all__ = [
    # High-level functions
    "shapley_value",
    "solve_nash",
    "generate_boards",
    # Orchestrators
    "Training",
    "Correspondence",
    "BotComparison",
    "Perturbation",
    "Regression",
    "NashCorrelation",
    # Configuration
    "Settings",
    # Domain models
    "Board",
    "BoardDistribution",
    "BoardSet",
    "BotMode",
    "EnvKind",
    "NashSolution",
    "ShapleyVector",
    "TeamformError",
    # Reporters
    "Reporter",
]


def _as_board(board: Board | str) -> Board:
    return Board.parse(board) if isinstance(board, str) else board


# High-level convenience functions
def shapley_value(board: Board | str) -> ShapleyVector:
    """Exact Shapley values of a board (high-level convenience function).

    Args:
        board: Board, or its text form ``"w_1 ... w_n ; q"``

    Example:
        >>> from teamform import shapley_value
        >>> shapley_value("16 1 1 1 1 ; 15").values
        (1.0, 0.0, 0.0, 0.0, 0.0)
    """
    return coopgame.shapley_value(_as_board(board))


def solve_nash(
    board: Board | str,
    total_reward: int = 20,
    rounds: int = 10,
    integer_thresholds: bool = False,
) -> NashSolution:
    """Equilibrium of the finite-horizon Propose-Accept game (high-level convenience function).

    Args:
        board: Board, or its text form
        total_reward: Reward ``r`` split by the winning team
        rounds: Horizon ``T``
        integer_thresholds: Round acceptance thresholds up to integers

    Example:
        >>> from teamform import solve_nash
        >>> solve_nash("1 1 1 ; 2", total_reward=12, rounds=3).normalized
    """
    return solve_backward_induction(_as_board(board), total_reward, rounds, integer_thresholds)


def generate_boards(
    dist: BoardDistribution | None = None,
    n_train: int = 150,
    n_test: int = 50,
    seed: int = 0,
) -> tuple[BoardSet, BoardSet]:
    """Sample unique, disjoint train and test boards (high-level convenience function).

    Args:
        dist: Weight distribution. If None, uses the default distribution.
        n_train: Number of training boards
        n_test: Number of test boards
        seed: Sampling seed

    Example:
        >>> from teamform import generate_boards
        >>> train, test = generate_boards(n_train=10, n_test=5, seed=1)
        >>> len(test.boards)
        5
    """
    rng = np.random.default_rng(seed)
    return generate_split(dist or BoardDistribution(), rng, n_train, n_test, seed=seed)
