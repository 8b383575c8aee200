"""Stateless algorithms.

This module provides Shapley values of weighted voting games, board sampling and
files, backward-induction equilibria and the statistics used by the experiments.
"""

from teamform.operations.boards import generate_split, load_boards, sample_board, save_boards
from teamform.operations.coopgame import (
    shapley_dp,
    shapley_permutations,
    shapley_value,
    value,
    winning_coalitions,
)
from teamform.operations.nash import solve_backward_induction
from teamform.operations.stats import mann_whitney_u, pearson, spearman

__all__ = [
    "value",
    "winning_coalitions",
    "shapley_permutations",
    "shapley_dp",
    "shapley_value",
    "sample_board",
    "generate_split",
    "save_boards",
    "load_boards",
    "solve_backward_induction",
    "mann_whitney_u",
    "pearson",
    "spearman",
]
