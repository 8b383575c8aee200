"""Weighted voting games: characteristic function, pivotality and Shapley values."""

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from logging import getLogger
from math import ceil, factorial

from teamform.domain.errors import (
    BudgetExceededError,
    InvalidCoalitionError,
    PreconditionError,
    UnsupportedWeightsError,
)
from teamform.domain.models import Board, ShapleyVector
from teamform.domain.types import Coalition

logger = getLogger(__name__)

PERMUTATION_LIMIT = 10
EQUAL_POWER_TOLERANCE = 1e-9


def exact_weights(board: Board) -> tuple[list[int | Fraction], int | Fraction]:
    """Return weights and quota as ints when integral, else as decimal rationals.

    ``0.4`` becomes ``2/5`` rather than its binary expansion, so boundary sums such as
    ``0.4 + 0.4 + 0.2 >= 1`` compare exactly.
    """
    if board.has_integer_weights and float(board.quota).is_integer():
        return [int(w) for w in board.weights], int(board.quota)
    return [Fraction(str(w)) for w in board.weights], Fraction(str(board.quota))


def _check_coalition(board: Board, coalition: Coalition) -> None:
    for member in coalition:
        if not 0 <= member < board.n:
            raise InvalidCoalitionError(f"agent {member} is not on a board with {board.n} agents")


def value(board: Board, coalition: Coalition) -> int:
    """Characteristic function: 1 iff the coalition weight meets the quota.

    Args:
        board: Weighted voting game
        coalition: Agent indices

    Returns:
        1 for a winning coalition, 0 otherwise
    """
    _check_coalition(board, coalition)
    weights, quota = exact_weights(board)
    return int(sum((weights[i] for i in coalition), 0) >= quota)


def is_pivotal(board: Board, coalition: Coalition, agent: int) -> bool:
    """Return True if removing ``agent`` turns the winning ``coalition`` into a losing one."""
    if agent not in coalition:
        raise PreconditionError(f"agent {agent} is not a member of {sorted(coalition)}")
    return value(board, coalition) == 1 and value(board, coalition - {agent}) == 0


def winning_coalitions(board: Board, containing: int | None = None) -> list[Coalition]:
    """Enumerate winning coalitions, optionally restricted to those containing an agent.

    Coalitions are returned by increasing size, then lexicographically.
    """
    weights, quota = exact_weights(board)
    others = [i for i in range(board.n) if i != containing]
    fixed = () if containing is None else (containing,)
    result = []
    for size in range(len(others) + 1):
        for combo in combinations(others, size):
            members = tuple(sorted(fixed + combo))
            if members and sum((weights[i] for i in members), 0) >= quota:
                result.append(frozenset(members))
    return result


def _to_vector(counts: list[int], n: int) -> ShapleyVector:
    total = factorial(n)
    return ShapleyVector(values=tuple(float(Fraction(c, total)) for c in counts))


@lru_cache(maxsize=4096)
def shapley_permutations(board: Board) -> ShapleyVector:
    """Exact Shapley values by enumerating all agent orderings.

    Args:
        board: Weighted voting game with at most ``PERMUTATION_LIMIT`` agents

    Returns:
        Fraction of orderings in which each agent is pivotal

    Raises:
        BudgetExceededError: If the board has more than ``PERMUTATION_LIMIT`` agents
    """
    if board.n > PERMUTATION_LIMIT:
        raise BudgetExceededError(
            f"{board.n}! orderings exceed the enumeration budget; use shapley_dp"
        )
    weights, quota = exact_weights(board)
    pivots = [0] * board.n
    for order in permutations(range(board.n)):
        running = 0
        for agent in order:
            running += weights[agent]
            if running >= quota:
                pivots[agent] += 1
                break
    return _to_vector(pivots, board.n)


@lru_cache(maxsize=4096)
def shapley_dp(board: Board) -> ShapleyVector:
    """Exact Shapley values by counting swing coalitions over (size, weight).

    For each agent the coalitions of the other agents are counted by size ``s`` and
    total weight ``t``; the agent swings every coalition with ``t < q <= t + w_i``,
    which occurs in ``s! (n - 1 - s)!`` orderings.

    Raises:
        UnsupportedWeightsError: If any weight is not an integer
    """
    if not board.has_integer_weights:
        raise UnsupportedWeightsError(f"integer weights required, got {board.weights}")
    weights = [int(w) for w in board.weights]
    quota = ceil(board.quota)
    n = board.n
    total = sum(weights)
    counts = []
    for agent in range(n):
        # table[s][t]: coalitions of the other agents with s members and weight t
        table = [[0] * (total + 1) for _ in range(n)]
        table[0][0] = 1
        seen = 0
        for other in range(n):
            if other == agent:
                continue
            w = weights[other]
            seen += 1
            for size in range(seen, 0, -1):
                row, prev = table[size], table[size - 1]
                for t in range(total, w - 1, -1):
                    if prev[t - w]:
                        row[t] += prev[t - w]
        swings = 0
        for size in range(n):
            orderings = factorial(size) * factorial(n - 1 - size)
            low = max(quota - weights[agent], 0)
            for t in range(low, min(quota, total + 1)):
                swings += table[size][t] * orderings
        counts.append(swings)
    return _to_vector(counts, n)


def shapley_value(board: Board) -> ShapleyVector:
    """Exact Shapley values using the counting method whenever weights are integral."""
    if board.has_integer_weights:
        return shapley_dp(board)
    return shapley_permutations(board)


def all_equal_power(board: Board) -> bool:
    """Return True if every agent has the same Shapley value."""
    values = shapley_value(board).values
    return max(values) - min(values) <= EQUAL_POWER_TOLERANCE
