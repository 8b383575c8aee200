"""Backward-induction equilibrium of the fixed-horizon Propose-Accept game.

With ``t`` rounds remaining every player ``i`` holds an acceptance threshold ``a[t][i]``:
the smallest offer it accepts instead of moving on. A proposer pays the cheapest
winning coalition containing itself exactly those thresholds and keeps the rest. One
more round of play is worth, to each player, the expectation over a uniformly drawn
proposer that picks uniformly among its cheapest coalitions; that expectation plus one
is the threshold of the next round.
"""

from collections.abc import Sequence
from fractions import Fraction
from logging import getLogger
from math import floor, isclose, isfinite

from teamform.domain.errors import PreconditionError
from teamform.domain.models import Board, NashSolution, NashTables
from teamform.domain.types import Coalition
from teamform.operations.coopgame import winning_coalitions

logger = getLogger(__name__)

Number = Fraction | float

TIE_REL_TOL = 1e-9


def min_payment_coalitions(
    board: Board, agent: int, thresholds: Sequence[Number]
) -> tuple[Number, list[Coalition]]:
    """Cheapest winning coalitions containing ``agent`` under the given thresholds.

    Exact (``Fraction``) thresholds select ties by equality; float thresholds by a
    ``TIE_REL_TOL`` relative tolerance.

    Args:
        board: Weighted voting game
        agent: Proposing player
        thresholds: Acceptance threshold of every player

    Returns:
        Tuple of (minimal payment to the other members, every coalition achieving it)
    """
    if len(thresholds) != board.n:
        raise PreconditionError(f"expected {board.n} thresholds, got {len(thresholds)}")
    if any(not isfinite(a) or a <= 0 for a in thresholds):
        raise PreconditionError(f"thresholds must be finite and positive: {list(thresholds)}")
    exact = all(isinstance(a, Fraction | int) for a in thresholds)

    best: Number | None = None
    argmin: list[Coalition] = []
    for coalition in winning_coalitions(board, containing=agent):
        cost = sum((thresholds[j] for j in coalition if j != agent), Fraction(0) if exact else 0.0)
        if best is None or (cost < best and not _tied(cost, best, exact)):
            best, argmin = cost, [coalition]
        elif _tied(cost, best, exact):
            argmin.append(coalition)
    # the grand coalition always wins
    assert best is not None
    return best, argmin


def _tied(cost: Number, best: Number, exact: bool) -> bool:
    if exact:
        return cost == best
    return isclose(cost, best, rel_tol=TIE_REL_TOL)


def _expected_payoffs(
    thresholds: Sequence[Number],
    payoffs: Sequence[Number],
    argmins: Sequence[list[Coalition]],
) -> list[Number]:
    n = len(thresholds)
    expected = []
    for i in range(n):
        total = payoffs[i] / n
        for j in range(n):
            if j == i:
                continue
            members = sum(1 for coalition in argmins[j] if i in coalition)
            total += thresholds[i] * members / (n * len(argmins[j]))
        expected.append(total)
    return expected


def solve_backward_induction(
    board: Board,
    total_reward: int,
    rounds: int,
    integer_thresholds: bool = False,
    exact: bool = True,
) -> NashSolution:
    """Fill the equilibrium tables for ``rounds`` rounds and derive expected utilities.

    The expected utility with ``T`` rounds is ``a[T-1] - 1``, the value of playing the
    ``T-1`` rounds after the first. For ``T = 1`` this would be zero for everyone, so a
    single-round game uses the one-round expectation instead and thus coincides with
    ``T = 2``; the utilities always sum to ``total_reward``.

    Args:
        board: Weighted voting game
        total_reward: Reward ``r`` split by an accepted proposal
        rounds: Horizon ``T``
        integer_thresholds: Use ``floor(expectation) + 1`` instead of ``1 + expectation``
        exact: Rational arithmetic; floats with tolerant tie-breaking otherwise

    Returns:
        Tables for ``t = 0 .. T-1`` with expected and normalized utilities
    """
    if rounds < 1:
        raise PreconditionError(f"rounds must be at least 1, got {rounds}")
    if total_reward < 1:
        raise PreconditionError(f"total reward must be positive, got {total_reward}")

    n = board.n
    one: Number = Fraction(1) if exact else 1.0
    thresholds: list[Number] = [one] * n
    tables = NashTables(acceptance=[], payment=[], proposer_payoff=[], coalitions=[])
    expectations: list[list[Number]] = []
    falling_rounds: list[int] = []

    for t in range(rounds):
        payments, argmins = zip(
            *(min_payment_coalitions(board, i, thresholds) for i in range(n)), strict=True
        )
        payoffs = [total_reward - g for g in payments]
        expected = _expected_payoffs(thresholds, payoffs, argmins)

        tables.acceptance.append([float(a) for a in thresholds])
        tables.payment.append([float(g) for g in payments])
        tables.proposer_payoff.append([float(d) for d in payoffs])
        tables.coalitions.append(list(argmins))
        expectations.append(expected)

        if integer_thresholds:
            following = [one * (floor(e) + 1) for e in expected]
        else:
            following = [one + e for e in expected]
        if any(f < a for f, a in zip(following, thresholds, strict=True)):
            falling_rounds.append(t + 1)
        thresholds = following

    if falling_rounds:
        logger.debug(f"Acceptance thresholds of {board} decrease at t in {falling_rounds}")

    utilities = [float(v) for v in expectations[max(rounds - 2, 0)]]
    total = sum(utilities)
    logger.debug(f"Solved {board} with r={total_reward}, T={rounds}: {utilities}")
    return NashSolution(
        board=board,
        total_reward=total_reward,
        rounds=rounds,
        integer_thresholds=integer_thresholds,
        tables=tables,
        expected_utilities=tuple(utilities),
        normalized=tuple(v / total for v in utilities),
    )
