"""Unit tests for the backward-induction equilibrium solver."""

import logging
from fractions import Fraction

import pytest

from teamform.domain.errors import PreconditionError
from teamform.domain.models import Board
from teamform.operations.nash import min_payment_coalitions, solve_backward_induction


class TestMinPayment:
    """Test cheapest coalition selection."""

    def test_heavy_player_ties(self, nash_board):
        """With unit thresholds a heavy player buys the other heavy one and any light one."""
        payment, argmin = min_payment_coalitions(nash_board, 0, [Fraction(1)] * 5)
        assert payment == 2
        assert argmin == [frozenset({0, 1, 2}), frozenset({0, 1, 3}), frozenset({0, 1, 4})]

    def test_light_player_single_choice(self, nash_board):
        """A light player's cheapest team is both heavy players."""
        payment, argmin = min_payment_coalitions(nash_board, 2, [Fraction(1)] * 5)
        assert payment == 2
        assert argmin == [frozenset({0, 1, 2})]

    def test_dictator_pays_nothing(self, dictator_board):
        """A winning singleton costs nothing."""
        payment, argmin = min_payment_coalitions(dictator_board, 0, [1.0] * 5)
        assert payment == 0
        assert argmin == [frozenset({0})]

    def test_threshold_count(self, nash_board):
        """One threshold per player."""
        with pytest.raises(PreconditionError):
            min_payment_coalitions(nash_board, 0, [1.0] * 4)


class TestBackwardInduction:
    """Test the equilibrium tables and utilities."""

    def test_first_round_tables(self, nash_board):
        """Unit thresholds, payment two and eighteen kept by every proposer."""
        solution = solve_backward_induction(nash_board, 20, 10)
        tables = solution.tables
        assert tables.acceptance[0] == [1.0] * 5
        assert tables.payment[0] == [2.0] * 5
        assert tables.proposer_payoff[0] == [18.0] * 5
        assert len(tables.acceptance) == 10

    def test_single_round(self, nash_board):
        """One round uses the one-round expectation."""
        solution = solve_backward_induction(nash_board, 20, 1)
        assert solution.expected_utilities == pytest.approx((4.4, 4.4, 56 / 15, 56 / 15, 56 / 15))

    def test_ten_rounds(self, nash_board):
        """Heavy players end near 6.29 and light players near 2.47 of 20."""
        solution = solve_backward_induction(nash_board, 20, 10)
        utilities = solution.expected_utilities
        assert utilities[:2] == pytest.approx((6.2904, 6.2904), abs=1e-3)
        assert utilities[2:] == pytest.approx((2.4730,) * 3, abs=1e-3)
        assert solution.normalized[0] == pytest.approx(0.3145, abs=1e-3)
        assert solution.normalized[2] == pytest.approx(0.1237, abs=1e-3)

    @pytest.mark.parametrize("rounds", [1, 2, 5, 10])
    @pytest.mark.parametrize("integer_thresholds", [False, True])
    def test_utilities_split_the_reward(self, nash_board, rounds, integer_thresholds):
        """Expected utilities always sum to the total reward."""
        solution = solve_backward_induction(nash_board, 20, rounds, integer_thresholds)
        assert sum(solution.expected_utilities) == pytest.approx(20)
        assert sum(solution.normalized) == pytest.approx(1)

    def test_equal_power(self):
        """Symmetric players split evenly."""
        solution = solve_backward_induction(Board.parse("1 1 1 ; 2"), 12, 3)
        assert solution.expected_utilities == pytest.approx((4, 4, 4))

    def test_float_matches_exact(self, nash_board):
        """Floating point arithmetic with tolerant ties agrees with rationals."""
        exact = solve_backward_induction(nash_board, 20, 6)
        approx = solve_backward_induction(nash_board, 20, 6, exact=False)
        assert approx.expected_utilities == pytest.approx(exact.expected_utilities)

    def test_integer_thresholds_are_integral(self, nash_board):
        """Rounded thresholds stay whole numbers."""
        solution = solve_backward_induction(nash_board, 20, 5, integer_thresholds=True)
        for row in solution.tables.acceptance:
            assert all(a == int(a) for a in row)

    def test_falling_thresholds_logged_once(self, nash_board, caplog):
        """Decreasing thresholds produce one debug summary per solve and no warning."""
        with caplog.at_level(logging.DEBUG, logger="teamform.operations.nash"):
            solve_backward_induction(nash_board, 20, 10)
        falling = [record for record in caplog.records if "decrease" in record.getMessage()]
        assert len(falling) == 1
        assert falling[0].levelno == logging.DEBUG
        assert not [record for record in caplog.records if record.levelno >= logging.WARNING]

    def test_integer_thresholds_settle(self):
        """Whole-unit thresholds reach a fixed point that ranks players like Shapley values."""
        board = Board.parse("4 4 7 6 4 ; 15")
        solution = solve_backward_induction(board, 10, 10, integer_thresholds=True)
        assert solution.tables.acceptance[-1] == [2.0, 2.0, 4.0, 2.0, 2.0]
        assert solution.expected_utilities == pytest.approx((1.6, 1.6, 3.6, 1.6, 1.6))
        assert solution.normalized == pytest.approx((0.16, 0.16, 0.36, 0.16, 0.16))

    def test_invalid_horizon(self, nash_board):
        """At least one round."""
        with pytest.raises(PreconditionError):
            solve_backward_induction(nash_board, 20, 0)

    def test_invalid_reward(self, nash_board):
        """A positive reward."""
        with pytest.raises(PreconditionError):
            solve_backward_induction(nash_board, 0, 3)
