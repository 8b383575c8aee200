"""Unit tests for table rendering utilities."""

from rich.console import Console

from teamform.domain.models import (
    ComparisonResult,
    EvaluationResult,
    PerturbationPoint,
    PerturbationReport,
    SeatComparison,
)
from teamform.operations.coopgame import shapley_value
from teamform.operations.nash import solve_backward_induction
from teamform.ui.tables import (
    create_comparison_table,
    create_evaluation_table,
    create_nash_table,
    create_perturbation_table,
    create_shapley_table,
)


def render(table) -> str:
    console = Console(width=200, record=True)
    console.print(table)
    return console.export_text()


class TestShapleyTable:
    """Test Shapley value tables."""

    def test_one_row_per_agent(self, example_board):
        """Weights and values for every agent."""
        table = create_shapley_table(example_board, shapley_value(example_board))
        assert [col.header for col in table.columns] == ["Agent", "Weight", "Shapley"]
        assert table.row_count == 5
        assert "5 6 7 5 4 ; 15" in render(table)


class TestNashTable:
    """Test equilibrium tables."""

    def test_normalized_utilities(self, nash_board):
        """Normalized utilities appear with four decimals."""
        table = create_nash_table(solve_backward_induction(nash_board, 20, 10))
        text = render(table)
        assert table.row_count == 5
        assert "0.3145" in text


class TestEvaluationTable:
    """Test evaluation tables."""

    def test_shares_in_cells(self, example_board):
        """Mean rewards come with their share of r."""
        result = EvaluationResult(
            board=example_board, mean_rewards=(2.0, 1.0, 1.0, 1.0, 1.0), episode_rewards=[]
        )
        table = create_evaluation_table([result], 6)
        assert len(table.columns) == 6
        assert "2.000 (0.33)" in render(table)


class TestComparisonTable:
    """Test comparison tables."""

    def test_total_row_and_caption(self):
        """Per-seat rows, a total row and the test in the caption."""
        result = ComparisonResult(
            rl_mean_share=0.3,
            bot_mean_share=0.2,
            difference=0.1,
            u_statistic=12.0,
            p_value=0.04,
            n_rl=5,
            n_bot=5,
            per_seat=[SeatComparison(seat=0, rl_mean_share=0.3, bot_mean_share=0.2)],
        )
        table = create_comparison_table(result, "weight")
        assert table.title == "RL agents vs weight bot"
        assert table.row_count == 2
        assert "p = 0.04" in table.caption


class TestPerturbationTable:
    """Test perturbation tables."""

    def test_caption_has_correlation(self):
        """The Spearman coefficient is the caption."""
        report = PerturbationReport(
            points=[PerturbationPoint(offset=0, perturbed_share=0.4, unperturbed_share=0.3)],
            spearman=-0.5,
        )
        table = create_perturbation_table(report)
        assert table.row_count == 1
        assert table.caption == "Spearman rho(offset, share) = -0.5000"
