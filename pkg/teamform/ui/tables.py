"""Table rendering utilities for CLI output."""

from rich.table import Table

from teamform.domain.models import (
    Board,
    ComparisonResult,
    CorrespondenceReport,
    EvaluationResult,
    NashCorrelationReport,
    NashSolution,
    PerturbationReport,
    ShapleyVector,
)


def create_shapley_table(board: Board, shapley: ShapleyVector) -> Table:
    """Create a table of weights and Shapley values of one board.

    Args:
        board: Weighted voting game
        shapley: Its Shapley values

    Returns:
        Rich Table object ready for display
    """
    table = Table(title=f"Shapley values of [{board}]")
    table.add_column("Agent", justify="right", style="cyan")
    table.add_column("Weight", justify="right")
    table.add_column("Shapley", justify="right", style="green")
    for i, (w, phi) in enumerate(zip(board.weights, shapley.values, strict=True)):
        table.add_row(str(i), f"{w:g}", f"{phi:.4f}")
    return table


def create_nash_table(solution: NashSolution) -> Table:
    """Create a table of equilibrium utilities and the last round's thresholds."""
    table = Table(
        title=f"Equilibrium of [{solution.board}], r={solution.total_reward}, T={solution.rounds}"
    )
    table.add_column("Player", justify="right", style="cyan")
    table.add_column("Threshold", justify="right", style="dim")
    table.add_column("Expected utility", justify="right")
    table.add_column("Normalized", justify="right", style="green")
    thresholds = solution.tables.acceptance[-1]
    for i in range(solution.board.n):
        table.add_row(
            str(i),
            f"{thresholds[i]:.4f}",
            f"{solution.expected_utilities[i]:.4f}",
            f"{solution.normalized[i]:.4f}",
        )
    return table


def create_evaluation_table(results: list[EvaluationResult], total_reward: float) -> Table:
    """Create a table of mean rewards per board and seat."""
    n = max(len(r.mean_rewards) for r in results)
    table = Table(title=f"Evaluation ({len(results)} boards)")
    table.add_column("Board", style="cyan")
    for i in range(n):
        table.add_column(f"Seat {i}", justify="right")
    for result in results:
        cells = [f"{m:.3f} ({m / total_reward:.2f})" for m in result.mean_rewards]
        table.add_row(str(result.board), *cells)
    return table


def create_correspondence_table(report: CorrespondenceReport) -> Table:
    """Create a summary table of a correspondence run."""
    table = Table(title=f"Shapley correspondence ({len(report.pairs)} pairs)")
    table.add_column("Statistic", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("Pearson r", f"{report.pearson:.4f}")
    table.add_row("Mean |share - shapley|", f"{report.mean_abs_deviation:.4f}")
    table.add_row("Trend line", f"{report.slope:.3f} x + {report.intercept:.3f}")
    if report.inequality_pearson is not None:
        table.add_row("r(shapley std, deviation)", f"{report.inequality_pearson:.4f}")
    return table


def create_comparison_table(result: ComparisonResult, bot_label: str) -> Table:
    """Create a table of RL against bot shares with the per-seat breakdown."""
    table = Table(title=f"RL agents vs {bot_label} bot")
    table.add_column("Seat", style="cyan")
    table.add_column("RL share", justify="right", style="green")
    table.add_column("Bot share", justify="right", style="yellow")
    table.add_column("Difference", justify="right")
    for seat in result.per_seat:
        table.add_row(
            str(seat.seat),
            f"{seat.rl_mean_share:.4f}",
            f"{seat.bot_mean_share:.4f}",
            f"{seat.rl_mean_share - seat.bot_mean_share:+.4f}",
        )
    table.add_row(
        "[bold]All[/bold]",
        f"[bold]{result.rl_mean_share:.4f}[/bold]",
        f"[bold]{result.bot_mean_share:.4f}[/bold]",
        f"[bold]{result.difference:+.4f}[/bold]",
    )
    table.caption = (
        f"U = {result.u_statistic:g}, p = {result.p_value:.3g} "
        f"(n = {result.n_rl} vs {result.n_bot})"
    )
    return table


def create_perturbation_table(report: PerturbationReport) -> Table:
    """Create a table of max-weight agent shares per spawn offset."""
    table = Table(title="Spatial perturbation")
    table.add_column("Offset", justify="right", style="cyan")
    table.add_column("Perturbed", justify="right", style="green")
    table.add_column("Unperturbed", justify="right", style="dim")
    for point in report.points:
        table.add_row(
            str(point.offset), f"{point.perturbed_share:.4f}", f"{point.unperturbed_share:.4f}"
        )
    table.caption = f"Spearman rho(offset, share) = {report.spearman:.4f}"
    return table


def create_nash_correlation_table(report: NashCorrelationReport) -> Table:
    """Create a table of the Nash-Shapley correlation per horizon."""
    table = Table(title=f"Nash-Shapley correlation ({len(report.pairs)} pairs)")
    table.add_column("Rounds", justify="right", style="cyan")
    table.add_column("Pearson r", justify="right", style="green")
    for rounds, r in sorted(report.pearson_by_rounds.items()):
        table.add_row(str(rounds), f"{r:.4f}")
    return table
