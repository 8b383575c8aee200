"""Nash-Shapley correlation orchestrator."""

from collections.abc import Sequence
from logging import getLogger
from pathlib import Path

from teamform.config import Settings
from teamform.domain.models import Board, NashCorrelationReport, NashPair
from teamform.domain.services import NashCorrelationService
from teamform.operations.coopgame import shapley_value
from teamform.operations.nash import solve_backward_induction
from teamform.orchestrators.training import Training
from teamform.state.manifest import ManifestManager
from teamform.state.outputs import write_nash_pairs, write_report
from teamform.ui import Reporter
from teamform.ui.tables import create_nash_correlation_table

logger = getLogger(__name__)


class NashCorrelation:
    """Orchestrates the comparison of equilibrium payoffs with Shapley values.

    Boards default to the sampled test split; the reward is ``harness.total_reward``.
    Acceptance thresholds are whole units unless ``harness.nash_integer_thresholds`` is off.
    """

    def __init__(self, config: Settings | None = None):
        """Initialize the Nash correlation orchestrator.

        Args:
            config: Experiment configuration. If None, creates new Settings() from environment.
        """
        self.config = config if config is not None else Settings()
        self.training = Training(self.config)
        self.service = NashCorrelationService()

    def pairs_by_rounds(
        self,
        boards: Sequence[Board],
        rounds: Sequence[int],
        integer_thresholds: bool | None = None,
    ) -> dict[int, list[NashPair]]:
        """Solve every board for every horizon and pair payoffs with Shapley values."""
        if integer_thresholds is None:
            integer_thresholds = self.config.harness.nash_integer_thresholds
        shapley = [shapley_value(board) for board in boards]
        pairs: dict[int, list[NashPair]] = {}
        for horizon in rounds:
            solutions = [
                solve_backward_induction(
                    board, self.config.harness.total_reward, horizon, integer_thresholds
                )
                for board in boards
            ]
            pairs[horizon] = self.service.pair(shapley, solutions)
        return pairs

    def run(
        self,
        boards: Sequence[Board] | None = None,
        rounds: Sequence[int] | None = None,
        integer_thresholds: bool | None = None,
        output_dir: Path | None = None,
        reporter: Reporter | None = None,
    ) -> NashCorrelationReport:
        """Run the comparison and write one pairs CSV per horizon plus ``summary.json``."""
        if reporter is None:
            reporter = Reporter()
        output_dir = output_dir or self.config.output_dir / "nash-corr"
        rounds = list(rounds or self.config.harness.nash_rounds)
        if boards is None:
            _, test_set = self.training.board_split()
            boards = test_set.boards

        with ManifestManager(
            output_dir / "manifest.json",
            "nash-corr",
            self.config.seed,
            self.config.model_dump(mode="json"),
        ) as run:
            pairs = self.pairs_by_rounds(boards, rounds, integer_thresholds)
            report = self.service.summarize(pairs)
            for horizon, horizon_pairs in pairs.items():
                path = output_dir / f"pairs_T{horizon}.csv"
                run.record_output(write_nash_pairs(path, horizon_pairs))
            run.record_output(write_report(output_dir / "summary.json", report))

        for horizon, r in sorted(report.pearson_by_rounds.items()):
            logger.info(f"T = {horizon}: Pearson r = {r:.4f} over {len(boards)} boards")
        reporter.report_table(create_nash_correlation_table(report))
        return report
