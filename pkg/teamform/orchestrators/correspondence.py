"""Shapley correspondence orchestrator.

Trains populations on the train split, evaluates them frozen on the test boards and
pairs each seat's normalized share with its Shapley value.
"""

from logging import getLogger
from pathlib import Path

import numpy as np

from teamform.config import Settings
from teamform.domain.models import CorrespondenceReport, EnvKind
from teamform.domain.services import CorrespondenceService
from teamform.learning.population import as_sequence
from teamform.operations.boards import empirical_weight_std, save_boards
from teamform.operations.coopgame import shapley_value
from teamform.orchestrators.training import Training
from teamform.state.manifest import ManifestManager
from teamform.state.outputs import write_curves, write_pairs, write_report
from teamform.ui import Reporter
from teamform.ui.tables import create_correspondence_table

logger = getLogger(__name__)


class Correspondence:
    """Orchestrates the Shapley correspondence experiment.

    Shares are averaged over ``harness.population_seeds`` independently trained
    populations; only the first ``harness.n_boards`` test boards are evaluated.
    """

    def __init__(self, config: Settings | None = None):
        """Initialize the correspondence orchestrator.

        Args:
            config: Experiment configuration. If None, creates new Settings() from environment.
        """
        self.config = config if config is not None else Settings()
        self.training = Training(self.config)
        self.service = CorrespondenceService()

    def run(
        self,
        env_kind: EnvKind,
        reduced_variance: bool = False,
        shapley_aware: bool | None = None,
        output_dir: Path | None = None,
        reporter: Reporter | None = None,
    ) -> CorrespondenceReport:
        """Run the experiment and write its outputs.

        Args:
            env_kind: Environment the populations play
            reduced_variance: Keep equal-power boards (the reduced-variance distribution)
            shapley_aware: Override the Propose-Accept Shapley observation flag
            output_dir: Output directory (defaults to ``<output_dir>/correspondence``)
            reporter: Optional reporter for progress and results

        Returns:
            CorrespondenceReport over every (test board, seat) pair
        """
        if reporter is None:
            reporter = Reporter()
        output_dir = output_dir or self.config.output_dir / "correspondence"
        harness = self.config.harness
        pa, tp, rl = self.training.experiment_configs()
        if shapley_aware is not None:
            pa = pa.model_copy(update={"shapley_aware": shapley_aware})
        dist = self.config.boards.model_copy(update={"exclude_equal_power": not reduced_variance})

        board_seed, std_seed, *population_seeds = as_sequence(self.config.seed).spawn(
            2 + harness.population_seeds
        )
        train_set, test_set = self.training.board_split(board_seed, dist)
        boards = test_set.boards[: harness.n_boards]
        weight_std = empirical_weight_std(dist, np.random.default_rng(std_seed), 1_000)
        logger.info(f"Correspondence on {len(boards)} boards, weight std {weight_std:.3f}")

        with ManifestManager(
            output_dir / "manifest.json",
            "correspondence",
            self.config.seed,
            self.config.model_dump(mode="json"),
        ) as run:
            for board_set in (train_set, test_set):
                path = output_dir / f"{board_set.label.value}.boards"
                save_boards(board_set, path)
                run.record_output(path)

            means = np.zeros((len(boards), dist.n))
            with reporter.progress_context():
                for k, seed in enumerate(population_seeds):
                    train_seed, eval_seed = seed.spawn(2)
                    population = self.training.train(
                        env_kind,
                        train_set.boards,
                        train_seed,
                        rl,
                        pa,
                        tp,
                        reporter=reporter,
                        label=f"Population {k}",
                    )
                    results = self.training.evaluate(
                        population,
                        boards,
                        eval_seed,
                        harness.eval_episodes,
                        pa,
                        tp,
                        progress=reporter.create_experiment_progress_hook(f"Evaluating {k}"),
                    )
                    means += np.array([result.mean_rewards for result in results])
                    curves_path = output_dir / f"curves_{k}.csv"
                    run.record_output(write_curves(curves_path, population.curves))
            means /= len(population_seeds)

            pairs = self.service.pair(
                [shapley_value(board) for board in boards],
                means.tolist(),
                self.training.total_reward(env_kind, pa, tp),
            )
            report = self.service.summarize(pairs, boards)
            run.record_output(write_pairs(output_dir / "pairs.csv", pairs))
            run.record_output(write_report(output_dir / "summary.json", report))

        logger.info(
            f"Pearson r = {report.pearson:.4f}, "
            f"mean |s - phi| = {report.mean_abs_deviation:.4f}"
        )
        reporter.report_table(create_correspondence_table(report))
        return report
