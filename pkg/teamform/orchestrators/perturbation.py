"""Spatial perturbation orchestrator.

Moves the heaviest agent's spawn cell away from the nearest patch and records its
share of the reward at every offset, against a control layout where it spawns with
everyone else.
"""

from collections.abc import Sequence
from logging import getLogger
from pathlib import Path

import numpy as np

from teamform.config import Settings
from teamform.domain.models import Board, EnvKind, PerturbationPoint, PerturbationReport, TPConfig
from teamform.domain.services import PerturbationService, normalized_share
from teamform.envs.team_patches import perturbation_layout
from teamform.learning.population import SeedLike, as_sequence
from teamform.orchestrators.training import Training
from teamform.state.manifest import ManifestManager
from teamform.state.outputs import write_perturbation, write_report
from teamform.ui import Reporter
from teamform.ui.tables import create_perturbation_table

logger = getLogger(__name__)


class Perturbation:
    """Orchestrates the spawn-offset sweep in Team Patches."""

    def __init__(self, config: Settings | None = None):
        """Initialize the perturbation orchestrator.

        Args:
            config: Experiment configuration. If None, creates new Settings() from environment.
        """
        self.config = config if config is not None else Settings()
        self.training = Training(self.config)
        self.service = PerturbationService()

    def _max_weight_share(
        self,
        board: Board,
        tp: TPConfig,
        seeds: Sequence[SeedLike],
        reporter: Reporter,
        label: str,
    ) -> float:
        """Mean share of the heaviest agent over populations trained on ``board`` alone."""
        _, _, rl = self.training.experiment_configs()
        shares = []
        for k, seed in enumerate(seeds):
            train_seed, eval_seed = as_sequence(seed).spawn(2)
            population = self.training.train(
                EnvKind.TEAM_PATCHES,
                [board],
                train_seed,
                rl,
                tp=tp,
                reporter=reporter,
                label=f"{label} ({k})",
            )
            (result,) = self.training.evaluate(
                population, [board], eval_seed, self.config.harness.eval_episodes, tp=tp
            )
            heaviest = result.mean_rewards[board.max_weight_agent]
            shares.append(normalized_share(heaviest, tp.total_reward))
        return float(np.mean(shares))

    def run(
        self,
        board: Board | None = None,
        offsets: Sequence[int] | None = None,
        output_dir: Path | None = None,
        reporter: Reporter | None = None,
    ) -> PerturbationReport:
        """Run the sweep and write its outputs.

        Args:
            board: Board to play (defaults to the first sampled test board)
            offsets: Spawn offsets in [0, 10] (defaults to ``harness.perturbation_offsets``)
            output_dir: Output directory (defaults to ``<output_dir>/perturb``)
            reporter: Optional reporter for progress and results

        Returns:
            PerturbationReport with one point per offset
        """
        if reporter is None:
            reporter = Reporter()
        output_dir = output_dir or self.config.output_dir / "perturb"
        harness = self.config.harness
        base = self.config.team_patches
        offsets = list(offsets or harness.perturbation_offsets)
        board_seed, control_seed, sweep_seed = as_sequence(self.config.seed).spawn(3)
        if board is None:
            _, test_set = self.training.board_split(board_seed)
            board = test_set.boards[0]
        logger.info(
            f"Perturbing the spawn of agent {board.max_weight_agent} on [{board}] "
            f"over offsets {offsets}"
        )

        with ManifestManager(
            output_dir / "manifest.json",
            "perturb",
            self.config.seed,
            self.config.model_dump(mode="json"),
        ) as run:
            with reporter.progress_context():
                control = perturbation_layout(
                    board, 0, base, harness.perturbation_max_steps
                ).model_copy(update={"spawn_overrides": {}})
                unperturbed = self._max_weight_share(
                    board,
                    control,
                    control_seed.spawn(harness.population_seeds),
                    reporter,
                    "Control",
                )

                points = []
                for offset, seed in zip(offsets, sweep_seed.spawn(len(offsets)), strict=True):
                    layout = perturbation_layout(
                        board, offset, base, harness.perturbation_max_steps
                    )
                    perturbed = self._max_weight_share(
                        board,
                        layout,
                        seed.spawn(harness.population_seeds),
                        reporter,
                        f"Offset {offset}",
                    )
                    points.append(
                        PerturbationPoint(
                            offset=offset,
                            perturbed_share=perturbed,
                            unperturbed_share=unperturbed,
                        )
                    )
                    logger.debug(
                        f"Offset {offset}: share {perturbed:.4f} (control {unperturbed:.4f})"
                    )

            report = self.service.summarize(points)
            run.record_output(write_perturbation(output_dir / "perturbation.csv", points))
            run.record_output(write_report(output_dir / "summary.json", report))

        reporter.report_table(create_perturbation_table(report))
        return report
