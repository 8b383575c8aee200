"""Training orchestrator.

Coordinates board splits, population training, frozen evaluation and checkpoints.
Experiment orchestrators compose it.
"""

from collections.abc import Mapping, Sequence
from logging import getLogger
from pathlib import Path

import numpy as np

from teamform.config import Settings
from teamform.domain.models import (
    Board,
    BoardDistribution,
    BoardSet,
    BotParams,
    EnvKind,
    EvaluationResult,
    PAConfig,
    RLConfig,
    TPConfig,
)
from teamform.domain.types import ExperimentProgressHook
from teamform.learning.population import (
    AgentPopulation,
    EnvFactory,
    SeedLike,
    as_sequence,
    evaluate_frozen,
    make_env_factory,
    train_population,
)
from teamform.operations.boards import generate_split, save_boards
from teamform.state.checkpoints import load_population, save_population
from teamform.state.manifest import ManifestManager
from teamform.state.outputs import write_curves, write_evaluation
from teamform.state.trajectory import TrajectoryLog
from teamform.ui import Reporter

logger = getLogger(__name__)


class Training:
    """Orchestrates training and frozen evaluation of agent populations.

    Single runs use ``rl``, ``propose_accept`` and ``team_patches`` from the settings
    as given; the experiment orchestrators apply the harness budgets on top through
    ``experiment_configs``.
    """

    def __init__(self, config: Settings | None = None):
        """Initialize the training orchestrator.

        Args:
            config: Experiment configuration. If None, creates new Settings() from environment.
        """
        self.config = config if config is not None else Settings()

    def experiment_configs(self) -> tuple[PAConfig, TPConfig, RLConfig]:
        """Environment and learner configs with the harness reward and episode budget."""
        harness = self.config.harness
        pa = self.config.propose_accept.model_copy(update={"total_reward": harness.total_reward})
        rl = self.config.rl.model_copy(update={"episodes": harness.training_episodes})
        return pa, self.config.team_patches, rl

    def board_split(
        self, seed: SeedLike | None = None, dist: BoardDistribution | None = None
    ) -> tuple[BoardSet, BoardSet]:
        """Sample the train and test boards.

        Args:
            seed: Sampling seed (defaults to the configured seed)
            dist: Weight distribution (defaults to the configured one)
        """
        seed = self.config.seed if seed is None else seed
        settings = self.config.boards
        dist = dist or settings
        recorded = seed if isinstance(seed, int) else int(seed.generate_state(1)[0])
        return generate_split(
            dist, np.random.default_rng(seed), settings.n_train, settings.n_test, seed=recorded
        )

    def factory(
        self, env_kind: EnvKind, pa: PAConfig | None = None, tp: TPConfig | None = None
    ) -> EnvFactory:
        """Environment factory for ``env_kind`` (configured environments by default)."""
        return make_env_factory(
            env_kind, pa or self.config.propose_accept, tp or self.config.team_patches
        )

    def total_reward(
        self, env_kind: EnvKind, pa: PAConfig | None = None, tp: TPConfig | None = None
    ) -> int:
        """Budget ``r`` of the environment the shares are normalized by."""
        if env_kind is EnvKind.PROPOSE_ACCEPT:
            return (pa or self.config.propose_accept).total_reward
        return (tp or self.config.team_patches).total_reward

    def train(
        self,
        env_kind: EnvKind,
        boards: Sequence[Board],
        seed: SeedLike,
        rl: RLConfig | None = None,
        pa: PAConfig | None = None,
        tp: TPConfig | None = None,
        bots: Mapping[int, BotParams] | None = None,
        population: AgentPopulation | None = None,
        reporter: Reporter | None = None,
        label: str = "Training",
    ) -> AgentPopulation:
        """Train one population with a progress bar.

        Args:
            env_kind: Environment to train in
            boards: Training boards
            seed: Population seed
            rl: Learner config (defaults to the configured one)
            pa: Propose-Accept config
            tp: Team Patches config
            bots: Seats played by bots
            population: Continue training this population
            reporter: Optional reporter for progress
            label: Progress bar label

        Returns:
            The trained population
        """
        hook = reporter.create_training_progress_hook(label) if reporter else None
        return train_population(
            self.factory(env_kind, pa, tp),
            boards,
            rl or self.config.rl,
            seed,
            env_kind,
            bots=bots,
            population=population,
            progress=hook,
        )

    def evaluate(
        self,
        population: AgentPopulation,
        boards: Sequence[Board],
        seed: SeedLike,
        episodes: int,
        pa: PAConfig | None = None,
        tp: TPConfig | None = None,
        trajectory: TrajectoryLog | None = None,
        progress: ExperimentProgressHook | None = None,
    ) -> list[EvaluationResult]:
        """Evaluate a frozen population on every board with its own seed stream.

        Returns:
            One EvaluationResult per board, in board order
        """
        factory = self.factory(population.env_kind, pa, tp)
        results = []
        board_seeds = as_sequence(seed).spawn(len(boards))
        for j, (board, board_seed) in enumerate(zip(boards, board_seeds, strict=True)):
            results.append(
                evaluate_frozen(
                    population, factory, board, episodes, board_seed, trajectory=trajectory
                )
            )
            if progress:
                progress(str(board), j + 1, len(boards))
        return results

    def run(
        self,
        env_kind: EnvKind,
        output_dir: Path | None = None,
        bots: Mapping[int, BotParams] | None = None,
        reporter: Reporter | None = None,
    ) -> tuple[AgentPopulation, list[EvaluationResult]]:
        """Sample boards, train on the train split, evaluate on the test split, checkpoint.

        Writes ``train.boards``, ``test.boards``, ``curves.csv``, ``evaluation.csv``,
        the ``checkpoint/`` directory and ``manifest.json`` under ``output_dir``.

        Returns:
            Tuple of (trained population, test-board evaluations)
        """
        if reporter is None:
            reporter = Reporter()
        output_dir = output_dir or self.config.output_dir / "train"
        train_seed, eval_seed = as_sequence(self.config.seed).spawn(2)
        train_set, test_set = self.board_split(self.config.seed)

        with ManifestManager(
            output_dir / "manifest.json",
            "train",
            self.config.seed,
            self.config.model_dump(mode="json"),
        ) as run:
            for board_set in (train_set, test_set):
                path = output_dir / f"{board_set.label.value}.boards"
                save_boards(board_set, path)
                run.record_output(path)

            with reporter.progress_context():
                population = self.train(
                    env_kind, train_set.boards, train_seed, bots=bots, reporter=reporter
                )
                results = self.evaluate(
                    population,
                    test_set.boards,
                    eval_seed,
                    self.config.harness.eval_episodes,
                    progress=reporter.create_experiment_progress_hook("Evaluating"),
                )

            save_population(population, output_dir / "checkpoint")
            outputs = [
                write_curves(output_dir / "curves.csv", population.curves),
                write_evaluation(
                    output_dir / "evaluation.csv", results, self.total_reward(env_kind)
                ),
            ]
            for path in outputs:
                run.record_output(path)

        logger.info(f"Trained {population.kinds} for {population.episodes_trained} episodes")
        return population, results

    def run_evaluation(
        self,
        checkpoint_dir: Path,
        boards: Sequence[Board],
        episodes: int | None = None,
        output_dir: Path | None = None,
        trajectory_path: Path | None = None,
        reporter: Reporter | None = None,
    ) -> tuple[AgentPopulation, list[EvaluationResult]]:
        """Evaluate a saved population on the given boards.

        Writes ``evaluation.csv``, the optional trajectory log and ``manifest.json``.

        Returns:
            Tuple of (loaded population, per-board evaluations)
        """
        if reporter is None:
            reporter = Reporter()
        output_dir = output_dir or self.config.output_dir / "evaluate"
        episodes = episodes or self.config.harness.eval_episodes
        population = load_population(checkpoint_dir)

        with ManifestManager(
            output_dir / "manifest.json",
            "evaluate",
            self.config.seed,
            self.config.model_dump(mode="json"),
        ) as run:
            with reporter.progress_context():
                hook = reporter.create_experiment_progress_hook("Evaluating")
                if trajectory_path is not None:
                    with TrajectoryLog(trajectory_path) as log:
                        results = self.evaluate(
                            population,
                            boards,
                            self.config.seed,
                            episodes,
                            trajectory=log,
                            progress=hook,
                        )
                    run.record_output(trajectory_path)
                else:
                    results = self.evaluate(
                        population, boards, self.config.seed, episodes, progress=hook
                    )
            path = write_evaluation(
                output_dir / "evaluation.csv", results, self.total_reward(population.env_kind)
            )
            run.record_output(path)
        return population, results
