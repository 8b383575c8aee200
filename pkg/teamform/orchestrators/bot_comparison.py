"""Bot comparison orchestrator.

For every seat, an all-RL population and a population with a bot in that seat are
evaluated on the same test boards; the learner's share in the seat is compared with
the bot's.
"""

from collections.abc import Sequence
from logging import getLogger
from pathlib import Path

from teamform.agents.bots import Bot
from teamform.config import Settings
from teamform.domain.errors import PreconditionError
from teamform.domain.models import BotMode, BotParams, ComparisonResult, EnvKind
from teamform.domain.services import ComparisonService, normalized_share
from teamform.learning.population import AgentPopulation, as_sequence
from teamform.orchestrators.training import Training
from teamform.state.manifest import ManifestManager
from teamform.state.outputs import write_comparison_samples, write_report
from teamform.ui import Reporter
from teamform.ui.tables import create_comparison_table

logger = getLogger(__name__)

RL_GROUP = "rl"
BOT_GROUP = "bot"


class BotComparison:
    """Orchestrates the all-RL against single-bot comparison in Propose-Accept."""

    def __init__(self, config: Settings | None = None):
        """Initialize the bot comparison orchestrator.

        Args:
            config: Experiment configuration. If None, creates new Settings() from environment.
        """
        self.config = config if config is not None else Settings()
        self.training = Training(self.config)
        self.service = ComparisonService()

    def _bot(self, mode: BotMode) -> BotParams:
        return BotParams(mode=mode, acceptance_scale=self.config.bots.acceptance_scale)

    @staticmethod
    def _swap_bot(population: AgentPopulation, seat: int, params: BotParams) -> None:
        # evaluation_streams replaces the stream during evaluation
        population.seats[seat] = Bot(params, population.seats[seat].rng)

    def run(
        self,
        mode: BotMode | None = None,
        eval_mode: BotMode | None = None,
        seats: Sequence[int] | None = None,
        output_dir: Path | None = None,
        reporter: Reporter | None = None,
    ) -> ComparisonResult:
        """Run the experiment and write its outputs.

        Args:
            mode: Bot played during training (defaults to ``bots.mode``)
            eval_mode: Bot swapped in for evaluation (``bots.eval_mode``, else ``mode``)
            seats: Seats the bot sweeps over (defaults to every seat)
            output_dir: Output directory (defaults to ``<output_dir>/compare-bots``)
            reporter: Optional reporter for progress and results

        Returns:
            ComparisonResult over every (population, seat, board) sample
        """
        if reporter is None:
            reporter = Reporter()
        output_dir = output_dir or self.config.output_dir / "compare-bots"
        harness = self.config.harness
        mode = mode or self.config.bots.mode
        eval_mode = eval_mode or self.config.bots.eval_mode or mode
        n = self.config.boards.n
        seats = list(range(n)) if seats is None else list(seats)
        if not seats or any(not 0 <= seat < n for seat in seats):
            raise PreconditionError(f"bot seats {seats} outside [0, {n})")
        pa, _, rl = self.training.experiment_configs()
        env_kind = EnvKind.PROPOSE_ACCEPT

        board_seed, *population_seeds = as_sequence(self.config.seed).spawn(
            1 + harness.population_seeds
        )
        train_set, test_set = self.training.board_split(board_seed)
        boards = test_set.boards[: harness.n_boards]
        logger.info(
            f"Comparing learners with {mode.value} bots (evaluated as {eval_mode.value}) "
            f"on seats {seats}"
        )

        rl_samples: list[tuple[int, float]] = []
        bot_samples: list[tuple[int, float]] = []
        rows: list[tuple[str, int, int, int, float]] = []

        with ManifestManager(
            output_dir / "manifest.json",
            "compare-bots",
            self.config.seed,
            self.config.model_dump(mode="json"),
        ) as run:
            with reporter.progress_context():
                for k, seed in enumerate(population_seeds):
                    rl_seed, eval_seed, *bot_seeds = seed.spawn(2 + len(seats))
                    all_rl = self.training.train(
                        env_kind,
                        train_set.boards,
                        rl_seed,
                        rl,
                        pa,
                        reporter=reporter,
                        label=f"All-RL {k}",
                    )
                    rl_results = self.training.evaluate(
                        all_rl, boards, eval_seed, harness.eval_episodes, pa
                    )

                    for seat, bot_seed in zip(seats, bot_seeds, strict=True):
                        single_bot = self.training.train(
                            env_kind,
                            train_set.boards,
                            bot_seed,
                            rl,
                            pa,
                            bots={seat: self._bot(mode)},
                            reporter=reporter,
                            label=f"Bot seat {seat} ({k})",
                        )
                        if eval_mode is not mode:
                            self._swap_bot(single_bot, seat, self._bot(eval_mode))
                        bot_results = self.training.evaluate(
                            single_bot, boards, eval_seed, harness.eval_episodes, pa
                        )

                        pairs = zip(rl_results, bot_results, strict=True)
                        for j, (rl_result, bot_result) in enumerate(pairs):
                            rl_share = normalized_share(
                                rl_result.mean_rewards[seat], pa.total_reward
                            )
                            bot_share = normalized_share(
                                bot_result.mean_rewards[seat], pa.total_reward
                            )
                            rl_samples.append((seat, rl_share))
                            bot_samples.append((seat, bot_share))
                            rows.append((RL_GROUP, k, seat, j, rl_share))
                            rows.append((BOT_GROUP, k, seat, j, bot_share))

            result = self.service.compare(rl_samples, bot_samples)
            run.record_output(write_comparison_samples(output_dir / "samples.csv", rows))
            run.record_output(write_report(output_dir / "summary.json", result))

        logger.info(f"d = {result.difference:+.4f}, p = {result.p_value:.3g}")
        reporter.report_table(create_comparison_table(result, eval_mode.value))
        return result
