"""Populations of independent learners: training loops and frozen evaluation.

Every seat owns its parameters, optimizer and random stream. Propose-Accept seats learn
with SARSA(lambda) episode by episode; Team Patches seats learn with actor-critic on
unrolls collected from parallel environment copies stepped in lockstep.
"""

from collections.abc import Callable, Iterator, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from logging import getLogger
from typing import Protocol

import numpy as np

from teamform.agents.bots import Bot
from teamform.domain.errors import ConfigError, PreconditionError, TrainingFailureError
from teamform.domain.models import (
    Algorithm,
    Board,
    BotParams,
    EnvKind,
    EvaluationResult,
    LearningCurvePoint,
    PAConfig,
    RLConfig,
    TPConfig,
)
from teamform.domain.types import TrainingProgressHook
from teamform.envs.propose_accept import ProposeAcceptEnv
from teamform.envs.team_patches import TeamPatchesEnv
from teamform.learning.actor_critic import ActorCriticAgent, Rollout
from teamform.learning.networks import all_finite
from teamform.learning.sarsa import SarsaAgent, Transition, epsilon_at

logger = getLogger(__name__)

Seat = SarsaAgent | ActorCriticAgent | Bot
Env = ProposeAcceptEnv | TeamPatchesEnv
EnvFactory = Callable[[Board, np.random.Generator], Env]
SeedLike = int | np.random.SeedSequence


class TrajectoryRecorder(Protocol):
    """Anything accepting one structured record per environment step."""

    def record(self, **fields) -> None:
        """Store one step."""


def make_env_factory(
    kind: EnvKind, pa: PAConfig | None = None, tp: TPConfig | None = None
) -> EnvFactory:
    """Factory building environments of ``kind`` with the given configuration."""
    if kind is EnvKind.PROPOSE_ACCEPT:
        pa_config = pa or PAConfig()

        def build_propose_accept(board: Board, rng: np.random.Generator) -> Env:
            return ProposeAcceptEnv(board, pa_config, rng)

        return build_propose_accept

    tp_config = tp or TPConfig()

    def build_team_patches(board: Board, rng: np.random.Generator) -> Env:
        return TeamPatchesEnv(board, tp_config, rng)

    return build_team_patches


def as_sequence(seed: SeedLike) -> np.random.SeedSequence:
    """Seed sequence of an integer seed, or an unspawned copy of a given sequence.

    Spawning from the result yields the same children for the same seed however often
    the seed has been used before.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            seed.entropy, spawn_key=seed.spawn_key, pool_size=seed.pool_size
        )
    return np.random.SeedSequence(seed)


def spawn_generators(seed: SeedLike, count: int) -> list[np.random.Generator]:
    """Independent generators spawned from one seed."""
    return [np.random.default_rng(child) for child in as_sequence(seed).spawn(count)]


def seat_kind(seat: Seat) -> str:
    """``sarsa``, ``actor-critic`` or ``bot:<mode>``."""
    if isinstance(seat, Bot):
        return f"bot:{seat.mode.value}"
    if isinstance(seat, SarsaAgent):
        return Algorithm.SARSA.value
    return Algorithm.ACTOR_CRITIC.value


class AgentPopulation:
    """One independent agent per seat plus training statistics."""

    def __init__(
        self,
        env_kind: EnvKind,
        seats: list[Seat],
        config: RLConfig,
        dimensions: dict,
        episodes_trained: int = 0,
        curves: list[LearningCurvePoint] | None = None,
    ):
        """Initialize the population.

        Args:
            env_kind: Environment the population plays
            seats: Agent of every seat
            config: Learner hyperparameters
            dimensions: Observation and action sizes the agents were built for
            episodes_trained: Episodes played while learning so far
            curves: Learning curve points recorded so far
        """
        self.env_kind = env_kind
        self.seats = seats
        self.config = config
        self.dimensions = dimensions
        self.episodes_trained = episodes_trained
        self.curves = curves or []

    @property
    def n_seats(self) -> int:
        """Number of seats."""
        return len(self.seats)

    @property
    def learner_seats(self) -> list[int]:
        """Seats occupied by learning agents."""
        return [i for i, seat in enumerate(self.seats) if not isinstance(seat, Bot)]

    @property
    def kinds(self) -> list[str]:
        """Kind of every seat."""
        return [seat_kind(seat) for seat in self.seats]

    def check_finite(self, episode: int) -> None:
        """Raise TrainingFailureError for the first seat with non-finite parameters."""
        for i in self.learner_seats:
            if not all_finite(self.seats[i].params):
                raise TrainingFailureError(i, episode)


def _dimensions(env: Env) -> dict:
    if isinstance(env, ProposeAcceptEnv):
        return {
            "n_agents": env.n_agents,
            "observation_size": env.observation_size,
            "n_actions": env.n_actions,
            "total_reward": env.config.total_reward,
        }
    return {
        "n_agents": env.n_agents,
        "grid_shape": list(env.grid_shape),
        "feature_size": env.feature_size,
        "n_actions": env.n_actions,
    }


def new_learner(
    env_kind: EnvKind, dimensions: dict, config: RLConfig, rng: np.random.Generator
) -> Seat:
    """Build a fresh learner for one seat."""
    if env_kind is EnvKind.PROPOSE_ACCEPT:
        initial = dimensions.get("total_reward", 0) if config.optimistic_init else 0
        return SarsaAgent(
            dimensions["observation_size"],
            dimensions["n_actions"],
            config,
            rng,
            initial_value=float(initial),
        )
    return ActorCriticAgent(
        tuple(dimensions["grid_shape"]),
        dimensions["feature_size"],
        dimensions["n_actions"],
        config,
        rng,
    )


def build_population(
    env_kind: EnvKind,
    env: Env,
    config: RLConfig,
    seed: SeedLike,
    bots: Mapping[int, BotParams] | None = None,
) -> AgentPopulation:
    """Initialize one agent per seat of ``env``.

    Raises:
        ConfigError: If the algorithm does not fit the environment, or bots are placed
            in Team Patches
    """
    expected = Algorithm.SARSA if env_kind is EnvKind.PROPOSE_ACCEPT else Algorithm.ACTOR_CRITIC
    if config.algorithm not in (None, expected):
        raise ConfigError(
            f"{env_kind.value} agents learn with {expected.value}, not {config.algorithm.value}"
        )
    bots = dict(bots or {})
    if bots and env_kind is EnvKind.TEAM_PATCHES:
        raise ConfigError("bots only play Propose-Accept")
    if any(not 0 <= seat < env.n_agents for seat in bots):
        raise ConfigError(f"bot seats {sorted(bots)} outside [0, {env.n_agents})")

    dimensions = _dimensions(env)
    rngs = spawn_generators(seed, env.n_agents)
    seats: list[Seat] = [
        Bot(bots[i], rngs[i]) if i in bots else new_learner(env_kind, dimensions, config, rngs[i])
        for i in range(env.n_agents)
    ]
    return AgentPopulation(env_kind, seats, config, dimensions)


class _CurveRecorder:
    def __init__(self, population: AgentPopulation, interval: int):
        self.population = population
        self.interval = interval
        self.window: list[np.ndarray] = []

    def add(self, rewards: np.ndarray) -> None:
        self.window.append(np.asarray(rewards, dtype=float))
        self.population.episodes_trained += 1
        if len(self.window) == self.interval:
            means = np.mean(self.window, axis=0)
            episode = self.population.episodes_trained
            self.population.curves.extend(
                LearningCurvePoint(episode=episode, seat=seat, mean_reward=float(mean))
                for seat, mean in enumerate(means)
            )
            logger.debug(f"Episode {episode}: mean rewards {np.round(means, 3).tolist()}")
            self.window.clear()


def play_propose_accept(
    env: ProposeAcceptEnv,
    population: AgentPopulation,
    epsilon: float = 0.0,
    learn: bool = False,
    trajectory: TrajectoryRecorder | None = None,
    episode: int = 0,
) -> np.ndarray:
    """Play one Propose-Accept episode, optionally updating the SARSA seats.

    Returns:
        Per-seat episode rewards
    """
    observations = env.reset()
    pending: dict[int, tuple[np.ndarray, int]] = {}
    totals = np.zeros(env.n_agents)
    done = False
    while not done:
        actions: dict[int, int] = {}
        for seat in env.acting_agents():
            agent = population.seats[seat]
            if isinstance(agent, Bot):
                actions[seat] = agent.act(env, seat)
                continue
            action = agent.act(observations[seat], env.action_mask(seat), epsilon)
            if learn and seat in pending:
                previous, previous_action = pending[seat]
                agent.update(Transition(previous, previous_action, 0.0, observations[seat], action))
            pending[seat] = (observations[seat], action)
            actions[seat] = action
        before = env.state
        observations, rewards, done = env.step(actions)
        totals += rewards
        if trajectory is not None:
            trajectory.record(
                episode=episode,
                round=before.round,
                phase=before.phase.value,
                actors=sorted(actions),
                action={str(seat): env.decode(a) for seat, a in sorted(actions.items())},
                rewards=list(rewards),
            )
    if learn:
        for seat, (previous, previous_action) in pending.items():
            final = Transition(previous, previous_action, float(totals[seat]), done=True)
            population.seats[seat].update(final)
    return totals


def _train_propose_accept(
    population: AgentPopulation,
    env: ProposeAcceptEnv,
    boards: Sequence[Board],
    board_rng: np.random.Generator,
    progress: TrainingProgressHook | None,
) -> None:
    config = population.config
    curve = _CurveRecorder(population, config.curve_interval)
    for episode in range(config.episodes):
        env.set_board(boards[int(board_rng.integers(len(boards)))])
        rewards = play_propose_accept(env, population, epsilon_at(episode, config), learn=True)
        curve.add(rewards)
        if (episode + 1) % config.curve_interval == 0 or episode + 1 == config.episodes:
            population.check_finite(episode)
            if progress:
                progress(episode + 1, config.episodes)


def _stack(observations: Sequence, seat: int) -> tuple[np.ndarray, np.ndarray]:
    grids = np.stack([obs[seat].grid for obs in observations])
    features = np.stack([obs[seat].features for obs in observations])
    return grids, features


def _train_team_patches(
    population: AgentPopulation,
    envs: list[TeamPatchesEnv],
    boards: Sequence[Board],
    board_rng: np.random.Generator,
    progress: TrainingProgressHook | None,
) -> None:
    config = population.config
    n = population.n_seats
    curve = _CurveRecorder(population, config.curve_interval)
    observations = [env.reset() for env in envs]
    returns = np.zeros((len(envs), n))
    completed = 0

    with ThreadPoolExecutor(max_workers=config.max_workers) as executor:
        while completed < config.episodes:
            rollouts = {seat: Rollout() for seat in population.learner_seats}
            for _ in range(config.unroll_length):
                joint = np.zeros((len(envs), n), dtype=np.int64)
                for seat, rollout in rollouts.items():
                    grids, features = _stack(observations, seat)
                    actions, log_probs = population.seats[seat].act(grids, features)
                    rollout.grids.append(grids)
                    rollout.features.append(features)
                    rollout.actions.append(actions)
                    rollout.log_probs.append(log_probs)
                    joint[:, seat] = actions

                results = list(
                    executor.map(
                        lambda pair: pair[0].step(pair[1].tolist()), zip(envs, joint, strict=True)
                    )
                )
                dones = np.array([done for _, _, done in results])
                rewards = np.array([step_rewards for _, step_rewards, _ in results])
                returns += rewards
                for e, (env_observations, _, done) in enumerate(results):
                    observations[e] = env_observations
                    if done:
                        curve.add(returns[e])
                        returns[e] = 0.0
                        completed += 1
                        envs[e].set_board(boards[int(board_rng.integers(len(boards)))])
                        observations[e] = envs[e].reset()
                for seat, rollout in rollouts.items():
                    rollout.rewards.append(rewards[:, seat])
                    rollout.dones.append(dones)

            for seat, rollout in rollouts.items():
                population.seats[seat].update(rollout, *_stack(observations, seat))
            population.check_finite(completed)
            if progress:
                progress(min(completed, config.episodes), config.episodes)


def train_population(
    factory: EnvFactory,
    boards: Sequence[Board],
    config: RLConfig,
    seed: SeedLike,
    env_kind: EnvKind,
    bots: Mapping[int, BotParams] | None = None,
    population: AgentPopulation | None = None,
    progress: TrainingProgressHook | None = None,
) -> AgentPopulation:
    """Train independent agents on boards drawn uniformly from ``boards``.

    Args:
        factory: Environment factory
        boards: Training boards
        config: Learner hyperparameters (``episodes`` is the budget)
        seed: Seed of initialization, environments and board draws
        env_kind: Environment kind built by ``factory``
        bots: Seats played by fixed bots instead of learners
        population: Continue training this population instead of a fresh one
        progress: Optional callback(completed episodes, total episodes)

    Returns:
        The trained population with learning curves

    Raises:
        PreconditionError: If ``boards`` is empty
        TrainingFailureError: If some seat's parameters become non-finite
    """
    if not boards:
        raise PreconditionError("training needs at least one board")
    init_seed, env_seed, board_seed = as_sequence(seed).spawn(3)
    board_rng = np.random.default_rng(board_seed)

    if env_kind is EnvKind.PROPOSE_ACCEPT:
        envs = [factory(boards[0], np.random.default_rng(env_seed))]
    else:
        rngs = spawn_generators(env_seed, config.n_parallel_envs)
        envs = [factory(boards[0], rng) for rng in rngs]
        for env in envs:
            env.set_board(boards[int(board_rng.integers(len(boards)))])

    if population is None:
        population = build_population(env_kind, envs[0], config, init_seed, bots)
    population.config = config
    logger.info(
        f"Training {population.kinds} on {len(boards)} boards for {config.episodes} episodes"
    )

    if env_kind is EnvKind.PROPOSE_ACCEPT:
        _train_propose_accept(population, envs[0], boards, board_rng, progress)
    else:
        _train_team_patches(population, envs, boards, board_rng, progress)
    return population


@contextmanager
def evaluation_streams(population: AgentPopulation, seed: SeedLike) -> Iterator[None]:
    """Temporarily give every seat a fresh stream derived from ``seed``."""
    saved = [seat.rng for seat in population.seats]
    for seat, rng in zip(population.seats, spawn_generators(seed, population.n_seats), strict=True):
        seat.rng = rng
    try:
        yield
    finally:
        for seat, rng in zip(population.seats, saved, strict=True):
            seat.rng = rng


def play_team_patches(
    env: TeamPatchesEnv,
    population: AgentPopulation,
    greedy: bool = True,
    trajectory: TrajectoryRecorder | None = None,
    episode: int = 0,
) -> np.ndarray:
    """Play one Team Patches episode with frozen agents.

    Returns:
        Per-seat episode rewards
    """
    observations = env.reset()
    totals = np.zeros(env.n_agents)
    done = False
    while not done:
        joint = []
        for seat, agent in enumerate(population.seats):
            grids, features = _stack([observations], seat)
            actions, _ = agent.act(grids, features, greedy=greedy)
            joint.append(int(actions[0]))
        observations, rewards, done = env.step(joint)
        totals += rewards
        if trajectory is not None:
            state = env.state
            trajectory.record(
                episode=episode,
                round=state.step,
                phase="terminal" if done else "move",
                actors=list(range(env.n_agents)),
                action=[env.decode(a) for a in joint],
                rewards=list(rewards),
                poses=[[r, c, facing.name] for r, c, facing in state.poses],
                demands=list(state.demands),
            )
    return totals


def evaluate_frozen(
    population: AgentPopulation,
    factory: EnvFactory,
    board: Board,
    episodes: int,
    seed: SeedLike,
    greedy: bool = True,
    trajectory: TrajectoryRecorder | None = None,
) -> EvaluationResult:
    """Play ``episodes`` episodes on ``board`` without any parameter update.

    Learners act greedily (SARSA) or by the policy mode (actor-critic) unless ``greedy``
    is off; bots keep their stochastic behaviour. Runs with the same seed are identical.

    Returns:
        EvaluationResult with per-seat means and every episode's rewards
    """
    if episodes < 1:
        raise PreconditionError("evaluation needs at least one episode")
    env_seed, seat_seed = as_sequence(seed).spawn(2)
    env = factory(board, np.random.default_rng(env_seed))
    records: list[tuple[float, ...]] = []
    with evaluation_streams(population, seat_seed):
        for episode in range(episodes):
            if isinstance(env, ProposeAcceptEnv):
                epsilon = 0.0 if greedy else population.config.epsilon_end
                rewards = play_propose_accept(
                    env, population, epsilon, trajectory=trajectory, episode=episode
                )
            else:
                rewards = play_team_patches(
                    env, population, greedy, trajectory=trajectory, episode=episode
                )
            records.append(tuple(float(x) for x in rewards))
    means = tuple(float(x) for x in np.mean(records, axis=0))
    logger.debug(f"Evaluated {board} over {episodes} episodes: {means}")
    return EvaluationResult(board=board, mean_rewards=means, episode_rewards=records)
