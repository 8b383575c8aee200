"""Propose-Accept: a random proposer offers an integral split to a viable team.

Each round a proposer is drawn uniformly. It proposes an allocation of the total reward
``r`` whose positive entries form a winning team containing itself. The proposees answer
simultaneously; unanimous acceptance pays the allocation, any decline either starts a new
round (probability ``p``) or ends the episode with nothing for anyone.

Learners index proposals by position in the lexicographic enumeration of all
compositions of ``r`` into ``n`` parts, followed by the two response actions.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from logging import getLogger

import numpy as np

from teamform.domain.errors import IllegalActionError
from teamform.domain.models import Board, PAConfig
from teamform.operations.coopgame import shapley_value, value

logger = getLogger(__name__)


class Phase(str, Enum):
    """Stage of a Propose-Accept round."""

    PROPOSE = "propose"
    RESPOND = "respond"
    TERMINAL = "terminal"


Allocation = tuple[int, ...]


@dataclass(frozen=True, slots=True)
class PAState:
    """Full Markov-game state."""

    board: Board
    phase: Phase
    proposer: int
    round: int = 0
    pending: Allocation | None = None
    terminal_rewards: tuple[float, ...] | None = None

    @property
    def proposees(self) -> tuple[int, ...]:
        """Team members other than the proposer of the pending allocation."""
        if self.pending is None:
            return ()
        return tuple(i for i, share in enumerate(self.pending) if share > 0 and i != self.proposer)


@lru_cache(maxsize=64)
def allocation_space(n: int, total_reward: int) -> np.ndarray:
    """All compositions of ``total_reward`` into ``n`` nonnegative parts, in lex order.

    Returns:
        Read-only integer array of shape ``(K, n)``
    """

    def compositions(parts: int, remaining: int):
        if parts == 1:
            yield (remaining,)
            return
        for first in range(remaining + 1):
            for rest in compositions(parts - 1, remaining - first):
                yield (first, *rest)

    space = np.array(list(compositions(n, total_reward)), dtype=np.int64)
    space.setflags(write=False)
    return space


@lru_cache(maxsize=64)
def _allocation_indices(n: int, total_reward: int) -> dict[Allocation, int]:
    space = allocation_space(n, total_reward)
    return {tuple(int(x) for x in row): k for k, row in enumerate(space)}


def allocation_index(allocation: Sequence[int], total_reward: int) -> int:
    """Position of ``allocation`` in ``allocation_space``."""
    key = tuple(int(x) for x in allocation)
    try:
        return _allocation_indices(len(key), total_reward)[key]
    except KeyError:
        raise IllegalActionError(f"{key} is not a split of {total_reward}") from None


@lru_cache(maxsize=1024)
def _winning_masks(board: Board) -> np.ndarray:
    """Lookup table indexed by member bitmask: True for winning teams."""
    return np.array(
        [
            bool(value(board, frozenset(i for i in range(board.n) if mask >> i & 1)))
            for mask in range(1 << board.n)
        ]
    )


@lru_cache(maxsize=4096)
def legal_mask(board: Board, proposer: int, total_reward: int) -> np.ndarray:
    """Boolean mask over ``allocation_space`` of the proposals open to ``proposer``."""
    space = allocation_space(board.n, total_reward)
    bits = (space > 0).astype(np.int64) @ (1 << np.arange(board.n, dtype=np.int64))
    mask = _winning_masks(board)[bits] & (space[:, proposer] > 0)
    mask.setflags(write=False)
    return mask


def legal_allocations(board: Board, proposer: int, total_reward: int) -> set[Allocation]:
    """Every allocation ``proposer`` may propose: sum ``r``, viable team, self included."""
    space = allocation_space(board.n, total_reward)
    return {tuple(int(x) for x in row) for row in space[legal_mask(board, proposer, total_reward)]}


def check_allocation(
    board: Board, proposer: int, allocation: Sequence[int], total_reward: int
) -> None:
    """Raise IllegalActionError unless ``allocation`` is a legal proposal."""
    if len(allocation) != board.n:
        raise IllegalActionError(f"allocation has {len(allocation)} entries for {board.n} agents")
    if any(share < 0 for share in allocation) or sum(allocation) != total_reward:
        raise IllegalActionError(f"allocation {tuple(allocation)} does not split {total_reward}")
    if allocation[proposer] <= 0:
        raise IllegalActionError(f"proposer {proposer} is not in the proposed team")
    team = frozenset(i for i, share in enumerate(allocation) if share > 0)
    if not value(board, team):
        raise IllegalActionError(f"team {sorted(team)} is not viable on {board}")


def observation_size(n: int, shapley_aware: bool = False) -> int:
    """Length of a Propose-Accept observation vector."""
    return 4 * n + 3 + (n if shapley_aware else 0)


def observe(state: PAState, agent: int, config: PAConfig) -> np.ndarray:
    """Observation of one agent.

    Layout: weights divided by the quota, quota over total weight, own index one-hot,
    phase one-hot (propose, respond), proposer one-hot, pending shares divided by ``r``
    (zeros if none), then the Shapley values when the config is Shapley aware.
    """
    board = state.board
    n = board.n
    weights = np.asarray(board.weights, dtype=float)
    parts = [
        weights / board.quota,
        [board.quota / weights.sum()],
        np.eye(n)[agent],
        [state.phase is Phase.PROPOSE, state.phase is Phase.RESPOND],
        np.eye(n)[state.proposer],
        np.zeros(n) if state.pending is None else np.asarray(state.pending) / config.total_reward,
    ]
    if config.shapley_aware:
        parts.append(shapley_value(board).values)
    return np.concatenate([np.asarray(p, dtype=float) for p in parts])


def observe_all(state: PAState, config: PAConfig) -> list[np.ndarray]:
    """Observations of every agent."""
    return [observe(state, i, config) for i in range(state.board.n)]


def reset(
    board: Board, config: PAConfig, rng: np.random.Generator
) -> tuple[PAState, list[np.ndarray]]:
    """Start an episode with a uniformly drawn proposer."""
    state = PAState(board=board, phase=Phase.PROPOSE, proposer=int(rng.integers(board.n)))
    return state, observe_all(state, config)


def _terminal(state: PAState, rewards: Sequence[float]) -> PAState:
    return replace(
        state,
        phase=Phase.TERMINAL,
        pending=None,
        terminal_rewards=tuple(float(x) for x in rewards),
    )


def step(
    state: PAState,
    action: Sequence[int] | Mapping[int, bool],
    config: PAConfig,
    rng: np.random.Generator,
) -> tuple[PAState, bool, tuple[float, ...]]:
    """Advance the game by one proposal or one joint response.

    Args:
        state: Current state
        action: Allocation in the propose phase; proposee -> accept mapping in the
            respond phase
        config: Environment configuration
        rng: Random stream for the continuation draw and the next proposer

    Returns:
        Tuple of (next state, done, per-agent rewards of this step)
    """
    n = state.board.n
    zeros = (0.0,) * n

    if state.phase is Phase.TERMINAL:
        raise IllegalActionError("episode already terminated")

    if state.phase is Phase.PROPOSE:
        if isinstance(action, Mapping):
            raise IllegalActionError("expected an allocation in the propose phase")
        allocation = tuple(int(x) for x in action)
        check_allocation(state.board, state.proposer, allocation, config.total_reward)
        proposed = replace(state, phase=Phase.RESPOND, pending=allocation)
        if not proposed.proposees:
            # a winning singleton needs nobody's consent
            final = _terminal(proposed, allocation)
            return final, True, final.terminal_rewards
        return proposed, False, zeros

    if not isinstance(action, Mapping):
        raise IllegalActionError("expected proposee responses in the respond phase")
    proposees = set(state.proposees)
    if set(action) - proposees:
        raise IllegalActionError(f"responses from non-proposees {sorted(set(action) - proposees)}")
    if proposees - set(action):
        raise IllegalActionError(f"missing responses from {sorted(proposees - set(action))}")

    if all(action.values()):
        final = _terminal(state, state.pending)
        return final, True, final.terminal_rewards

    next_round = state.round + 1
    if rng.random() >= config.continue_prob or (
        config.max_rounds is not None and next_round >= config.max_rounds
    ):
        return _terminal(state, zeros), True, zeros
    fresh = PAState(
        board=state.board, phase=Phase.PROPOSE, proposer=int(rng.integers(n)), round=next_round
    )
    return fresh, False, zeros


class ProposeAcceptEnv:
    """Stateful wrapper exposing learner action indices.

    Actions ``0 .. K-1`` are proposals in ``allocation_space`` order, ``K`` accepts and
    ``K + 1`` declines.
    """

    def __init__(self, board: Board, config: PAConfig, rng: np.random.Generator):
        """Initialize the environment.

        Args:
            board: Game played in every episode until ``set_board``
            config: Environment configuration
            rng: Random stream owned by this instance
        """
        self.config = config
        self.rng = rng
        self.board = board
        self.state: PAState | None = None

    @property
    def n_agents(self) -> int:
        """Number of seats."""
        return self.board.n

    @property
    def n_proposals(self) -> int:
        """Number of allocation actions ``K``."""
        return len(allocation_space(self.board.n, self.config.total_reward))

    @property
    def n_actions(self) -> int:
        """Proposal actions plus accept and decline."""
        return self.n_proposals + 2

    @property
    def observation_size(self) -> int:
        """Observation vector length."""
        return observation_size(self.board.n, self.config.shapley_aware)

    def set_board(self, board: Board) -> None:
        """Play ``board`` from the next reset on; the agent count must not change."""
        if board.n != self.board.n:
            raise IllegalActionError(f"board has {board.n} agents, environment has {self.board.n}")
        self.board = board

    def reset(self) -> list[np.ndarray]:
        """Start a new episode and return every agent's observation."""
        self.state, observations = reset(self.board, self.config, self.rng)
        return observations

    def acting_agents(self) -> tuple[int, ...]:
        """Seats that must act in the current state."""
        if self.state is None or self.state.phase is Phase.TERMINAL:
            return ()
        if self.state.phase is Phase.PROPOSE:
            return (self.state.proposer,)
        return self.state.proposees

    def action_mask(self, agent: int) -> np.ndarray:
        """Legal learner actions of an acting agent."""
        mask = np.zeros(self.n_actions, dtype=bool)
        if self.state.phase is Phase.PROPOSE:
            mask[: self.n_proposals] = legal_mask(self.board, agent, self.config.total_reward)
        else:
            mask[self.n_proposals :] = True
        return mask

    def observe(self) -> list[np.ndarray]:
        """Every agent's observation of the current state."""
        return observe_all(self.state, self.config)

    def step(self, actions: Mapping[int, int]) -> tuple[list[np.ndarray], tuple[float, ...], bool]:
        """Apply learner actions of the acting agents.

        Args:
            actions: Acting seat -> learner action index

        Returns:
            Tuple of (observations, per-agent rewards, done)
        """
        if self.state.phase is Phase.PROPOSE:
            index = actions[self.state.proposer]
            if not 0 <= index < self.n_proposals:
                raise IllegalActionError(f"action {index} is not a proposal")
            allocation = allocation_space(self.board.n, self.config.total_reward)[index]
            env_action: Sequence[int] | Mapping[int, bool] = allocation
        else:
            responses = {seat: actions[seat] for seat in self.state.proposees if seat in actions}
            if any(a not in (self.n_proposals, self.n_proposals + 1) for a in responses.values()):
                raise IllegalActionError(f"responses must be accept or decline: {responses}")
            env_action = {seat: a == self.n_proposals for seat, a in responses.items()}
        self.state, done, rewards = step(self.state, env_action, self.config, self.rng)
        return self.observe(), rewards, done

    def decode(self, action: int) -> str:
        """Readable form of a learner action for trajectory logs."""
        if action < self.n_proposals:
            allocation = allocation_space(self.board.n, self.config.total_reward)[action]
            return " ".join(map(str, allocation))
        return "accept" if action == self.n_proposals else "decline"
