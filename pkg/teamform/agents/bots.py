"""Hand-crafted Propose-Accept negotiators.

The random bot proposes a uniformly drawn legal allocation and accepts with probability
one half. The proportional bots pick a random viable team containing themselves, split
the reward in proportion to weights or Shapley values, and accept an offer with a
probability that grows logistically in how far it exceeds their proportional share.
"""

from logging import getLogger

import numpy as np
from scipy.special import expit

from teamform.domain.errors import PreconditionError
from teamform.domain.models import Board, BotMode, BotParams, PAConfig, TargetAllocation
from teamform.domain.types import Coalition
from teamform.envs.propose_accept import (
    Allocation,
    PAState,
    Phase,
    ProposeAcceptEnv,
    allocation_index,
    allocation_space,
    legal_mask,
)
from teamform.operations.coopgame import shapley_value, value, winning_coalitions

logger = getLogger(__name__)

L1_TIE_TOLERANCE = 1e-9


def _targets(board: Board, team: Coalition, total_reward: int, mode: BotMode) -> dict[int, float]:
    members = sorted(team)
    if mode is BotMode.WEIGHT:
        power = [board.weights[i] for i in members]
    elif mode is BotMode.SHAPLEY:
        phi = shapley_value(board)
        power = [phi[i] for i in members]
    else:
        raise PreconditionError(f"no target allocation for {mode.value} bots")
    total = sum(power)
    if total <= 0:
        # members without weight or power share evenly
        return {i: total_reward / len(members) for i in members}
    return {i: total_reward * p / total for i, p in zip(members, power, strict=True)}


def integral_target_allocation(
    board: Board, team: Coalition, total_reward: int, mode: BotMode
) -> TargetAllocation:
    """Proportional targets of a team and the closest integral split in L1 distance.

    Every member receives at least one unit so the allocation keeps the whole team;
    among equally close splits the lexicographically smallest wins.

    Args:
        board: Weighted voting game
        team: Viable team receiving the reward
        total_reward: Reward ``r`` to split
        mode: ``weight`` or ``shapley`` proportionality

    Returns:
        TargetAllocation with real targets and integer shares per member

    Raises:
        PreconditionError: If the team is losing, larger than ``r``, or the mode is random
    """
    if not team or not value(board, team):
        raise PreconditionError(f"team {sorted(team)} is not viable on {board}")
    if len(team) > total_reward:
        raise PreconditionError(f"cannot give {len(team)} members a share of {total_reward}")
    targets = _targets(board, team, total_reward, mode)
    members = sorted(team)

    # positive compositions of r into |team| parts, still in lex order
    candidates = allocation_space(len(members), total_reward - len(members)) + 1
    goal = np.array([targets[i] for i in members])
    distance = np.abs(candidates - goal).sum(axis=1)
    best = int(np.flatnonzero(distance <= distance.min() + L1_TIE_TOLERANCE)[0])
    integral = {i: int(share) for i, share in zip(members, candidates[best], strict=True)}
    return TargetAllocation(team=team, targets=targets, integral=integral)


def respond_probability(
    offer_share: int, target_share: float, total_reward: int, scale: float
) -> float:
    """Probability of accepting ``offer_share`` when the bot expects ``target_share``.

    The gain is measured in fractions of the total reward, so it lies in [-1, 1].
    """
    if not 0 <= offer_share <= total_reward:
        raise PreconditionError(f"offer {offer_share} outside [0, {total_reward}]")
    return float(expit(scale * (offer_share - target_share) / total_reward))


def bot_act(
    params: BotParams,
    state: PAState,
    seat: int,
    config: PAConfig,
    rng: np.random.Generator,
) -> Allocation | bool:
    """Act for ``seat`` in the current phase.

    Args:
        params: Bot mode and acceptance scale
        state: Public game state (everything a Propose-Accept agent observes)
        seat: Acting seat
        config: Environment configuration
        rng: Random stream of this bot

    Returns:
        An allocation when proposing, True/False (accept/decline) when responding
    """
    board = state.board
    r = config.total_reward

    if state.phase is Phase.PROPOSE:
        if seat != state.proposer:
            raise PreconditionError(f"seat {seat} is not the proposer")
        if params.mode is BotMode.RANDOM:
            legal = np.flatnonzero(legal_mask(board, seat, r))
            row = allocation_space(board.n, r)[legal[rng.integers(len(legal))]]
            return tuple(int(x) for x in row)
        teams = [team for team in winning_coalitions(board, containing=seat) if len(team) <= r]
        team = teams[int(rng.integers(len(teams)))]
        target = integral_target_allocation(board, team, r, params.mode)
        return tuple(target.integral.get(i, 0) for i in range(board.n))

    if state.phase is Phase.RESPOND:
        if seat not in state.proposees:
            raise PreconditionError(f"seat {seat} is not a proposee")
        if params.mode is BotMode.RANDOM:
            return bool(rng.random() < 0.5)
        team = frozenset(i for i, share in enumerate(state.pending) if share > 0)
        target = _targets(board, team, r, params.mode)[seat]
        accept = respond_probability(state.pending[seat], target, r, params.acceptance_scale)
        return bool(rng.random() < accept)

    raise PreconditionError("bots do not act in a terminal state")


class Bot:
    """A bot occupying one seat of a Propose-Accept population."""

    def __init__(self, params: BotParams, rng: np.random.Generator):
        """Initialize the bot.

        Args:
            params: Bot mode and acceptance scale
            rng: Random stream owned by this bot
        """
        self.params = params
        self.rng = rng

    @property
    def mode(self) -> BotMode:
        """Bot mode."""
        return self.params.mode

    def act(self, env: ProposeAcceptEnv, seat: int) -> int:
        """Learner action index of the bot's move in ``env``."""
        move = bot_act(self.params, env.state, seat, env.config, self.rng)
        if isinstance(move, bool):
            return env.n_proposals if move else env.n_proposals + 1
        return allocation_index(move, env.config.total_reward)
