"""Team Patches: a grid world where teams form by standing on colored patches.

Agents move, rotate and set reward demands. As soon as some patch holds a viable team
whose members have all set demands summing to at most ``r``, every member is paid its
demand and the episode ends. Episodes that never agree end after ``max_steps`` steps
with nothing for anyone.
"""

from collections.abc import Sequence
from dataclasses import dataclass, replace
from enum import IntEnum
from functools import lru_cache
from logging import getLogger
from typing import NamedTuple

import numpy as np

from teamform.domain.errors import ConfigError, IllegalActionError, PreconditionError
from teamform.domain.models import Board, Patch, PatchColor, TPConfig
from teamform.domain.types import Coalition
from teamform.operations.coopgame import value

logger = getLogger(__name__)


class Orientation(IntEnum):
    """Facing direction, clockwise from north."""

    N = 0
    E = 1
    S = 2
    W = 3


class Action(IntEnum):
    """Movement actions; ``SET_DEMAND + k - 1`` sets demand ``k``."""

    FORWARD = 0
    BACKWARD = 1
    LEFT = 2
    RIGHT = 3
    ROTATE_LEFT = 4
    ROTATE_RIGHT = 5
    NOOP = 6
    SET_DEMAND = 7


_HEADINGS = ((-1, 0), (0, 1), (1, 0), (0, -1))
# heading offset (in quarter turns clockwise) of each movement action
_MOVE_TURNS = {Action.FORWARD: 0, Action.RIGHT: 1, Action.BACKWARD: 2, Action.LEFT: 3}

# observation planes
WALL_PLANE = 0
AGENT_PLANE = 1 + len(PatchColor)
N_PLANES = AGENT_PLANE + 1


Pose = tuple[int, int, Orientation]


@dataclass(frozen=True, slots=True)
class TPState:
    """Full Markov-game state."""

    board: Board
    poses: tuple[Pose, ...]
    demands: tuple[int, ...]
    step: int = 0
    terminal_rewards: tuple[float, ...] | None = None

    @property
    def done(self) -> bool:
        """Return True once the episode has ended."""
        return self.terminal_rewards is not None


@dataclass(frozen=True, slots=True)
class TPObservation:
    """Ego-centric color planes plus seat, weight and demand features."""

    grid: np.ndarray
    features: np.ndarray


class PatchStatus(NamedTuple):
    """Team standing on a patch and whether it could close a deal."""

    viable: bool
    valid: bool
    team: Coalition
    demand_sum: int


def num_actions(config: TPConfig) -> int:
    """Movement actions plus one demand action per reward unit."""
    return int(Action.SET_DEMAND) + config.total_reward


def _color_plane(color: PatchColor) -> int:
    return 1 + list(PatchColor).index(color)


def spawn_block(config: TPConfig) -> list[tuple[int, int]]:
    """Cells of the default spawn rectangle, row-major."""
    return [
        (r, c)
        for r in range(config.spawn_rows[0], config.spawn_rows[1] + 1)
        for c in range(config.spawn_cols[0], config.spawn_cols[1] + 1)
    ]


def reset(
    board: Board, config: TPConfig, rng: np.random.Generator
) -> tuple[TPState, list[TPObservation]]:
    """Place agents on their spawn cells with random orientations.

    Agents without a spawn override take a random permutation of the free cells of the
    spawn block.

    Raises:
        ConfigError: If spawns collide, leave the grid, do not fit in the block, or lie
            on a patch while ``allow_spawn_in_patch`` is off
    """
    n = board.n
    fixed = {agent: tuple(cell) for agent, cell in config.spawn_overrides.items() if agent < n}
    if len(set(fixed.values())) != len(fixed):
        raise ConfigError(f"spawn overrides collide: {fixed}")
    free = [cell for cell in spawn_block(config) if cell not in fixed.values()]
    floating = [agent for agent in range(n) if agent not in fixed]
    if len(floating) > len(free):
        raise ConfigError(f"{len(floating)} agents do not fit in {len(free)} spawn cells")
    order = rng.permutation(len(free))
    cells = dict(fixed)
    for agent, index in zip(floating, order, strict=False):
        cells[agent] = free[index]

    for agent, (row, col) in cells.items():
        if not (0 <= row < config.grid_size and 0 <= col < config.grid_size):
            raise ConfigError(f"agent {agent} spawns outside the grid at {(row, col)}")
        if not config.allow_spawn_in_patch and any(p.contains(row, col) for p in config.patches):
            raise ConfigError(f"agent {agent} spawns on a patch at {(row, col)}")

    orientations = rng.integers(4, size=n)
    poses = tuple((*cells[i], Orientation(int(orientations[i]))) for i in range(n))
    state = TPState(board=board, poses=poses, demands=(0,) * n)
    return state, observe_all(state, config)


def patch_team(state: TPState, patch: Patch) -> Coalition:
    """Agents whose cell lies in the patch rectangle."""
    return frozenset(i for i, (row, col, _) in enumerate(state.poses) if patch.contains(row, col))


def patch_status(state: TPState, config: TPConfig, index: int) -> PatchStatus:
    """Viability of the patch team and validity of its demands.

    An empty patch is not viable; its demands are vacuously valid.
    """
    if not 0 <= index < len(config.patches):
        raise PreconditionError(f"no patch {index} in a layout of {len(config.patches)}")
    team = patch_team(state, config.patches[index])
    demand_sum = sum(state.demands[i] for i in team)
    viable = bool(team) and bool(value(state.board, team))
    return PatchStatus(viable, demand_sum <= config.total_reward, team, demand_sum)


def _closes_deal(state: TPState, status: PatchStatus) -> bool:
    return (
        status.viable
        and status.valid
        and status.demand_sum > 0
        and all(state.demands[i] > 0 for i in status.team)
    )


def _move(pose: Pose, action: Action) -> Pose:
    row, col, facing = pose
    if action is Action.ROTATE_LEFT:
        return row, col, Orientation((facing + 3) % 4)
    if action is Action.ROTATE_RIGHT:
        return row, col, Orientation((facing + 1) % 4)
    dr, dc = _HEADINGS[(facing + _MOVE_TURNS[action]) % 4]
    return row + dr, col + dc, facing


def step(
    state: TPState, joint_actions: Sequence[int], config: TPConfig
) -> tuple[TPState, bool, tuple[float, ...]]:
    """Apply one action per agent, then check the patches in index order.

    Moves are resolved in agent-index order against the positions already taken, so an
    agent blocked by a wall or an occupied cell stays where it is.

    Returns:
        Tuple of (next state, done, per-agent rewards of this step)

    Raises:
        IllegalActionError: On a wrong number of actions, an unknown action, or a
            finished episode
    """
    n = state.board.n
    if state.done:
        raise IllegalActionError("episode already terminated")
    if len(joint_actions) != n:
        raise IllegalActionError(f"expected {n} actions, got {len(joint_actions)}")
    limit = num_actions(config)

    poses = list(state.poses)
    demands = list(state.demands)
    occupied = {(row, col) for row, col, _ in poses}
    for agent, raw in enumerate(joint_actions):
        if not 0 <= int(raw) < limit:
            raise IllegalActionError(f"agent {agent} chose action {raw} outside [0, {limit})")
        if raw >= Action.SET_DEMAND:
            demands[agent] = int(raw) - Action.SET_DEMAND + 1
            continue
        action = Action(int(raw))
        if action is Action.NOOP:
            continue
        row, col, facing = poses[agent]
        new_row, new_col, new_facing = _move(poses[agent], action)
        inside = 0 <= new_row < config.grid_size and 0 <= new_col < config.grid_size
        if (new_row, new_col) != (row, col) and (not inside or (new_row, new_col) in occupied):
            continue
        occupied.discard((row, col))
        occupied.add((new_row, new_col))
        poses[agent] = (new_row, new_col, new_facing)

    moved = replace(state, poses=tuple(poses), demands=tuple(demands), step=state.step + 1)
    for index in range(len(config.patches)):
        status = patch_status(moved, config, index)
        if _closes_deal(moved, status):
            rewards = tuple(float(demands[i]) if i in status.team else 0.0 for i in range(n))
            color = config.patches[index].color.value
            logger.debug(f"Patch {color} closes with {sorted(status.team)}")
            return replace(moved, terminal_rewards=rewards), True, rewards

    zeros = (0.0,) * n
    if moved.step >= config.max_steps:
        return replace(moved, terminal_rewards=zeros), True, zeros
    return moved, False, zeros


@lru_cache(maxsize=64)
def _padded_planes(grid_size: int, window: int, patches: tuple[Patch, ...]) -> np.ndarray:
    pad = window // 2
    size = grid_size + 2 * pad
    planes = np.zeros((N_PLANES - 1, size, size))
    planes[WALL_PLANE] = 1.0
    planes[WALL_PLANE, pad:-pad, pad:-pad] = 0.0
    for patch in patches:
        plane = _color_plane(patch.color)
        rows = slice(pad + patch.rows[0], pad + patch.rows[1] + 1)
        cols = slice(pad + patch.cols[0], pad + patch.cols[1] + 1)
        planes[plane, rows, cols] = 1.0
    planes.setflags(write=False)
    return planes


def observe_all(state: TPState, config: TPConfig) -> list[TPObservation]:
    """Observations of every agent.

    The grid is a ``(planes, window, window)`` stack centered on the agent and rotated
    so that the agent faces up: one wall plane (cells outside the world), one plane per
    patch color and one plane marking the other agents. Features are the own index
    one-hot, weights divided by the quota and demands divided by ``r``.
    """
    board = state.board
    n = board.n
    window = config.window
    pad = window // 2
    static = _padded_planes(config.grid_size, window, tuple(config.patches))
    agents = np.zeros(static.shape[1:])
    for row, col, _ in state.poses:
        agents[pad + row, pad + col] = 1.0
    weights = np.asarray(board.weights, dtype=float) / board.quota
    demands = np.asarray(state.demands, dtype=float) / config.total_reward

    observations = []
    for i, (row, col, facing) in enumerate(state.poses):
        view = np.empty((N_PLANES, window, window))
        view[:AGENT_PLANE] = static[:, row : row + window, col : col + window]
        view[AGENT_PLANE] = agents[row : row + window, col : col + window]
        view[AGENT_PLANE, pad, pad] = 0.0
        view = np.rot90(view, k=int(facing), axes=(1, 2))
        features = np.concatenate([np.eye(n)[i], weights, demands])
        observations.append(TPObservation(grid=np.ascontiguousarray(view), features=features))
    return observations


def perturbation_layout(
    board: Board, offset: int, base: TPConfig | None = None, max_steps: int | None = None
) -> TPConfig:
    """Two-patch layout with the heaviest agent ``offset`` free cells below the red patch.

    Red covers rows 0-2 and columns 0-6, blue rows 0-2 and columns 8-14. The heaviest
    agent spawns in column 3, every other agent in the central block.
    """
    base = base or TPConfig()
    if base.grid_size != 15:
        raise ConfigError("the perturbation layout is defined on the 15x15 grid")
    if not 0 <= offset <= 10:
        raise PreconditionError(f"offset must lie in [0, 10], got {offset}")
    patches = [
        Patch(color=PatchColor.RED, rows=(0, 2), cols=(0, 6)),
        Patch(color=PatchColor.BLUE, rows=(0, 2), cols=(8, 14)),
    ]
    return base.model_copy(
        update={
            "patches": patches,
            "spawn_overrides": {board.max_weight_agent: (3 + offset, 3)},
            "max_steps": max_steps or base.max_steps,
        }
    )


_GLYPHS = {PatchColor.RED: "r", PatchColor.GREEN: "g", PatchColor.BLUE: "b"}
_ARROWS = "^>v<"


def render_ascii(state: TPState, config: TPConfig) -> str:
    """Debug dump: patch cells as color letters, agents as index plus heading arrow."""
    rows = [["." for _ in range(config.grid_size)] for _ in range(config.grid_size)]
    for patch in config.patches:
        for r in range(patch.rows[0], patch.rows[1] + 1):
            for c in range(patch.cols[0], patch.cols[1] + 1):
                rows[r][c] = _GLYPHS[patch.color]
    cells = [" ".join(f"{ch} " for ch in row) for row in rows]
    grid = [list(line) for line in cells]
    for i, (r, c, facing) in enumerate(state.poses):
        grid[r][3 * c] = str(i % 10)
        grid[r][3 * c + 1] = _ARROWS[facing]
    demands = " ".join(f"{i}:{d}" for i, d in enumerate(state.demands))
    body = "\n".join("".join(line).rstrip() for line in grid)
    return f"{body}\nstep {state.step}  demands {demands}"


class TeamPatchesEnv:
    """Stateful wrapper in which every agent acts on every step."""

    def __init__(self, board: Board, config: TPConfig, rng: np.random.Generator):
        """Initialize the environment.

        Args:
            board: Game played in every episode until ``set_board``
            config: Environment configuration
            rng: Random stream owned by this instance
        """
        self.board = board
        self.config = config
        self.rng = rng
        self.state: TPState | None = None

    @property
    def n_agents(self) -> int:
        """Number of seats."""
        return self.board.n

    @property
    def n_actions(self) -> int:
        """Movement actions plus demand actions."""
        return num_actions(self.config)

    @property
    def grid_shape(self) -> tuple[int, int, int]:
        """Shape of the observation planes."""
        return N_PLANES, self.config.window, self.config.window

    @property
    def feature_size(self) -> int:
        """Length of the observation feature vector."""
        return 3 * self.board.n

    def set_board(self, board: Board) -> None:
        """Play ``board`` from the next reset on; the agent count must not change."""
        if board.n != self.board.n:
            raise IllegalActionError(f"board has {board.n} agents, environment has {self.board.n}")
        self.board = board

    def reset(self) -> list[TPObservation]:
        """Start a new episode."""
        self.state, observations = reset(self.board, self.config, self.rng)
        return observations

    def step(self, actions: Sequence[int]) -> tuple[list[TPObservation], tuple[float, ...], bool]:
        """Apply a joint action.

        Returns:
            Tuple of (observations, per-agent rewards, done)
        """
        self.state, done, rewards = step(self.state, actions, self.config)
        return observe_all(self.state, self.config), rewards, done

    def decode(self, action: int) -> str:
        """Readable form of an action for trajectory logs."""
        if action >= Action.SET_DEMAND:
            return f"demand {action - Action.SET_DEMAND + 1}"
        return Action(action).name.lower()
