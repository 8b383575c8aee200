"""Domain models for games, environments, learners and experiment results."""

from datetime import datetime
from enum import Enum
from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from teamform.domain.types import Coalition


def format_number(value: float) -> str:
    """Render a weight or quota so that parsing it back is bit-exact."""
    return str(int(value)) if float(value).is_integer() else repr(float(value))


class Board(BaseModel):
    """A weighted voting game ``[w_1, ..., w_n; q]``."""

    model_config = ConfigDict(frozen=True)

    weights: tuple[float, ...]
    quota: float

    @field_validator("weights")
    @classmethod
    def check_weights(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        """Require at least one agent and nonnegative weights."""
        if not v:
            raise ValueError("a board needs at least one agent")
        if any(w < 0 for w in v):
            raise ValueError("weights must be nonnegative")
        return v

    @field_validator("quota")
    @classmethod
    def check_quota(cls, v: float) -> float:
        """Require a positive quota."""
        if v <= 0:
            raise ValueError("quota must be positive")
        return v

    @model_validator(mode="after")
    def check_grand_coalition(self) -> "Board":
        """The grand coalition must win."""
        if sum(Fraction(str(w)) for w in self.weights) < Fraction(str(self.quota)):
            raise ValueError("quota exceeds the total weight")
        return self

    @property
    def n(self) -> int:
        """Number of agents."""
        return len(self.weights)

    @property
    def has_integer_weights(self) -> bool:
        """Return True if every weight is integral."""
        return all(float(w).is_integer() for w in self.weights)

    @property
    def max_weight_agent(self) -> int:
        """Index of the heaviest agent (lowest index on ties)."""
        return max(range(self.n), key=lambda i: (self.weights[i], -i))

    def __str__(self) -> str:
        """Return the board file representation ``w_1 ... w_n ; q``."""
        weights = " ".join(format_number(w) for w in self.weights)
        return f"{weights} ; {format_number(self.quota)}"

    @classmethod
    def parse(cls, text: str) -> "Board":
        """Parse ``"5 6 7 5 4 ; 15"`` into a board."""
        left, sep, right = text.partition(";")
        if not sep:
            raise ValueError(f"missing ';' separator in {text!r}")
        return cls(weights=tuple(float(w) for w in left.split()), quota=float(right))


class ShapleyVector(BaseModel):
    """Shapley values of every agent of a board."""

    model_config = ConfigDict(frozen=True)

    values: tuple[float, ...]

    @field_validator("values")
    @classmethod
    def check_efficiency(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        """Values lie in [0, 1] and sum to one."""
        if any(x < 0 or x > 1 for x in v):
            raise ValueError("Shapley values must lie in [0, 1]")
        if abs(sum(v) - 1.0) > 1e-9:
            raise ValueError(f"Shapley values sum to {sum(v)}, expected 1")
        return v

    def __getitem__(self, index: int) -> float:
        """Return the value of agent ``index``."""
        return self.values[index]

    def __len__(self) -> int:
        """Return the number of agents."""
        return len(self.values)


class BoardDistribution(BaseModel):
    """Gaussian weight distribution over boards (D, or D' without the exclusion rule)."""

    n: int = Field(default=5, ge=2)
    quota: float = Field(default=15.0, gt=0)
    weight_mean: float = 6.0
    weight_std: float = Field(default=1.0, gt=0)
    exclude_equal_power: bool = True
    integer_weights: bool = True


class SplitLabel(str, Enum):
    """Which side of a train/test split a board set belongs to."""

    TRAIN = "train"
    TEST = "test"


class BoardSet(BaseModel):
    """Ordered collection of unique boards."""

    boards: list[Board]
    label: SplitLabel
    seed: int

    @model_validator(mode="after")
    def check_unique(self) -> "BoardSet":
        """Boards are unique by exact weights vector and quota."""
        if len(set(self.boards)) != len(self.boards):
            raise ValueError("board set contains duplicates")
        return self

    def __len__(self) -> int:
        """Return the number of boards."""
        return len(self.boards)


class PAConfig(BaseModel):
    """Propose-Accept environment configuration."""

    total_reward: int = Field(default=20, gt=0)
    continue_prob: float = Field(default=0.9, gt=0, lt=1)
    shapley_aware: bool = False
    max_rounds: int | None = Field(default=None, ge=1)


class PatchColor(str, Enum):
    """Patch colors of the Team Patches world."""

    RED = "red"
    GREEN = "green"
    BLUE = "blue"


class Patch(BaseModel):
    """Axis-aligned patch rectangle with inclusive row and column bounds."""

    model_config = ConfigDict(frozen=True)

    color: PatchColor
    rows: tuple[int, int]
    cols: tuple[int, int]

    @model_validator(mode="after")
    def check_bounds(self) -> "Patch":
        """Bounds are ordered and nonnegative."""
        if self.rows[0] > self.rows[1] or self.cols[0] > self.cols[1]:
            raise ValueError(f"empty patch rectangle {self.rows} x {self.cols}")
        if min(self.rows + self.cols) < 0:
            raise ValueError("patch coordinates must be nonnegative")
        return self

    def contains(self, row: int, col: int) -> bool:
        """Return True if the cell lies in the rectangle (boundary included)."""
        return self.rows[0] <= row <= self.rows[1] and self.cols[0] <= col <= self.cols[1]

    def distance(self, row: int, col: int) -> int:
        """L1 distance from a cell to the nearest cell of the patch."""
        dr = max(self.rows[0] - row, 0, row - self.rows[1])
        dc = max(self.cols[0] - col, 0, col - self.cols[1])
        return dr + dc


def default_patches() -> list[Patch]:
    """Red on the left, green on top, blue on the right."""
    return [
        Patch(color=PatchColor.RED, rows=(5, 9), cols=(0, 2)),
        Patch(color=PatchColor.GREEN, rows=(0, 2), cols=(5, 9)),
        Patch(color=PatchColor.BLUE, rows=(5, 9), cols=(12, 14)),
    ]


class TPConfig(BaseModel):
    """Team Patches environment configuration."""

    grid_size: int = Field(default=15, ge=3)
    patches: list[Patch] = Field(default_factory=default_patches)
    total_reward: int = Field(default=7, gt=0)
    max_steps: int = Field(default=100, ge=1)
    spawn_rows: tuple[int, int] = (6, 8)
    spawn_cols: tuple[int, int] = (6, 8)
    spawn_overrides: dict[int, tuple[int, int]] = Field(default_factory=dict)
    allow_spawn_in_patch: bool = False
    window: int = Field(default=11, ge=3)

    @field_validator("window")
    @classmethod
    def check_window(cls, v: int) -> int:
        """The ego window is centered, so its side must be odd."""
        if v % 2 == 0:
            raise ValueError("window size must be odd")
        return v

    @model_validator(mode="after")
    def check_layout(self) -> "TPConfig":
        """Patches lie inside the grid and do not overlap."""
        for patch in self.patches:
            if max(patch.rows + patch.cols) >= self.grid_size:
                raise ValueError(f"patch {patch.color.value} lies outside the grid")
        cells = [
            (r, c)
            for patch in self.patches
            for r in range(patch.rows[0], patch.rows[1] + 1)
            for c in range(patch.cols[0], patch.cols[1] + 1)
        ]
        if len(cells) != len(set(cells)):
            raise ValueError("patches overlap")
        return self


class Algorithm(str, Enum):
    """Learning algorithm of a population."""

    SARSA = "sarsa"
    ACTOR_CRITIC = "actor-critic"


class EnvKind(str, Enum):
    """Negotiation environment."""

    PROPOSE_ACCEPT = "pa"
    TEAM_PATCHES = "tp"


class RLConfig(BaseModel):
    """Hyperparameters of the independent learners."""

    algorithm: Algorithm | None = None
    trace_decay: float = Field(default=0.1, ge=0, le=1)
    gamma: float = Field(default=1.0, ge=0, le=1)
    learning_rate: float = Field(default=1e-4, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    epsilon_start: float = Field(default=0.2, ge=0, le=1)
    epsilon_end: float = Field(default=0.01, ge=0, le=1)
    epsilon_decay_fraction: float = Field(default=0.5, gt=0, le=1)
    n_parallel_envs: int = Field(default=16, ge=1)
    unroll_length: int = Field(default=20, ge=1)
    entropy_cost: float = Field(default=0.01, ge=0)
    baseline_cost: float = Field(default=0.5, ge=0)
    rho_bar: float = Field(default=1.0, gt=0)
    c_bar: float = Field(default=1.0, gt=0)
    episodes: int = Field(default=50_000, ge=0)
    mlp_hidden: tuple[int, ...] = (64, 64, 64)
    optimistic_init: bool = True
    conv_channels: int = Field(default=6, ge=1)
    conv_kernel: int = Field(default=3, ge=1)
    ac_hidden: tuple[int, ...] = (32, 32)
    curve_interval: int = Field(default=1000, ge=1)
    max_workers: int = Field(default=1, ge=1)


class BotMode(str, Enum):
    """Hand-crafted Propose-Accept negotiator."""

    RANDOM = "random"
    WEIGHT = "weight"
    SHAPLEY = "shapley"


class BotParams(BaseModel):
    """Bot configuration."""

    mode: BotMode = BotMode.RANDOM
    acceptance_scale: float = Field(default=5.0, gt=0)


class TargetAllocation(BaseModel):
    """Proportional target shares of a team and their closest integral allocation."""

    team: Coalition
    targets: dict[int, float]
    integral: dict[int, int]


class LearningCurvePoint(BaseModel):
    """Mean training reward of one seat over the last curve interval."""

    episode: int
    seat: int
    mean_reward: float


class EvaluationResult(BaseModel):
    """Frozen evaluation of a population on one board."""

    board: Board
    mean_rewards: tuple[float, ...]
    episode_rewards: list[tuple[float, ...]]


class NashTables(BaseModel):
    """Backward-induction tables indexed ``[t][i]`` with ``t`` remaining rounds."""

    acceptance: list[list[float]]
    payment: list[list[float]]
    proposer_payoff: list[list[float]]
    coalitions: list[list[list[Coalition]]]


class NashSolution(BaseModel):
    """Equilibrium tables and expected utilities of a fixed-horizon game."""

    board: Board
    total_reward: int
    rounds: int
    integer_thresholds: bool = False
    tables: NashTables
    expected_utilities: tuple[float, ...]
    normalized: tuple[float, ...]


class CorrespondencePair(BaseModel):
    """Shapley prediction and normalized share of one seat on one board."""

    board: int
    seat: int
    shapley: float = Field(ge=0, le=1)
    share: float = Field(ge=0, le=1)


class BoardInequality(BaseModel):
    """Power inequality of a board against its deviation from the prediction."""

    board: int
    weight_std: float
    shapley_std: float
    mean_abs_deviation: float


class CorrespondenceReport(BaseModel):
    """Pairs of predictions and outcomes with summary statistics."""

    pairs: list[CorrespondencePair]
    pearson: float
    mean_abs_deviation: float
    slope: float
    intercept: float
    inequality: list[BoardInequality] = Field(default_factory=list)
    inequality_pearson: float | None = None


class SeatComparison(BaseModel):
    """Mean shares of the RL agent and the bot playing one seat."""

    seat: int
    rl_mean_share: float
    bot_mean_share: float


class ComparisonResult(BaseModel):
    """All-RL group against single-bot group on the same seats and boards."""

    rl_mean_share: float
    bot_mean_share: float
    difference: float
    u_statistic: float
    p_value: float = Field(ge=0, le=1)
    n_rl: int
    n_bot: int
    per_seat: list[SeatComparison] = Field(default_factory=list)


class PerturbationPoint(BaseModel):
    """Max-weight agent share at one spawn offset."""

    offset: int
    perturbed_share: float
    unperturbed_share: float


class PerturbationReport(BaseModel):
    """Spawn-offset sweep of the max-weight agent."""

    points: list[PerturbationPoint]
    spearman: float


class RegressionReport(BaseModel):
    """Supervised Shapley regression on held-out boards."""

    train_mse: float
    test_mse: float
    test_r2: float
    hidden_units: int = 20
    n_boards: int
    n_train: int
    n_test: int


class NashPair(BaseModel):
    """Shapley value and normalized equilibrium payoff of one seat."""

    board: int
    seat: int
    shapley: float
    nash_share: float


class NashCorrelationReport(BaseModel):
    """Nash-Shapley pairs for the primary horizon and Pearson r per horizon."""

    rounds: int
    pairs: list[NashPair]
    pearson: float
    pearson_by_rounds: dict[int, float] = Field(default_factory=dict)


class RunManifest(BaseModel):
    """Record of one experiment run."""

    command: str
    seed: int
    started_at: datetime
    settings: dict = Field(default_factory=dict)
    outputs: dict[str, str] = Field(default_factory=dict)
