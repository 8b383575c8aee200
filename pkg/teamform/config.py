"""Experiment configuration with environment variable and TOML file support."""

from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from teamform.domain.errors import ConfigError
from teamform.domain.models import BoardDistribution, BotMode, PAConfig, RLConfig, TPConfig


class BoardSettings(BoardDistribution):
    """Board distribution plus split sizes."""

    n_train: int = Field(default=150, ge=1)
    n_test: int = Field(default=50, ge=1)


class BotSettings(BaseModel):
    """Bot baselines."""

    mode: BotMode = BotMode.RANDOM
    acceptance_scale: float = Field(default=5.0, gt=0)
    eval_mode: BotMode | None = None


class Preset(str, Enum):
    """Experiment scale."""

    DESK = "desk"
    FULL = "full"


class HarnessSettings(BaseModel):
    """Experiment budgets; the full preset overrides the desk defaults."""

    preset: Preset = Preset.DESK
    n_boards: int = Field(default=10, ge=1)
    population_seeds: int = Field(default=3, ge=1)
    training_episodes: int = Field(default=50_000, ge=0)
    eval_episodes: int = Field(default=2_000, ge=1)
    total_reward: int = Field(default=10, gt=0)
    regression_boards: int = Field(default=3_000, ge=10)
    regression_test_fraction: float = Field(default=0.2, gt=0, lt=1)
    regression_hidden: int = Field(default=20, ge=1)
    regression_epochs: int = Field(default=1_000, ge=1)
    regression_batch_size: int = Field(default=64, ge=1)
    regression_learning_rate: float = Field(default=1e-3, gt=0)
    regression_final_lr_fraction: float = Field(default=0.1, gt=0, le=1)
    perturbation_offsets: tuple[int, ...] = tuple(range(11))
    perturbation_max_steps: int | None = Field(default=None, ge=1)
    nash_rounds: tuple[int, ...] = (10,)
    nash_integer_thresholds: bool = True

    @model_validator(mode="after")
    def apply_preset(self) -> "HarnessSettings":
        """Full scale: 500k training episodes and 5k evaluation episodes."""
        if self.preset is Preset.FULL:
            self.training_episodes = 500_000
            self.eval_episodes = 5_000
        return self

    @field_validator("perturbation_offsets")
    @classmethod
    def check_offsets(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        """Offsets lie in [0, 10]."""
        if not v or any(o < 0 or o > 10 for o in v):
            raise ValueError("perturbation offsets must lie in [0, 10]")
        return v

    @field_validator("nash_rounds")
    @classmethod
    def check_rounds(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        """At least one positive horizon."""
        if not v or any(t < 1 for t in v):
            raise ValueError("Nash horizons must be positive")
        return v


class Settings(BaseSettings):
    """Experiment configuration.

    Loads from explicit arguments, environment (TEAMFORM_*, nested with ``__``), a .env
    file, an optional TOML file, or defaults, in that order of precedence.
    """

    model_config = SettingsConfigDict(
        env_prefix="TEAMFORM_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    seed: int = 0
    output_dir: Path = Path("runs")

    boards: BoardSettings = Field(default_factory=BoardSettings)
    propose_accept: PAConfig = Field(default_factory=PAConfig)
    team_patches: TPConfig = Field(default_factory=TPConfig)
    rl: RLConfig = Field(default_factory=RLConfig)
    bots: BotSettings = Field(default_factory=BotSettings)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        """Add the TOML file (if configured) below the environment sources."""
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            TomlConfigSettingsSource(settings_cls),
        )

    @field_validator("output_dir", mode="after")
    @classmethod
    def create_dirs(cls, v: Path) -> Path:
        """Create the output directory if it doesn't exist."""
        v.mkdir(parents=True, exist_ok=True)
        return v.resolve()

    @classmethod
    def from_toml(cls, path: str | Path, **overrides) -> "Settings":
        """Load settings with ``path`` as the TOML layer.

        Args:
            path: TOML file with one table per section
            **overrides: Explicit values taking precedence over every other source

        Raises:
            ConfigError: If the file does not exist
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        file_settings = type(
            "FileSettings",
            (cls,),
            {"model_config": SettingsConfigDict(**cls.model_config, toml_file=path)},
        )
        return file_settings(**overrides)
