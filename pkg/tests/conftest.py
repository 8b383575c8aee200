"""Configure tests."""

import numpy as np
import pytest

from teamform.config import Settings
from teamform.domain.models import Board, PAConfig, RLConfig, TPConfig


@pytest.fixture
def example_board():
    """Five-agent board used throughout the negotiation examples."""
    return Board.parse("5 6 7 5 4 ; 15")


@pytest.fixture
def dictator_board():
    """Board where agent 0 wins alone and everyone else is powerless."""
    return Board.parse("16 1 1 1 1 ; 15")


@pytest.fixture
def nash_board():
    """Two heavy and three light players with a unit quota."""
    return Board.parse("0.4 0.4 0.2 0.2 0.2 ; 1")


@pytest.fixture
def rng():
    """Seeded random stream."""
    return np.random.default_rng(1234)


@pytest.fixture
def pa_config():
    """Small Propose-Accept configuration."""
    return PAConfig(total_reward=6, continue_prob=0.9)


@pytest.fixture
def tp_config():
    """Default Team Patches layout with a short horizon."""
    return TPConfig(max_steps=20)


@pytest.fixture
def tiny_rl():
    """Learner config small enough for unit tests."""
    return RLConfig(
        episodes=20,
        mlp_hidden=(8,),
        ac_hidden=(8,),
        curve_interval=5,
        n_parallel_envs=2,
        unroll_length=4,
        learning_rate=1e-3,
    )


@pytest.fixture
def settings(tmp_path, monkeypatch):
    """Settings rooted in a temporary directory with tiny experiment budgets."""
    monkeypatch.chdir(tmp_path)
    return Settings(
        seed=7,
        output_dir=tmp_path / "runs",
        boards={"n_train": 6, "n_test": 3},
        propose_accept={"total_reward": 4},
        team_patches={"max_steps": 10, "window": 5},
        rl={
            "episodes": 30,
            "mlp_hidden": [8],
            "ac_hidden": [8],
            "curve_interval": 10,
            "n_parallel_envs": 2,
            "unroll_length": 5,
        },
        harness={
            "n_boards": 2,
            "population_seeds": 1,
            "training_episodes": 30,
            "eval_episodes": 5,
            "total_reward": 4,
            "regression_boards": 40,
            "regression_epochs": 5,
            "regression_batch_size": 8,
            "perturbation_offsets": [0, 2],
            "perturbation_max_steps": 10,
        },
    )
