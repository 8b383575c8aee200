"""Population checkpoints: tensors in ``params.npz``, metadata in ``checkpoint.json``."""

from logging import getLogger
from pathlib import Path

import numpy as np
import orjson
from atomicwrites import atomic_write

from teamform.agents.bots import Bot
from teamform.domain.errors import ConfigError
from teamform.domain.models import BotParams, EnvKind, LearningCurvePoint, RLConfig
from teamform.learning.population import AgentPopulation, new_learner

logger = getLogger(__name__)

CHECKPOINT_VERSION = 1
PARAMS_FILE = "params.npz"
META_FILE = "checkpoint.json"


def _encode_rng(rng: np.random.Generator) -> dict:
    # 128-bit counters do not fit JSON integers
    state = rng.bit_generator.state
    return {
        "bit_generator": state["bit_generator"],
        "state": {key: hex(value) for key, value in state["state"].items()},
        "has_uint32": state["has_uint32"],
        "uinteger": state["uinteger"],
    }


def _decode_rng(payload: dict) -> np.random.Generator:
    if payload["bit_generator"] != "PCG64":
        raise ConfigError(f"unsupported bit generator {payload['bit_generator']}")
    rng = np.random.default_rng()
    rng.bit_generator.state = {
        "bit_generator": "PCG64",
        "state": {key: int(value, 16) for key, value in payload["state"].items()},
        "has_uint32": payload["has_uint32"],
        "uinteger": payload["uinteger"],
    }
    return rng


def save_population(population: AgentPopulation, directory: str | Path) -> Path:
    """Write every seat's parameters, optimizer moments and random stream.

    Args:
        population: Population to save
        directory: Checkpoint directory (created if missing)

    Returns:
        The checkpoint directory
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    arrays: dict[str, np.ndarray] = {}
    bots: dict[str, dict] = {}
    for i, seat in enumerate(population.seats):
        if isinstance(seat, Bot):
            bots[str(i)] = seat.params.model_dump(mode="json")
            continue
        arrays.update({f"seat{i}.param.{name}": p for name, p in seat.params.items()})
        arrays.update({f"seat{i}.opt.{name}": s for name, s in seat.optimizer.state_dict().items()})

    with atomic_write(directory / PARAMS_FILE, mode="wb", overwrite=True) as f:
        np.savez(f, **arrays)

    meta = {
        "version": CHECKPOINT_VERSION,
        "env_kind": population.env_kind.value,
        "kinds": population.kinds,
        "dimensions": population.dimensions,
        "config": population.config.model_dump(mode="json"),
        "bots": bots,
        "episodes_trained": population.episodes_trained,
        "curves": [point.model_dump(mode="json") for point in population.curves],
        "rng_states": [_encode_rng(seat.rng) for seat in population.seats],
    }
    with atomic_write(directory / META_FILE, mode="wb", overwrite=True) as f:
        f.write(orjson.dumps(meta, option=orjson.OPT_INDENT_2))
        f.write(b"\n")
    logger.info(f"Saved {population.kinds} to {directory}")
    return directory


def load_population(directory: str | Path) -> AgentPopulation:
    """Rebuild a population saved by ``save_population``.

    Raises:
        ConfigError: If the checkpoint is missing or has another format version
    """
    directory = Path(directory)
    meta_path = directory / META_FILE
    if not meta_path.is_file():
        raise ConfigError(f"no checkpoint at {directory}")
    meta = orjson.loads(meta_path.read_bytes())
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ConfigError(f"checkpoint version {meta.get('version')} != {CHECKPOINT_VERSION}")

    env_kind = EnvKind(meta["env_kind"])
    config = RLConfig.model_validate(meta["config"])
    dimensions = meta["dimensions"]
    rngs = [_decode_rng(state) for state in meta["rng_states"]]

    with np.load(directory / PARAMS_FILE) as archive:
        arrays = {key: archive[key] for key in archive.files}

    seats = []
    for i, kind in enumerate(meta["kinds"]):
        if kind.startswith("bot:"):
            seats.append(Bot(BotParams.model_validate(meta["bots"][str(i)]), rngs[i]))
            continue
        # initial values are overwritten below
        agent = new_learner(env_kind, dimensions, config, np.random.default_rng(0))
        for name, p in agent.params.items():
            p[...] = arrays[f"seat{i}.param.{name}"]
        prefix = f"seat{i}.opt."
        agent.optimizer.load_state_dict(
            {
                key.removeprefix(prefix): value
                for key, value in arrays.items()
                if key.startswith(prefix)
            }
        )
        agent.rng = rngs[i]
        seats.append(agent)

    return AgentPopulation(
        env_kind,
        seats,
        config,
        dimensions,
        episodes_trained=meta["episodes_trained"],
        curves=[LearningCurvePoint.model_validate(point) for point in meta["curves"]],
    )
