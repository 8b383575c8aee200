"""Step-level trajectory logs as JSON lines."""

from logging import getLogger
from pathlib import Path
from typing import IO

import orjson

logger = getLogger(__name__)


class TrajectoryLog:
    """Context manager appending one JSON record per environment step.

    Example:
        with TrajectoryLog(out / "trajectory.jsonl") as log:
            evaluate_frozen(population, factory, board, 10, seed, trajectory=log)
    """

    def __init__(self, path: str | Path):
        """Initialize the log.

        Args:
            path: JSON lines file, truncated on enter
        """
        self.path = Path(path)
        self.records = 0
        self._file: IO[bytes] | None = None

    def __enter__(self) -> "TrajectoryLog":
        """Open the file for writing."""
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "wb")  # noqa: SIM115
        return self

    def record(self, **fields) -> None:
        """Write one step record."""
        if self._file is None:
            raise RuntimeError("trajectory log is not open")
        self._file.write(orjson.dumps(fields, option=orjson.OPT_SERIALIZE_NUMPY))
        self._file.write(b"\n")
        self.records += 1

    def __exit__(self, exc_type, exc_value, traceback) -> bool:
        """Close the file.

        Returns:
            False to propagate any exceptions
        """
        if self._file is not None:
            self._file.close()
            self._file = None
        logger.debug(f"Wrote {self.records} steps to {self.path}")
        return False


def read_trajectory(path: str | Path) -> list[dict]:
    """Load every record of a trajectory log."""
    return [orjson.loads(line) for line in Path(path).read_bytes().splitlines() if line]
