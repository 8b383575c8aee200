"""Run manifests recording what an experiment ran and what it wrote."""

from datetime import UTC, datetime
from logging import getLogger
from pathlib import Path

import orjson
import xxhash
from atomicwrites import atomic_write

from teamform.domain.models import RunManifest

logger = getLogger(__name__)


def compute_file_hash(file_path: Path, chunk_size: int = 64 * 1024) -> str:
    """Compute the xxh128 digest of a file.

    Args:
        file_path: Path to the file
        chunk_size: Size of chunks to read (default 64KB)

    Returns:
        Hexadecimal hash string (32 characters)
    """
    hasher = xxhash.xxh128()
    with open(file_path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


class ManifestManager:
    """Context manager writing a run manifest when the run finishes cleanly.

    Example:
        with ManifestManager(out / "manifest.json", "correspondence", seed, settings) as run:
            write_pairs(out / "pairs.csv", pairs)
            run.record_output(out / "pairs.csv")
    """

    def __init__(self, path: str | Path, command: str, seed: int, settings: dict | None = None):
        """Initialize the manager.

        Args:
            path: Manifest JSON file
            command: CLI command or experiment name
            seed: Root seed of the run
            settings: Settings dump the run used
        """
        self.path = Path(path)
        self.data = RunManifest(
            command=command,
            seed=seed,
            started_at=datetime.now(UTC),
            settings=settings or {},
        )

    def __enter__(self) -> "ManifestManager":
        """Enter context manager, preparing the output directory."""
        self.path.parent.mkdir(parents=True, exist_ok=True)
        return self

    def record_output(self, path: str | Path) -> str:
        """Record an output file and its digest.

        Returns:
            The xxh128 digest
        """
        path = Path(path)
        digest = compute_file_hash(path)
        try:
            key = str(path.resolve().relative_to(self.path.parent.resolve()))
        except ValueError:
            key = str(path)
        self.data.outputs[key] = digest
        logger.debug(f"Recorded {key} ({digest})")
        return digest

    def __exit__(self, exc_type, exc_value, traceback) -> bool:
        """Exit context manager, saving the manifest if no exception occurred.

        Returns:
            False to propagate any exceptions
        """
        if exc_type is None:
            try:
                payload = orjson.dumps(
                    self.data.model_dump(mode="json"),
                    option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS,
                )
                with atomic_write(self.path, mode="wb", overwrite=True) as f:
                    f.write(payload)
                    f.write(b"\n")
            except OSError as e:
                logger.error(f"Failed to write manifest {self.path}: {e}")
                raise
        else:
            logger.warning(f"Run {self.data.command} failed; manifest {self.path} not written")

        return False


def load_manifest(path: str | Path) -> RunManifest:
    """Read a manifest written by ``ManifestManager``."""
    return RunManifest.model_validate(orjson.loads(Path(path).read_bytes()))
