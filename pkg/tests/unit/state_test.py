"""Unit tests for run manifests, CSV outputs, checkpoints and trajectory logs."""

import numpy as np
import orjson
import pytest

from teamform.domain.errors import ConfigError
from teamform.domain.models import BotParams, CorrespondencePair, EnvKind, RegressionReport
from teamform.learning.population import evaluate_frozen, make_env_factory, train_population
from teamform.state.checkpoints import META_FILE, load_population, save_population
from teamform.state.manifest import ManifestManager, compute_file_hash, load_manifest
from teamform.state.outputs import read_csv, write_csv, write_pairs, write_report
from teamform.state.trajectory import TrajectoryLog, read_trajectory


class TestManifest:
    """Test run manifests."""

    def test_hash_is_stable(self, tmp_path):
        """Identical content, identical digest."""
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        a.write_text("board,seat\n0,1\n")
        b.write_text("board,seat\n0,1\n")
        assert compute_file_hash(a) == compute_file_hash(b)
        assert len(compute_file_hash(a)) == 32

    def test_written_on_success(self, tmp_path):
        """Outputs are recorded relative to the manifest."""
        out = tmp_path / "run"
        with ManifestManager(out / "manifest.json", "shapley", 3, {"seed": 3}) as run:
            digest = run.record_output(write_csv(out / "x.csv", ["a"], [[1]]))

        manifest = load_manifest(out / "manifest.json")
        assert manifest.command == "shapley"
        assert manifest.seed == 3
        assert manifest.outputs == {"x.csv": digest}

    def test_skipped_on_failure(self, tmp_path):
        """A failing run leaves no manifest."""
        path = tmp_path / "run" / "manifest.json"
        with pytest.raises(RuntimeError):
            with ManifestManager(path, "train", 0):
                raise RuntimeError("boom")
        assert not path.exists()


class TestOutputs:
    """Test CSV and JSON outputs."""

    def test_floats_survive_exactly(self, tmp_path):
        """Shares parse back to the same floats."""
        pairs = [CorrespondencePair(board=0, seat=1, shapley=1 / 3, share=0.1 + 0.2)]
        rows = read_csv(write_pairs(tmp_path / "pairs.csv", pairs))
        assert list(rows[0]) == ["board", "seat", "shapley", "share"]
        assert float(rows[0]["shapley"]) == 1 / 3
        assert float(rows[0]["share"]) == 0.1 + 0.2

    def test_report_json(self, tmp_path):
        """Reports are written as JSON objects."""
        report = RegressionReport(train_mse=0.1, test_mse=0.2, test_r2=0.9, n_boards=10, n_train=8, n_test=2)
        payload = orjson.loads(write_report(tmp_path / "summary.json", report).read_bytes())
        assert payload["test_r2"] == 0.9
        assert payload["hidden_units"] == 20


class TestCheckpoints:
    """Test population checkpoints."""

    def test_round_trip(self, tmp_path, example_board, pa_config, tiny_rl):
        """A reloaded population plays exactly like the saved one."""
        factory = make_env_factory(EnvKind.PROPOSE_ACCEPT, pa=pa_config)
        population = train_population(
            factory, [example_board], tiny_rl, 8, EnvKind.PROPOSE_ACCEPT, bots={4: BotParams(mode="shapley")}
        )
        save_population(population, tmp_path / "ckpt")
        restored = load_population(tmp_path / "ckpt")

        assert restored.kinds == population.kinds
        assert restored.episodes_trained == population.episodes_trained
        assert restored.curves == population.curves
        for seat in population.learner_seats:
            for name, p in population.seats[seat].params.items():
                np.testing.assert_array_equal(restored.seats[seat].params[name], p)
        assert evaluate_frozen(restored, factory, example_board, 10, 1) == evaluate_frozen(
            population, factory, example_board, 10, 1
        )

    def test_streams_resume(self, tmp_path, example_board, pa_config, tiny_rl):
        """Seat random streams continue where they stopped."""
        factory = make_env_factory(EnvKind.PROPOSE_ACCEPT, pa=pa_config)
        population = train_population(factory, [example_board], tiny_rl, 8, EnvKind.PROPOSE_ACCEPT)
        save_population(population, tmp_path / "ckpt")
        restored = load_population(tmp_path / "ckpt")
        assert restored.seats[0].rng.random() == population.seats[0].rng.random()

    def test_missing_checkpoint(self, tmp_path):
        """Loading nothing is a configuration error."""
        with pytest.raises(ConfigError):
            load_population(tmp_path / "nothing")

    def test_version_mismatch(self, tmp_path, example_board, pa_config, tiny_rl):
        """Other format versions are refused."""
        factory = make_env_factory(EnvKind.PROPOSE_ACCEPT, pa=pa_config)
        population = train_population(
            factory, [example_board], tiny_rl.model_copy(update={"episodes": 0}), 0, EnvKind.PROPOSE_ACCEPT
        )
        directory = save_population(population, tmp_path / "ckpt")
        meta = orjson.loads((directory / META_FILE).read_bytes())
        meta["version"] = 99
        (directory / META_FILE).write_bytes(orjson.dumps(meta))
        with pytest.raises(ConfigError):
            load_population(directory)


class TestTrajectory:
    """Test trajectory logs."""

    def test_propose_accept_steps(self, tmp_path, example_board, pa_config, tiny_rl):
        """Every step is one record with actors, actions and rewards."""
        factory = make_env_factory(EnvKind.PROPOSE_ACCEPT, pa=pa_config)
        population = train_population(factory, [example_board], tiny_rl, 2, EnvKind.PROPOSE_ACCEPT)
        with TrajectoryLog(tmp_path / "trajectory.jsonl") as log:
            evaluate_frozen(population, factory, example_board, 3, 0, trajectory=log)

        records = read_trajectory(tmp_path / "trajectory.jsonl")
        assert len(records) == log.records
        assert {r["episode"] for r in records} == {0, 1, 2}
        assert records[0]["phase"] == "propose"
        assert all(len(r["rewards"]) == 5 for r in records)

    def test_closed_log_refuses_records(self, tmp_path):
        """Records need an open log."""
        with pytest.raises(RuntimeError):
            TrajectoryLog(tmp_path / "t.jsonl").record(step=0)
